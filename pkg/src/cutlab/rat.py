"""Exact rational arithmetic: scalars, dense matrices, determinants, Cramer solves.

Every quantity in this package (objectives, constraint data, cut parameters,
LP vertices) is an exact rational, so invariance tests are zero-tolerance
equality checks.  Scalars are gmpy2.mpq when available (much faster), else
fractions.Fraction; both store reduced p/q with q > 0 and print as "p/q".
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

try:
    from gmpy2 import mpq as _mpq

    _RAT_TYPES = None  # set below

    def _make(p, q):
        return _mpq(p, q)

except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _mpq

    def _make(p, q):
        return _mpq(p, q)


#: The rational scalar type. Treat as opaque; construct via rat().
Rat = type(_make(0, 1))

ZERO = _make(0, 1)
ONE = _make(1, 1)

RatLike = Union[int, str, Rat]


class NonSquareError(ValueError):
    """Determinant requested for a non-square matrix."""


class SingularError(ValueError):
    """Linear system has a singular coefficient matrix."""


def rat(p: RatLike, q: int = 1) -> Rat:
    """Build a rational from an int, a "p/q" string, or another rational."""
    if isinstance(p, str):
        if q != 1:
            raise ValueError("cannot combine a string literal with a denominator")
        text = p.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            return _make(int(num), int(den))
        return _make(int(text), 1)
    return _make(p, q)


def fmt(x: Rat) -> str:
    """Canonical text form: "p/q", or "p" when the denominator is 1."""
    return str(x)


def qfloor(x: Rat) -> int:
    return x.numerator // x.denominator


def qceil(x: Rat) -> int:
    return -((-x.numerator) // x.denominator)


def qfrac(x: Rat) -> Rat:
    """Fractional part x - floor(x), always in [0, 1)."""
    return x - qfloor(x)


def is_integral(x: Rat) -> bool:
    return x.denominator == 1


def dot(u: Sequence[Rat], v: Sequence[Rat]) -> Rat:
    if len(u) != len(v):
        raise ValueError(f"dot length mismatch: {len(u)} vs {len(v)}")
    acc = ZERO
    for a, b in zip(u, v):
        acc += a * b
    return acc


def vec(values: Iterable[RatLike]) -> tuple:
    return tuple(rat(v) for v in values)


class RMatrix:
    """Dense rational matrix, row-major.

    Immutable by convention: no method mutates entries after construction.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows_of_entries: Sequence[Sequence[RatLike]]):
        self.data = [[rat(x) for x in row] for row in rows_of_entries]
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        for row in self.data:
            if len(row) != self.cols:
                raise ValueError("ragged rows in matrix")

    @property
    def entries(self) -> list:
        """Row-major flat entry list (rows * cols items)."""
        return [x for row in self.data for x in row]

    @staticmethod
    def identity(n: int) -> "RMatrix":
        return RMatrix([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    def __eq__(self, other) -> bool:
        return isinstance(other, RMatrix) and self.data == other.data

    def __repr__(self) -> str:
        body = "; ".join(" ".join(fmt(x) for x in row) for row in self.data)
        return f"RMatrix({self.rows}x{self.cols}: {body})"

    def replace_col(self, j: int, column: Sequence[RatLike]) -> "RMatrix":
        if len(column) != self.rows:
            raise ValueError("column length mismatch")
        out = [list(row) for row in self.data]
        for i, v in enumerate(column):
            out[i][j] = rat(v)
        return RMatrix(out)

    def matmul(self, other: "RMatrix") -> "RMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        return RMatrix(
            [
                [
                    sum((self.data[i][k] * other.data[k][j] for k in range(self.cols)), ZERO)
                    for j in range(other.cols)
                ]
                for i in range(self.rows)
            ]
        )


def det(m: RMatrix) -> Rat:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Rows are first scaled to integers (scale factors divided back out), then
    Bareiss keeps all intermediates integral, bounding coefficient blowup.
    """
    if m.rows != m.cols:
        raise NonSquareError(f"determinant of {m.rows}x{m.cols} matrix")
    n = m.rows
    if n == 0:
        return ONE
    scale = ONE
    a: list[list[int]] = []
    for row in m.data:
        mult = 1
        for x in row:
            d = int(x.denominator)
            if d != 1:
                mult = mult * d // _gcd(mult, d)
        scale *= rat(mult)
        a.append([int(x.numerator) * (mult // int(x.denominator)) for x in row])

    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return ZERO
        pivot = a[k][k]
        for i in range(k + 1, n):
            ri, rk = a[i], a[k]
            f = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * pivot - f * rk[j]) // prev
            ri[k] = 0
        prev = pivot
    return rat(sign * a[n - 1][n - 1]) / scale


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def cramer_solve(a: RMatrix, b: Sequence[RatLike]) -> tuple:
    """Solve a x = b exactly via Cramer's rule; raises SingularError if det(a) = 0."""
    if a.rows != a.cols:
        raise NonSquareError("cramer_solve needs a square matrix")
    if len(b) != a.rows:
        raise ValueError("rhs length mismatch")
    d = det(a)
    if d == 0:
        raise SingularError("coefficient matrix is singular")
    b = [rat(x) for x in b]
    return tuple(det(a.replace_col(j, b)) / d for j in range(a.cols))


def invert(m: RMatrix) -> RMatrix:
    """Exact inverse by Gauss-Jordan; raises SingularError when not invertible."""
    if m.rows != m.cols:
        raise NonSquareError("inverse of non-square matrix")
    n = m.rows
    a = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(m.data)]
    for k in range(n):
        piv = None
        for i in range(k, n):
            if a[i][k] != 0:
                piv = i
                break
        if piv is None:
            raise SingularError("matrix is singular")
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
        inv = ONE / a[k][k]
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                row_k = a[k]
                a[i] = [x - f * y for x, y in zip(a[i], row_k)]
    return RMatrix([row[n:] for row in a])
