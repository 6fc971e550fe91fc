"""LP sensitivity geometry, executable.

For an LP and a candidate extra constraint alpha . x <= beta, the optimum has
a piecewise closed form: unchanged while the constraint does not separate the
current optimum, and otherwise a ratio of determinants tied to some polytope
edge.  This module enumerates edges, builds the degree-1 halfspace boundaries
deciding which edges a constraint crosses, the degree-2 indifference surfaces
deciding which crossed edge wins, and verifies the closed forms sample by
sample against the simplex oracle -- exact equality, no tolerances.  It also
builds the floor arrangement in multiplier space on which GMI cut data is
piecewise constant.

Constraint indices (EdgeId/FaceId) refer to lp.explicit_rows order: structural
rows (equalities split), then lower-bound rows, then finite upper-bound rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional as Opt
from typing import Sequence

from .cuts import CutPlane, EqualityForm
from .lp import EQ, LE, Infeasible, LinearProgram, Optimal, Unbounded, explicit_rows, solve
from .rat import (
    ONE,
    ZERO,
    Rat,
    RMatrix,
    SingularError,
    cramer_solve,
    det,
    dot,
    fmt,
    qceil,
    qfloor,
    qfrac,
    rat,
)
from .rng import SplitMix64


class SingularAugmentedSystemError(ValueError):
    """The edge system stacked with the cut row(s) has zero determinant."""


class BudgetExceededError(ValueError):
    """Requested arrangement exceeds the enumeration budget."""


# ---------------------------------------------------------------------------
# Sparse multivariate polynomials with exact coefficients


class PolySurface:
    """Polynomial over named variables; zero set is the geometric surface."""

    __slots__ = ("nvars", "names", "coeffs")

    def __init__(self, nvars: int, coeffs: dict, names: Opt[tuple] = None):
        self.nvars = nvars
        self.names = names if names is not None else tuple(f"y{i}" for i in range(nvars))
        self.coeffs = {e: c for e, c in coeffs.items() if c != 0}

    @staticmethod
    def const(value, nvars: int, names=None) -> "PolySurface":
        v = rat(value)
        return PolySurface(nvars, {(0,) * nvars: v} if v != 0 else {}, names)

    @staticmethod
    def var(i: int, nvars: int, names=None) -> "PolySurface":
        e = tuple(1 if j == i else 0 for j in range(nvars))
        return PolySurface(nvars, {e: ONE}, names)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "PolySurface") -> "PolySurface":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, ZERO) + c
        return PolySurface(self.nvars, out, self.names)

    def __sub__(self, other: "PolySurface") -> "PolySurface":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, ZERO) - c
        return PolySurface(self.nvars, out, self.names)

    def __neg__(self) -> "PolySurface":
        return PolySurface(self.nvars, {e: -c for e, c in self.coeffs.items()}, self.names)

    def __mul__(self, other) -> "PolySurface":
        if not isinstance(other, PolySurface):
            v = rat(other)
            return PolySurface(
                self.nvars, {e: c * v for e, c in self.coeffs.items()}, self.names
            )
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                if e in out:
                    out[e] += prod
                else:
                    out[e] = prod
        return PolySurface(self.nvars, out, self.names)

    __rmul__ = __mul__

    def evaluate(self, point: Sequence) -> Rat:
        total = ZERO
        for e, c in self.coeffs.items():
            term = c
            for x, p in zip(point, e):
                for _ in range(p):
                    term *= x
            total += term
        return total

    def substitute(self, i: int, value) -> "PolySurface":
        """Fix variable i to a constant; same variable arity is kept."""
        v = rat(value)
        out = {}
        for e, c in self.coeffs.items():
            term = c
            for _ in range(e[i]):
                term *= v
            e2 = tuple(0 if j == i else p for j, p in enumerate(e))
            out[e2] = out.get(e2, ZERO) + term
        return PolySurface(self.nvars, out, self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolySurface) and self.coeffs == other.coeffs

    def _monomial_text(self, e: tuple) -> str:
        if not any(e):
            return "1"
        parts = []
        for name, p in zip(self.names, e):
            if p == 1:
                parts.append(name)
            elif p > 1:
                parts.append(f"{name}^{p}")
        return "*".join(parts)

    def dump_line(self) -> str:
        body = " ".join(
            f"{self._monomial_text(e)}={fmt(self.coeffs[e])}" for e in sorted(self.coeffs)
        )
        return f"surf deg={self.degree} {body}"

    def __repr__(self) -> str:
        return self.dump_line()


def proportional_scalar(p: PolySurface, q: PolySurface) -> Opt[Rat]:
    """lambda with p = lambda * q, or None; zero polys are proportional."""
    if q.is_zero():
        return ONE if p.is_zero() else None
    if p.is_zero():
        return ZERO
    mono = next(iter(q.coeffs))
    if mono not in p.coeffs:
        return None
    lam = p.coeffs[mono] / q.coeffs[mono]
    return lam if (q * lam) == p else None


def _sym_det(mat: list) -> PolySurface:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    first = mat[0][0]
    total = None
    for i in range(n):
        entry = mat[i][0]
        if entry.is_zero():
            continue
        minor = [row[1:] for k, row in enumerate(mat) if k != i]
        term = entry * _sym_det(minor)
        if i % 2 == 1:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return PolySurface(first.nvars, {}, first.names)
    return total


# ---------------------------------------------------------------------------
# Edges and closed forms


@dataclass(frozen=True)
class EdgeId:
    rows: tuple  # n-1 indices into explicit_rows(lp)


@dataclass(frozen=True)
class FaceId:
    rows: tuple  # n-k indices into explicit_rows(lp)


def _direction(rows_e: list, n: int) -> tuple:
    """Generalized cross product: nullspace direction of an (n-1) x n system;
    the zero vector iff the system has rank < n-1."""
    d = []
    for j in range(n):
        minor = RMatrix([[row[k] for k in range(n) if k != j] for row in rows_e])
        d.append(det(minor) if n > 1 else ONE)
        if j % 2 == 1:
            d[-1] = -d[-1]
    return tuple(d)


def lp_edges(lp: LinearProgram) -> list:
    """All index sets of n-1 constraints whose equality system has rank n-1
    and whose line meets the polytope in a one-dimensional face."""
    rows = explicit_rows(lp)
    n = lp.n
    if n < 2:
        raise ValueError("edge enumeration needs n >= 2")
    edges = []
    for combo in itertools.combinations(range(len(rows)), n - 1):
        coeff_rows = [list(rows[i][0]) for i in combo]
        d = _direction(coeff_rows, n)
        if all(v == 0 for v in d):
            continue
        j = next(k for k, v in enumerate(d) if v != 0)
        eq_rows = [(rows[i][0], EQ, rows[i][1]) for i in combo]
        constrained = lp.add_constraints(eq_rows)
        obj_hi = tuple(ONE if k == j else ZERO for k in range(n))
        hi = solve(LinearProgram(obj_hi, constrained.rows, constrained.upper))
        if isinstance(hi, Infeasible):
            continue
        if isinstance(hi, Unbounded):
            raise ValueError("lp must be bounded for edge enumeration")
        lo = solve(
            LinearProgram(tuple(-c for c in obj_hi), constrained.rows, constrained.upper)
        )
        assert isinstance(lo, Optimal)
        if hi.value > -lo.value:
            edges.append(EdgeId(combo))
    return edges


def closed_form(lp: LinearProgram, e: EdgeId, alpha: Sequence, beta) -> tuple:
    """Vertex created on edge e by the constraint alpha . x = beta:
    x_i = det(A_E with row alpha, column i replaced by (b_E, beta)) / det(A_E with row alpha)."""
    rows = explicit_rows(lp)
    mat = RMatrix([list(rows[i][0]) for i in e.rows] + [[rat(a) for a in alpha]])
    rhs = [rows[i][1] for i in e.rows] + [rat(beta)]
    try:
        return cramer_solve(mat, rhs)
    except SingularError:
        raise SingularAugmentedSystemError(
            "cut direction is parallel to the edge system"
        ) from None


class _EdgeSymbols:
    """Symbolic determinant data for one edge, in (a_1..a_n, b) variables."""

    def __init__(self, lp: LinearProgram, e: EdgeId):
        rows = explicit_rows(lp)
        n = lp.n
        nv = n + 1
        names = tuple(f"a{i+1}" for i in range(n)) + ("b",)
        const = lambda v: PolySurface.const(v, nv, names)
        avar = [PolySurface.var(i, nv, names) for i in range(n)]
        bvar = PolySurface.var(n, nv, names)
        base = [[const(rows[i][0][j]) for j in range(n)] for i in e.rows]
        rhs = [const(rows[i][1]) for i in e.rows] + [bvar]
        full = base + [avar]
        self.edge = e
        self.n = n
        self.det = _sym_det(full)
        self.numerators = []
        for j in range(n):
            mat = [
                [rhs[i] if k == j else full[i][k] for k in range(n)]
                for i in range(n)
            ]
            self.numerators.append(_sym_det(mat))
        self.outside = [i for i in range(len(rows)) if i not in e.rows]
        self.halfspaces = []
        for i in self.outside:
            h = const(rows[i][1]) * self.det
            for j in range(n):
                aij = rows[i][0][j]
                if aij != 0:
                    h = h - const(aij) * self.numerators[j]
            self.halfspaces.append(h)

    def hit(self, point: tuple) -> bool:
        d = self.det.evaluate(point)
        if d == 0:
            return False
        if d > 0:
            return all(h.evaluate(point) >= 0 for h in self.halfspaces)
        return all(h.evaluate(point) <= 0 for h in self.halfspaces)

    def vertex(self, point: tuple) -> tuple:
        d = self.det.evaluate(point)
        return tuple(num.evaluate(point) / d for num in self.numerators)


def edge_hit_halfspaces(lp: LinearProgram, e: EdgeId) -> list:
    """Degree-1 boundaries (one per constraint outside e) whose joint sign,
    corrected by sign(det), decides whether the new constraint crosses e
    inside the polytope."""
    return list(_EdgeSymbols(lp, e).halfspaces)


def edge_hits(lp: LinearProgram, e: EdgeId, alpha: Sequence, beta) -> bool:
    point = tuple(rat(a) for a in alpha) + (rat(beta),)
    return _EdgeSymbols(lp, e).hit(point)


def indifference_poly(lp: LinearProgram, e_p: EdgeId, e_q: EdgeId) -> PolySurface:
    """Degree <= 2 surface where the objective at e_p's cut-vertex equals the
    objective at e_q's: sum_i c_i N_i^p D^q - sum_i c_i N_i^q D^p."""
    if e_p == e_q:
        raise ValueError("indifference surface needs two distinct edges")
    sp = _EdgeSymbols(lp, e_p)
    sq = _EdgeSymbols(lp, e_q)
    nv = lp.n + 1
    names = sp.det.names
    total = PolySurface(nv, {}, names)
    for i in range(lp.n):
        ci = lp.objective[i]
        if ci == 0:
            continue
        total = total + (sp.numerators[i] * sq.det) * ci
        total = total - (sq.numerators[i] * sp.det) * ci
    return total


# ---------------------------------------------------------------------------
# Arrangement store and sampled verification


@dataclass(frozen=True)
class SurfaceStore:
    separation: PolySurface
    halfspace_boundaries: tuple  # (EdgeId, outside row index, PolySurface)
    indifference_surfaces: tuple  # (EdgeId, EdgeId, PolySurface)
    hyperplane_bound: int
    degree2_bound: int

    @property
    def hyperplane_count(self) -> int:
        return 1 + len(self.halfspace_boundaries)

    @property
    def degree2_count(self) -> int:
        return len(self.indifference_surfaces)

    def all_surfaces(self):
        yield self.separation
        for _, _, h in self.halfspace_boundaries:
            yield h
        for _, _, s in self.indifference_surfaces:
            yield s

    def dump(self) -> str:
        return "\n".join(s.dump_line() for s in self.all_surfaces())


def build_arrangement(lp: LinearProgram, max_n: int = 3, max_rows: int = 12) -> SurfaceStore:
    """Separation hyperplane, every edge-hit boundary, and every pairwise
    indifference surface for the LP; counts respect the m^n / m^{2n} bounds."""
    rows = explicit_rows(lp)
    n = lp.n
    m = len(rows)
    if n > max_n or m > max_rows:
        raise BudgetExceededError(f"arrangement budget is n <= {max_n}, rows <= {max_rows}")
    out = solve(lp)
    if not isinstance(out, Optimal):
        raise ValueError("arrangement needs a bounded feasible LP")
    nv = n + 1
    names = tuple(f"a{i+1}" for i in range(n)) + ("b",)
    sep = PolySurface(nv, {}, names)
    for i, xi in enumerate(out.vertex):
        if xi != 0:
            sep = sep + PolySurface.var(i, nv, names) * xi
    sep = sep - PolySurface.var(n, nv, names)
    edges = lp_edges(lp)
    symbols = {e: _EdgeSymbols(lp, e) for e in edges}
    halves = []
    for e in edges:
        sym = symbols[e]
        for i, h in zip(sym.outside, sym.halfspaces):
            halves.append((e, i, h))
    indiff = []
    for e_p, e_q in itertools.combinations(edges, 2):
        indiff.append((e_p, e_q, indifference_poly(lp, e_p, e_q)))
    store = SurfaceStore(
        separation=sep,
        halfspace_boundaries=tuple(halves),
        indifference_surfaces=tuple(indiff),
        hyperplane_bound=m**n,
        degree2_bound=m ** (2 * n),
    )
    if store.hyperplane_count > store.hyperplane_bound:
        raise AssertionError("hyperplane count exceeds the m^n bound")
    if store.degree2_count > store.degree2_bound:
        raise AssertionError("degree-2 surface count exceeds the m^{2n} bound")
    return store


UNCHANGED = "Unchanged"
ACTIVE_EDGE = "ActiveEdge"
CUT_INFEASIBLE = "CutInfeasible"


@dataclass(frozen=True)
class RegionWitness:
    alpha: tuple
    beta: Rat
    regime: str
    edge: Opt[EdgeId]
    verified: bool


def verify_closed_form(lp: LinearProgram, trials: int, seed: int) -> list:
    """Sample (alpha, beta) with components j/64, j in [-128, 128]; check the
    piecewise closed form against a fresh simplex solve.  Non-separating cuts
    must keep the optimum; separating cuts must match the closed form of some
    crossed edge, or make the LP infeasible while crossing no edge."""
    base = solve(lp)
    if not isinstance(base, Optimal):
        raise ValueError("verify_closed_form needs a bounded feasible LP")
    x_star = base.vertex
    n = lp.n
    symbols = [_EdgeSymbols(lp, e) for e in lp_edges(lp)]
    rng = SplitMix64(seed)
    witnesses = []
    for _ in range(trials):
        alpha = tuple(rat(rng.randint(-128, 128), 64) for _ in range(n))
        beta = rat(rng.randint(-128, 128), 64)
        point = alpha + (beta,)
        if dot(alpha, x_star) <= beta:
            out = solve(lp.add_constraints([(alpha, LE, beta)]))
            ok = isinstance(out, Optimal) and out.vertex == x_star
            witnesses.append(RegionWitness(alpha, beta, UNCHANGED, None, ok))
            continue
        out = solve(lp.add_constraints([(alpha, LE, beta)]))
        hits = [sym for sym in symbols if sym.hit(point)]
        if isinstance(out, Infeasible):
            witnesses.append(
                RegionWitness(alpha, beta, CUT_INFEASIBLE, None, not hits)
            )
            continue
        match = None
        for sym in hits:
            if sym.vertex(point) == out.vertex:
                match = sym.edge
                break
        witnesses.append(
            RegionWitness(alpha, beta, ACTIVE_EDGE, match, match is not None)
        )
    return witnesses


def multi_closed_form(lp: LinearProgram, f: FaceId, cuts: Sequence[CutPlane]) -> tuple:
    """Vertex formed on face f by stacking the cut rows: Cramer solve of
    A_F x = b_F with alpha_j . x = beta_j appended."""
    rows = explicit_rows(lp)
    n = lp.n
    if len(f.rows) + len(cuts) != n:
        raise ValueError("need |F| = n - #cuts")
    mat = RMatrix(
        [list(rows[i][0]) for i in f.rows] + [list(c.alpha) for c in cuts]
    )
    rhs = [rows[i][1] for i in f.rows] + [c.beta for c in cuts]
    try:
        return cramer_solve(mat, rhs)
    except SingularError:
        raise SingularAugmentedSystemError("augmented face system is singular") from None


# ---------------------------------------------------------------------------
# GMI floor arrangement in multiplier space


@dataclass(frozen=True)
class GmiArrangement:
    surfaces: tuple  # PolySurface, degree 1, in u-space
    raw_level_pairs: int  # undeduplicated (i, k_i, k_0) tuple count
    bound: int  # O(n U^2 ||A||_1 ||b||_1) comparison value

    def sign_vector(self, u: Sequence) -> tuple:
        point = tuple(rat(x) for x in u)
        out = []
        for s in self.surfaces:
            v = s.evaluate(point)
            out.append(0 if v == 0 else (1 if v > 0 else -1))
        return tuple(out)


def _int_range(lo: Rat, hi: Rat) -> range:
    return range(qceil(lo), qfloor(hi) + 1)


def gmi_arrangement(eq: EqualityForm, U, budget: int = 10**5) -> GmiArrangement:
    """Hyperplanes in [-U, U]^m on which floor(u . a_i), floor(u . b), or the
    comparison f_i <= f_0 can change: u.a_i = k_i and u.b = k_0 for integer
    levels within +-U times the column/rhs 1-norms, plus the indifference
    planes u.a_i - k_i = u.b - k_0 (deduplicated by k_i - k_0)."""
    inst = eq.instance
    m = inst.m
    uq = rat(U)
    names = tuple(f"u{i+1}" for i in range(m))
    cols = [[inst.rows[r][0][j] for r in range(m)] for j in range(inst.n)]
    bvec = [inst.rows[r][2] for r in range(m)]

    def lin(coeffs, k) -> PolySurface:
        poly = PolySurface.const(-k, m, names)
        for i, c in enumerate(coeffs):
            if c != 0:
                poly = poly + PolySurface.var(i, m, names) * c
        return poly

    surfaces = []
    a_ranges = []
    for col in cols:
        n1 = sum((abs(c) for c in col), ZERO)
        rng_i = _int_range(-uq * n1, uq * n1)
        a_ranges.append(rng_i)
        for k in rng_i:
            p = lin(col, k)
            if not p.is_zero():
                surfaces.append(p)
        if len(surfaces) > budget:
            raise BudgetExceededError("gmi arrangement budget exceeded")
    b_n1 = sum((abs(c) for c in bvec), ZERO)
    b_range = _int_range(-uq * b_n1, uq * b_n1)
    for k in b_range:
        p = lin(bvec, k)
        if not p.is_zero():
            surfaces.append(p)
    raw_pairs = 0
    for col, rng_i in zip(cols, a_ranges):
        raw_pairs += len(rng_i) * len(b_range)
        diff = [c - bc for c, bc in zip(col, bvec)]
        deltas = range(
            rng_i.start - (b_range.stop - 1), (rng_i.stop - 1) - b_range.start + 1
        )
        for delta in deltas:
            p = lin(diff, delta)
            if not p.is_zero():
                surfaces.append(p)
        if len(surfaces) > budget:
            raise BudgetExceededError("gmi arrangement budget exceeded")
    # Comparison value for the O(n U^2 ||A||_1 ||b||_1) bound: per column the
    # raw (k_i, k_0) pair count is at most (2U||A||_1 + 1)(2U||b||_1 + 1),
    # with ||A||_1 the maximum column 1-norm.
    a_norm = max((sum((abs(c) for c in col), ZERO) for col in cols), default=ZERO)
    bound = inst.n * qceil((2 * uq * a_norm + 1) * (2 * uq * b_n1 + 1))
    return GmiArrangement(tuple(surfaces), raw_pairs, bound)


def gmi_floor_tuple(eq: EqualityForm, u: Sequence) -> tuple:
    """(floor(u.a_i) for all i, floor(u.b), [f_i <= f_0] for all i) -- the
    data that is invariant within one cell of the floor arrangement."""
    inst = eq.instance
    uu = [rat(x) for x in u]
    floors = []
    fracs = []
    for j in range(inst.n):
        v = sum((uu[r] * inst.rows[r][0][j] for r in range(inst.m)), ZERO)
        floors.append(qfloor(v))
        fracs.append(qfrac(v))
    v0 = sum((uu[r] * inst.rows[r][2] for r in range(inst.m)), ZERO)
    f0 = qfrac(v0)
    flags = tuple(f <= f0 for f in fracs)
    return (tuple(floors), qfloor(v0), flags)
