""".LP model and exact primal simplex solver.

Maximization LPs over rationals with rows of sense <=, =, >=, implicit x >= 0
and optional per-variable upper bounds.  The solver is a two-phase primal
simplex with Bland's rule (lowest-index entering variable, lowest-index
leaving variable on ratio ties), so identical inputs give identical outcomes.

Internally the solver runs a bounded-variable simplex: per-variable bounds,
and any single-variable <= or >= row, are handled as bound data rather than
tableau rows.  This is purely an implementation detail -- rows are stored on
the LinearProgram exactly as given, and the reported optimum satisfies every
row exactly.  Slack indices in the reported basis refer to the non-absorbed
inequality rows in order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .rat import ONE, ZERO, Rat, RMatrix, dot, invert, rat

LE = "LE"
EQ = "EQ"
GE = "GE"

Row = tuple  # (coeffs: tuple[Rat, ...], sense: str, rhs: Rat)


class DimensionMismatchError(ValueError):
    """Constraint coefficient length does not match the variable count."""


class NotEqualityFormError(ValueError):
    """Operation requires an LP whose rows are all equalities."""


def make_row(coeffs: Sequence, sense: str, rhs) -> Row:
    if sense not in (LE, EQ, GE):
        raise ValueError(f"bad row sense {sense!r}")
    return (tuple(rat(c) for c in coeffs), sense, rat(rhs))


@dataclass(frozen=True)
class LinearProgram:
    """max objective . x  s.t. rows, x >= 0, x <= upper (where given)."""

    objective: tuple
    rows: tuple
    upper: tuple  # per-variable Opt[Rat]

    @property
    def n(self) -> int:
        return len(self.objective)

    def add_constraints(self, extra: Sequence) -> "LinearProgram":
        """New LP with rows appended; the original is unchanged."""
        new_rows = []
        for coeffs, sense, rhs in extra:
            if len(coeffs) != self.n:
                raise DimensionMismatchError(
                    f"row has {len(coeffs)} coefficients, LP has {self.n} variables"
                )
            new_rows.append(make_row(coeffs, sense, rhs))
        return LinearProgram(self.objective, self.rows + tuple(new_rows), self.upper)


def linear_program(objective, rows, upper=None) -> LinearProgram:
    obj = tuple(rat(c) for c in objective)
    n = len(obj)
    built = []
    for coeffs, sense, rhs in rows:
        if len(coeffs) != n:
            raise DimensionMismatchError(
                f"row has {len(coeffs)} coefficients, LP has {n} variables"
            )
        built.append(make_row(coeffs, sense, rhs))
    if upper is None:
        ub = (None,) * n
    else:
        if len(upper) != n:
            raise DimensionMismatchError("upper-bound list length mismatch")
        ub = tuple(None if u is None else rat(u) for u in upper)
    return LinearProgram(obj, tuple(built), ub)


@dataclass(frozen=True)
class Optimal:
    vertex: tuple
    value: Rat
    basis: tuple


@dataclass(frozen=True)
class Infeasible:
    pass


@dataclass(frozen=True)
class Unbounded:
    pass


LpOutcome = object

_LO = 0
_HI = 1


class _Tableau:
    """Bounded-variable simplex state; variables 0..n-1 structural, then slacks."""

    def __init__(self, lp: LinearProgram):
        n = lp.n
        lo = [ZERO] * n
        hi: list = list(lp.upper)
        hard = []
        self.infeasible_bounds = False
        for coeffs, sense, rhs in lp.rows:
            nz = [j for j, c in enumerate(coeffs) if c != 0]
            if not nz:
                if (
                    (sense == LE and rhs < 0)
                    or (sense == GE and rhs > 0)
                    or (sense == EQ and rhs != 0)
                ):
                    self.infeasible_bounds = True
                continue
            if len(nz) == 1 and sense != EQ:
                j = nz[0]
                a = coeffs[j]
                v = rhs / a
                upperward = (sense == LE) == (a > 0)
                if upperward:
                    if hi[j] is None or v < hi[j]:
                        hi[j] = v
                else:
                    if v > lo[j]:
                        lo[j] = v
            else:
                hard.append((coeffs, sense, rhs))
        for j in range(n):
            if hi[j] is not None and lo[j] > hi[j]:
                self.infeasible_bounds = True
        if self.infeasible_bounds:
            return

        self.n_struct = n
        n_slack = sum(1 for _, sense, _ in hard if sense != EQ)
        self.n_real = n + n_slack
        self.lo = lo + [ZERO] * n_slack
        self.hi = hi + [None] * n_slack

        # Build rows scaled so the initial basic column (slack or artificial)
        # has coefficient +1 and a nonnegative starting value.
        self.rows: list = []
        self.xB: list = []
        self.basis: list = []
        self.stat: list = [_LO] * self.n_real  # per-var; meaningless while basic
        n_art = 0
        slack_at = n
        for coeffs, sense, rhs in hard:
            row = [ZERO] * self.n_real
            for j, c in enumerate(coeffs):
                row[j] = c
            resid = rhs - sum((coeffs[j] * lo[j] for j in range(n)), ZERO)
            if sense == LE:
                row[slack_at] = ONE
                fits = resid >= 0
                slack = slack_at
                slack_at += 1
            elif sense == GE:
                row[slack_at] = -ONE
                fits = resid <= 0
                slack = slack_at
                slack_at += 1
            else:
                fits = False
                slack = None
            if fits:
                if sense == GE:
                    row = [-c for c in row]
                    resid = -resid
                self.rows.append(row)
                self.basis.append(slack)
                self.xB.append(resid)
            else:
                if resid < 0:
                    row = [-c for c in row]
                    resid = -resid
                self.rows.append(row)
                self.basis.append(self.n_real + n_art)
                self.xB.append(resid)
                n_art += 1
        self.n_art = n_art
        if n_art:
            art_seen = 0
            for i, b in enumerate(self.basis):
                if b >= self.n_real:
                    col = self.n_real + art_seen
                    art_seen += 1
                    for r in range(len(self.rows)):
                        self.rows[r].append(ONE if r == i else ZERO)
                    self.basis[i] = col
            self.lo += [ZERO] * n_art
            self.hi += [None] * n_art  # frozen to 0 when an artificial leaves
            self.stat += [_LO] * n_art

    def _reduced_costs(self, cost: list) -> list:
        width = len(self.lo)
        d = list(cost) + [ZERO] * (width - len(cost))
        for i, b in enumerate(self.basis):
            cb = cost[b] if b < len(cost) else ZERO
            if cb != 0:
                row = self.rows[i]
                for j in range(width):
                    if row[j] != 0:
                        d[j] -= cb * row[j]
        return d

    def _bound_val(self, j: int) -> Rat:
        return self.lo[j] if self.stat[j] == _LO else self.hi[j]

    def optimize(self, d: list, in_basis: list) -> str:
        """Pivot to optimality of the current reduced-cost row d. Returns
        "optimal" or "unbounded"."""
        rows = self.rows
        xB = self.xB
        basis = self.basis
        lo = self.lo
        hi = self.hi
        stat = self.stat
        width = len(lo)
        while True:
            enter = -1
            for j in range(width):
                if in_basis[j]:
                    continue
                ljd, hjd = lo[j], hi[j]
                if hjd is not None and ljd == hjd:
                    continue
                dj = d[j]
                if stat[j] == _LO:
                    if dj > 0:
                        enter = j
                        break
                elif dj < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            dirn = 1 if stat[enter] == _LO else -1
            t_best = None
            leave_var = -1
            leave_row = -1
            leave_tgt = _LO
            if hi[enter] is not None:
                t_best = hi[enter] - lo[enter]
                leave_var = enter
            for i in range(len(rows)):
                coef = rows[i][enter]
                if coef == 0:
                    continue
                g = coef if dirn == 1 else -coef
                b = basis[i]
                if g > 0:
                    lim = (xB[i] - lo[b]) / g
                    tgt = _LO
                else:
                    hb = hi[b]
                    if hb is None:
                        continue
                    lim = (hb - xB[i]) / (-g)
                    tgt = _HI
                if (
                    t_best is None
                    or lim < t_best
                    or (lim == t_best and (leave_var < 0 or b < leave_var))
                ):
                    t_best = lim
                    leave_var = b
                    leave_row = i
                    leave_tgt = tgt
            if t_best is None:
                return "unbounded"
            delta = t_best if dirn == 1 else -t_best
            if leave_var == enter and leave_row < 0:
                # entering variable flips to its other bound
                if delta != 0:
                    for i in range(len(rows)):
                        c = rows[i][enter]
                        if c != 0:
                            xB[i] -= c * delta
                stat[enter] = _HI if stat[enter] == _LO else _LO
                continue
            r = leave_row
            v_enter = self._bound_val(enter) + delta
            if delta != 0:
                for i in range(len(rows)):
                    if i == r:
                        continue
                    c = rows[i][enter]
                    if c != 0:
                        xB[i] -= c * delta
            leaving = basis[r]
            stat[leaving] = leave_tgt
            in_basis[leaving] = False
            if leaving >= self.n_real:
                self.hi[leaving] = ZERO  # artificial never re-enters
            basis[r] = enter
            in_basis[enter] = True
            xB[r] = v_enter
            prow = rows[r]
            pinv = ONE / prow[enter]
            if pinv != 1:
                rows[r] = prow = [x * pinv for x in prow]
            for i in range(len(rows)):
                if i == r:
                    continue
                f = rows[i][enter]
                if f != 0:
                    ri = rows[i]
                    rows[i] = [a - f * b for a, b in zip(ri, prow)]
            f = d[enter]
            if f != 0:
                for j in range(width):
                    if prow[j] != 0:
                        d[j] -= f * prow[j]

    def drop_artificials(self) -> None:
        """Pivot out (or drop as redundant) any artificial still basic at 0,
        then truncate artificial columns."""
        r = 0
        while r < len(self.rows):
            if self.basis[r] >= self.n_real:
                row = self.rows[r]
                piv = -1
                for j in range(self.n_real):
                    if row[j] != 0 and not any(
                        self.basis[i] == j for i in range(len(self.rows))
                    ):
                        piv = j
                        break
                if piv < 0:
                    del self.rows[r]
                    del self.xB[r]
                    del self.basis[r]
                    continue
                prow = row
                pinv = ONE / prow[piv]
                if pinv != 1:
                    self.rows[r] = prow = [x * pinv for x in prow]
                for i in range(len(self.rows)):
                    if i == r:
                        continue
                    f = self.rows[i][piv]
                    if f != 0:
                        ri = self.rows[i]
                        self.rows[i] = [a - f * b for a, b in zip(ri, prow)]
                self.basis[r] = piv
                self.xB[r] = self._bound_val(piv)
            r += 1
        self.rows = [row[: self.n_real] for row in self.rows]
        self.lo = self.lo[: self.n_real]
        self.hi = self.hi[: self.n_real]
        self.stat = self.stat[: self.n_real]


def solve(lp: LinearProgram) -> LpOutcome:
    """Exact optimum of the LP; outcome is Optimal, Infeasible, or Unbounded."""
    t = _Tableau(lp)
    if t.infeasible_bounds:
        return Infeasible()
    width0 = len(t.lo)
    in_basis = [False] * width0
    for b in t.basis:
        in_basis[b] = True

    if t.n_art:
        cost1 = [ZERO] * t.n_real + [-ONE] * t.n_art
        d1 = t._reduced_costs(cost1)
        status = t.optimize(d1, in_basis)
        assert status == "optimal", "phase-1 objective is bounded"
        infeas = ZERO
        for i, b in enumerate(t.basis):
            if b >= t.n_real:
                infeas += t.xB[i]
        if infeas != 0:
            return Infeasible()
        t.drop_artificials()
        in_basis = [False] * t.n_real
        for b in t.basis:
            in_basis[b] = True

    cost2 = list(lp.objective) + [ZERO] * (t.n_real - t.n_struct)
    d2 = t._reduced_costs(cost2)
    status = t.optimize(d2, in_basis)
    if status == "unbounded":
        return Unbounded()

    values = [ZERO] * t.n_real
    for j in range(t.n_real):
        if not in_basis[j]:
            values[j] = t._bound_val(j)
    for i, b in enumerate(t.basis):
        values[b] = t.xB[i]
    vertex = tuple(values[: t.n_struct])
    value = dot(lp.objective, vertex)
    _check_feasible(lp, vertex)
    return Optimal(vertex=vertex, value=value, basis=tuple(t.basis))


def _check_feasible(lp: LinearProgram, x: tuple) -> None:
    for j, v in enumerate(x):
        u = lp.upper[j]
        if v < 0 or (u is not None and v > u):
            raise AssertionError(f"solver bug: bound violated at variable {j}")
    for coeffs, sense, rhs in lp.rows:
        lhs = dot(coeffs, x)
        ok = lhs <= rhs if sense == LE else lhs >= rhs if sense == GE else lhs == rhs
        if not ok:
            raise AssertionError("solver bug: row violated by reported optimum")


def basis_multipliers(lp: LinearProgram, outcome: Optimal) -> list:
    """Rows of the optimal basis inverse for basic variables with fractional
    value -- the u-vectors that parameterize tableau GMI/CG cuts.

    Requires every row of the LP to be an equality (slack-free system).
    """
    if any(sense != EQ for _, sense, _ in lp.rows):
        raise NotEqualityFormError("basis_multipliers needs an all-equality LP")
    m = len(lp.rows)
    basis = outcome.basis
    if len(basis) != m:
        raise ValueError("degenerate equality system: redundant rows were dropped")
    assert all(b < lp.n for b in basis)
    bmat = RMatrix([[lp.rows[i][0][basis[k]] for k in range(m)] for i in range(m)])
    binv = invert(bmat)
    us = []
    for k in range(m):
        if outcome.vertex[basis[k]].denominator != 1:
            us.append(tuple(binv.data[k]))
    return us


def explicit_rows(lp: LinearProgram) -> list:
    """All constraints as <= rows (alpha, b), bounds included.

    Canonical order: structural rows first (= rows split into <= and >=
    halves, adjacent), then the lower-bound rows -x_i <= 0 for i ascending,
    then finite upper-bound rows x_i <= u_i for i ascending.  Sensitivity
    analysis indexes edges into this list.
    """
    n = lp.n
    out = []
    for coeffs, sense, rhs in lp.rows:
        if sense in (LE, EQ):
            out.append((tuple(coeffs), rhs))
        if sense in (GE, EQ):
            out.append((tuple(-c for c in coeffs), -rhs))
    for i in range(n):
        out.append((tuple(-ONE if j == i else ZERO for j in range(n)), ZERO))
    for i in range(n):
        u = lp.upper[i]
        if u is not None:
            out.append((tuple(ONE if j == i else ZERO for j in range(n)), u))
    return out
