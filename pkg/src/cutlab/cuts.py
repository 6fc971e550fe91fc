"""Cut generation and selection: GMI (single and sequential), Chvatal-Gomory,
brute-force validity, and the parallelism/efficacy scoring used for weighted
root-cut selection.

Cuts are emitted in original variable space as alpha . x <= beta: inequalities
derived over an equality form (with slacks) get each slack substituted out via
its defining row before emission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .ip import IPInstance, enumerate_integer_points
from .lp import EQ, GE, LE
from .rat import ONE, ZERO, Rat, dot, fmt, qfloor, qfrac, rat


class DegenerateCutError(ValueError):
    """GMI with f_0 = 0: Definition-style formula yields a vacuous cut."""

    def __init__(self, message: str = "GMI cut is degenerate (f_0 = 0)", index: int | None = None):
        super().__init__(message)
        self.index = index


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CutPlane:
    """alpha . x <= beta in original variable space."""

    alpha: tuple
    beta: Rat

    def text(self) -> str:
        return "cut " + " ".join(fmt(a) for a in self.alpha) + " <= " + fmt(self.beta)


def parse_cut(text: str) -> CutPlane:
    toks = text.split()
    if len(toks) < 3 or toks[0] != "cut" or toks[-2] != "<=":
        raise ValueError(f"bad cut line: {text!r}")
    return CutPlane(tuple(rat(t) for t in toks[1:-2]), rat(toks[-1]))


@dataclass(frozen=True)
class EqualityForm:
    """An all-equality instance plus the slack bookkeeping for substitution.

    slack_rows[k] = (row_index, slack_var_index, sign) with sign +1 for a
    former LE row (slack = rhs - row.x) and -1 for a former GE row
    (slack = row.x - rhs).
    """

    instance: IPInstance
    slack_rows: tuple
    n_orig: int


def to_equality_form(ip: IPInstance) -> EqualityForm:
    """Add a nonnegative integer slack to every LE/GE row; EQ rows unchanged."""
    n = ip.n
    slack_count = sum(1 for _, sense, _ in ip.rows if sense != EQ)
    width = n + slack_count
    rows = []
    slack_rows = []
    next_slack = n
    for ridx, (coeffs, sense, rhs) in enumerate(ip.rows):
        row = list(coeffs) + [ZERO] * slack_count
        if sense == LE:
            row[next_slack] = ONE
            slack_rows.append((ridx, next_slack, 1))
            next_slack += 1
        elif sense == GE:
            row[next_slack] = -ONE
            slack_rows.append((ridx, next_slack, -1))
            next_slack += 1
        rows.append((tuple(row), EQ, rhs))
    inst = IPInstance(
        ip.objective + (ZERO,) * slack_count,
        tuple(rows),
        ip.upper + (None,) * slack_count,
        ip.maximize,
    )
    return EqualityForm(inst, tuple(slack_rows), n)


def _substitute_slacks(eq: EqualityForm, coeffs: Sequence, offset: Rat):
    """Rewrite sum coeffs[j] xt_j (+ offset on the rhs side) over extended
    variables into original space, eliminating each slack by its row."""
    n = eq.n_orig
    alpha = list(coeffs[:n])
    rhs_shift = ZERO
    for ridx, svar, sign in eq.slack_rows:
        g = coeffs[svar]
        if g == 0:
            continue
        row, _, rhs = eq.instance.rows[ridx]
        # slack = sign * (rhs - row.x) restricted to original coordinates
        for j in range(n):
            alpha[j] -= g * sign * row[j]
        rhs_shift += g * sign * rhs
    return alpha, offset - rhs_shift


def _aggregate(rows: Sequence, rhs: Sequence, u: Sequence):
    width = len(rows[0])
    v = [ZERO] * width
    for mult, row in zip(u, rows):
        if mult == 0:
            continue
        for j in range(width):
            if row[j] != 0:
                v[j] += mult * row[j]
    v0 = dot(u, rhs)
    return v, v0


def _gmi_from_system(eq: EqualityForm, rows, rhs, u, index=None) -> CutPlane:
    v, v0 = _aggregate(rows, rhs, u)
    f0 = qfrac(v0)
    if f0 == 0:
        raise DegenerateCutError(index=index)
    ratio = f0 / (ONE - f0)
    coeffs = []
    for vj in v:
        fj = qfrac(vj)
        coeffs.append(fj if fj <= f0 else ratio * (ONE - fj))
    # GMI inequality: coeffs . xt >= f0; substitute slacks, negate to <=.
    alpha, beta = _substitute_slacks(eq, coeffs, f0)
    return CutPlane(tuple(-a for a in alpha), -beta)


def gmi_cut(eq: EqualityForm, u: Sequence) -> CutPlane:
    """Gomory mixed integer cut of multiplier vector u over the equality form:
    f_i = frac((u^T A)_i), f_0 = frac(u^T b), cut
    sum_{f_i <= f_0} f_i x_i + (f_0/(1-f_0)) sum_{f_i > f_0} (1-f_i) x_i >= f_0,
    emitted in original variables as a <= plane."""
    m = eq.instance.m
    if len(u) != m:
        raise DimensionMismatchError(f"u has {len(u)} entries, system has {m} rows")
    rows = [r for r, _, _ in eq.instance.rows]
    rhs = [r for _, _, r in eq.instance.rows]
    return _gmi_from_system(eq, rows, rhs, [rat(x) for x in u])


def sequential_gmi(ip: IPInstance, us: Sequence[Sequence]) -> list:
    """K GMI cuts in sequence.  After cut k-1, the working system gains the
    aggregated row u_{k-1}^T A~ (and rhs u_{k-1}^T b~), so u_k has one more
    entry; cut k is the GMI cut of u_k against the augmented system."""
    if not us:
        raise DimensionMismatchError("need at least one multiplier vector")
    eq = to_equality_form(ip)
    m = eq.instance.m
    rows = [list(r) for r, _, _ in eq.instance.rows]
    rhs = [r for _, _, r in eq.instance.rows]
    for k, u in enumerate(us):
        if len(u) != m + k:
            raise DimensionMismatchError(
                f"multiplier {k} has {len(u)} entries, expected {m + k}"
            )
    cuts = []
    for k, u in enumerate(us):
        uq = [rat(x) for x in u]
        try:
            cuts.append(_gmi_from_system(eq, rows, rhs, uq, index=k))
        except DegenerateCutError as exc:
            raise DegenerateCutError(f"GMI cut {k} is degenerate (f_0 = 0)", index=k) from exc
        new_row, new_rhs = _aggregate(rows, rhs, uq)
        rows.append(new_row)
        rhs.append(new_rhs)
    return cuts


def cg_cut(eq: EqualityForm, u: Sequence) -> CutPlane:
    """Chvatal-Gomory cut floor(u^T A) x <= floor(u^T b) over the equality
    form (any sign of u is valid there), emitted in original variables."""
    m = eq.instance.m
    if len(u) != m:
        raise DimensionMismatchError(f"u has {len(u)} entries, system has {m} rows")
    rows = [r for r, _, _ in eq.instance.rows]
    rhs = [r for _, _, r in eq.instance.rows]
    v, v0 = _aggregate(rows, rhs, [rat(x) for x in u])
    coeffs = [rat(qfloor(vj)) for vj in v]
    alpha, beta = _substitute_slacks(eq, coeffs, rat(qfloor(v0)))
    return CutPlane(tuple(alpha), beta)


def is_valid_cut(ip: IPInstance, cut: CutPlane, cap: int = 10**7) -> bool:
    """True iff alpha . x <= beta for every integer-feasible point; exact."""
    for x in enumerate_integer_points(ip, cap):
        if dot(cut.alpha, tuple(rat(v) for v in x)) > cut.beta:
            return False
    return True


@dataclass(frozen=True)
class ScoredCut:
    cut: CutPlane
    parallelism: float
    efficacy: float


def score_cuts(pool: Sequence[CutPlane], c: Sequence, x_lp: Sequence) -> list:
    """parallelism = |c.alpha| / (||c|| ||alpha||), efficacy = (alpha.x_lp - beta)/||alpha||.

    Both are double-precision ranking scores computed from exact rationals;
    zero-norm vectors score 0 by convention.
    """
    c_norm = math.sqrt(sum(float(v) * float(v) for v in c))
    scored = []
    for cut in pool:
        a_norm = math.sqrt(sum(float(v) * float(v) for v in cut.alpha))
        if a_norm == 0.0 or c_norm == 0.0:
            par = 0.0
        else:
            par = abs(float(dot(c, cut.alpha))) / (c_norm * a_norm)
        if a_norm == 0.0:
            eff = 0.0
        else:
            eff = float(dot(cut.alpha, x_lp) - cut.beta) / a_norm
        scored.append(ScoredCut(cut, par, eff))
    return scored


def select_indices(scored: Sequence[ScoredCut], mu: float, k: int) -> list:
    weighted = [
        (-(mu * s.parallelism + (1.0 - mu) * s.efficacy), i) for i, s in enumerate(scored)
    ]
    weighted.sort()
    return [i for _, i in weighted[:k]]


def select_cuts(scored: Sequence[ScoredCut], mu: float, k: int) -> list:
    """Top-k by mu*parallelism + (1-mu)*efficacy, ties by pool index."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    return [scored[i].cut for i in select_indices(scored, mu, k)]
