"""Empirical programs: the mu-weighted 5-cut selection sweep, line scans that
certify piecewise-constant trees in cut-parameter space, GMI-box grid scans,
and the empirical generalization-gap estimator.

All randomness is derived per task from the caller's seed (hash-chained), so
results are independent of execution order and identical configs give
byte-identical CSV output.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

from .bc import BCConfig, fingerprint, run
from .cuts import (
    CutPlane,
    DegenerateCutError,
    cg_cut,
    gmi_cut,
    score_cuts,
    select_indices,
    to_equality_form,
)
from .ip import IPInstance, enumerate_integer_points, relaxation, sample, with_bound_rows
from .lp import Optimal, basis_multipliers, solve
from .rat import Rat, ZERO, dot, fmt, rat
from .rng import derive

DEFAULT_BREAKPOINT_CEILING = 64

INVALID_CUT_CLASS = "INVALID"
DEGENERATE_CUT_CLASS = "DEGENERATE"


def _hash(fp: str) -> str:
    return hashlib.sha256(fp.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# mu sweep


@dataclass(frozen=True)
class SweepConfig:
    distribution: object
    samples: int
    seed: int
    mu_step: Rat = rat(1, 100)
    cuts_per_instance: int = 5
    bc: BCConfig = field(default_factory=BCConfig)

    def __post_init__(self):
        if not (0 < self.mu_step <= 1):
            raise ValueError("mu_step must lie in (0, 1]")
        if self.samples < 1:
            raise ValueError("need at least one sample")


@dataclass(frozen=True)
class SweepResult:
    mus: tuple
    mean_sizes: tuple
    sds: tuple
    n_samples: int
    per_instance_sizes: tuple  # [instance][mu index] -> tree size
    per_instance_selections: tuple  # [instance][mu index] -> pool index tuple

    def to_csv(self) -> str:
        lines = ["mu,mean_tree_size,sd,n_samples"]
        for mu, mean, sd in zip(self.mus, self.mean_sizes, self.sds):
            lines.append(f"{fmt(mu)},{mean!r},{sd!r},{self.n_samples}")
        return "\n".join(lines) + "\n"


def root_cut_pool(inst: IPInstance):
    """Candidate pool for root cuts: the GMI and CG cuts of every optimal
    tableau multiplier with a fractional basic value, plus the root vertex
    and objective used for scoring."""
    eq = to_equality_form(with_bound_rows(inst))
    lp_eq = relaxation(eq.instance)
    out = solve(lp_eq)
    if not isinstance(out, Optimal):
        return [], None, None
    us = basis_multipliers(lp_eq, out)
    pool = []
    for u in us:
        try:
            pool.append(gmi_cut(eq, u))
        except DegenerateCutError:
            pass
    for u in us:
        pool.append(cg_cut(eq, u))
    x_root = out.vertex[: inst.n]
    return pool, lp_eq.objective[: inst.n], x_root


def _mu_grid(step: Rat) -> list:
    grid = []
    k = 0
    while k * step <= 1:
        grid.append(k * step)
        k += 1
    return grid


def mu_sweep(cfg: SweepConfig) -> SweepResult:
    """Per instance, score the root cut pool once, then for each mu on the
    grid select cuts_per_instance cuts by weighted score and record the B&C
    tree size.  Tree runs are cached per distinct selection, so a
    step-function trace costs one run per step."""
    mus = _mu_grid(cfg.mu_step)
    all_sizes = []
    all_selections = []
    for idx in range(cfg.samples):
        inst = sample(cfg.distribution, derive(cfg.seed, 7, idx))
        pool, c_max, x_root = root_cut_pool(inst)
        if pool:
            scored = score_cuts(pool, c_max, x_root)
        sizes = []
        selections = []
        cache = {}
        for mu in mus:
            sel = tuple(select_indices(scored, float(mu), cfg.cuts_per_instance)) if pool else ()
            if sel not in cache:
                cuts = [pool[i] for i in sel]
                cache[sel] = run(inst, cuts, cfg.bc).size
            sizes.append(cache[sel])
            selections.append(sel)
        all_sizes.append(tuple(sizes))
        all_selections.append(tuple(selections))
    means = []
    sds = []
    for j in range(len(mus)):
        column = [szs[j] for szs in all_sizes]
        mean = sum(column) / len(column)
        var = sum((s - mean) ** 2 for s in column) / len(column)
        means.append(mean)
        sds.append(math.sqrt(var))
    return SweepResult(
        mus=tuple(mus),
        mean_sizes=tuple(means),
        sds=tuple(sds),
        n_samples=cfg.samples,
        per_instance_sizes=tuple(all_sizes),
        per_instance_selections=tuple(all_selections),
    )


# ---------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class ScanReport:
    description: str
    grid: tuple  # coarse parameter values
    grid_classes: tuple  # fingerprint id per grid point
    breakpoints: tuple  # refined parameter values between distinct intervals
    brackets: tuple  # final bisection bracket (left, right) per breakpoint
    interval_fingerprints: tuple  # fingerprint id per interval (breakpoints+1)
    fingerprint_table: tuple  # (id, sha256-16, full fingerprint)
    resolution: int

    def certain_spans(self):
        """(lo, hi, fingerprint id) sub-intervals lying strictly outside every
        bisection bracket, where the interval's class is the certified one."""
        spans = []
        start = self.grid[0]
        for k, (left, right) in enumerate(self.brackets):
            spans.append((start, left, self.interval_fingerprints[k]))
            start = right
        spans.append((start, self.grid[-1], self.interval_fingerprints[-1]))
        return spans

    def to_csv(self) -> str:
        lines = ["t,fingerprint_id"]
        for t, cls in zip(self.grid, self.grid_classes):
            lines.append(f"{fmt(t)},{cls}")
        return "\n".join(lines) + "\n"

    def sidecar_csv(self) -> str:
        lines = ["fingerprint_id,fingerprint_hash"]
        for fid, digest, _ in self.fingerprint_table:
            lines.append(f"{fid},{digest}")
        return "\n".join(lines) + "\n"


class _FingerprintInterner:
    def __init__(self):
        self.ids = {}
        self.table = []

    def intern(self, fp: str) -> int:
        if fp not in self.ids:
            fid = len(self.table)
            self.ids[fp] = fid
            self.table.append((fid, _hash(fp), fp))
        return self.ids[fp]


def _scan_line(evaluate, grid: Sequence, lo, hi, description: str, resolution: int) -> ScanReport:
    """Shared scan protocol: fingerprint the grid, then rationally bisect each
    adjacent differing pair down to width (hi - lo) / 2^20."""
    interner = _FingerprintInterner()
    cache = {}

    def klass(t) -> int:
        if t not in cache:
            cache[t] = interner.intern(evaluate(t))
        return cache[t]

    classes = [klass(t) for t in grid]
    tol = (hi - lo) / (1 << 20)
    breakpoints = []
    brackets = []
    intervals = [classes[0]]
    for i in range(len(grid) - 1):
        if classes[i] == classes[i + 1]:
            continue
        left, right = grid[i], grid[i + 1]
        left_class = classes[i]
        while right - left > tol:
            mid = (left + right) / 2
            if klass(mid) == left_class:
                left = mid
            else:
                right = mid
        breakpoints.append((left + right) / 2)
        brackets.append((left, right))
        intervals.append(classes[i + 1])
    return ScanReport(
        description=description,
        grid=tuple(grid),
        grid_classes=tuple(classes),
        breakpoints=tuple(breakpoints),
        brackets=tuple(brackets),
        interval_fingerprints=tuple(intervals),
        fingerprint_table=tuple(interner.table),
        resolution=resolution,
    )


def line_fingerprint_fn(ip: IPInstance, alpha: Sequence, config: BCConfig = BCConfig()):
    """Point evaluator for a beta line: t -> tree fingerprint, or the INVALID
    class where the cut alpha . x <= t is not valid for the instance."""
    alpha_q = tuple(rat(a) for a in alpha)
    points = enumerate_integer_points(ip)
    beta_min = None
    if points:
        beta_min = max(dot(alpha_q, tuple(rat(v) for v in x)) for x in points)

    def evaluate(t) -> str:
        if beta_min is not None and t < beta_min:
            return INVALID_CUT_CLASS
        return fingerprint(run(ip, [CutPlane(alpha_q, rat(t))], config))

    return evaluate


def line_scan(
    ip: IPInstance,
    alpha: Sequence,
    beta_range: tuple,
    resolution: int,
    config: BCConfig = BCConfig(),
) -> ScanReport:
    """Fingerprint B&C along the cut line alpha . x <= t for t in [lo, hi].
    Values of t that make the cut invalid report the distinguished INVALID
    class instead of a tree."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = rat(beta_range[0]), rat(beta_range[1])
    if hi <= lo:
        raise ValueError("empty beta range")
    alpha_q = tuple(rat(a) for a in alpha)
    evaluate = line_fingerprint_fn(ip, alpha_q, config)
    step = (hi - lo) / (resolution - 1)
    grid = [lo + step * k for k in range(resolution)]
    desc = "beta-line alpha=" + ",".join(fmt(a) for a in alpha_q)
    return _scan_line(evaluate, grid, lo, hi, desc, resolution)


def gmi_grid_scan(
    ip: IPInstance,
    U,
    resolution: int,
    config: BCConfig = BCConfig(),
    budget: int = 10**4,
) -> list:
    """Scan GMI multiplier space along the axis-parallel lines through the
    origin of [-U, U]^m, fingerprinting the tree per point; degenerate
    multipliers (f_0 = 0) form their own class.  One report per axis."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    uq = rat(U)
    eq = to_equality_form(ip)
    m = eq.instance.m
    if m * resolution > budget:
        raise ValueError(f"grid budget exceeded: {m} axes x {resolution} points")
    reports = []
    for axis in range(m):
        def evaluate(t, axis=axis):
            u = [ZERO] * m
            u[axis] = t
            try:
                cut = gmi_cut(eq, u)
            except DegenerateCutError:
                return DEGENERATE_CUT_CLASS
            return fingerprint(run(ip, [cut], config))

        step = (2 * uq) / (resolution - 1)
        grid = [-uq + step * k for k in range(resolution)]
        reports.append(
            _scan_line(evaluate, grid, -uq, uq, f"gmi-axis u{axis+1}", resolution)
        )
    return reports


def breakpoint_matches_surface(surfaces, alpha: Sequence, t: Rat, tol: Rat) -> bool:
    """True when some arrangement surface, restricted to the beta line at the
    given alpha, has a zero within tol of t.  Exact: a degree <= 2 univariate
    polynomial has a zero in [t - tol, t + tol] iff its values at the
    endpoints (and interior vertex, if any) straddle zero.  Surfaces that
    vanish identically on the line are ignored."""
    alpha_q = [rat(a) for a in alpha]
    lo, hi = t - tol, t + tol
    for surface in surfaces:
        poly = surface
        for i, a in enumerate(alpha_q):
            poly = poly.substitute(i, a)
        n = len(alpha_q)
        c0 = c1 = c2 = ZERO
        degenerate = False
        for e, c in poly.coeffs.items():
            p = e[n]
            if p == 0:
                c0 = c
            elif p == 1:
                c1 = c
            elif p == 2:
                c2 = c
            else:
                degenerate = True
        if degenerate:
            continue
        if c0 == 0 and c1 == 0 and c2 == 0:
            continue  # vanishes on the whole line

        def val(x):
            return c0 + c1 * x + c2 * x * x

        samples = [val(lo), val(hi)]
        if c2 != 0:
            vx = -c1 / (2 * c2)
            if lo <= vx <= hi:
                samples.append(val(vx))
        if min(samples) <= 0 <= max(samples):
            return True
    return False


# ---------------------------------------------------------------------------
# generalization gap


@dataclass(frozen=True)
class GapReport:
    rows: tuple  # (N, mean gap, 0.9-quantile gap)

    def to_csv(self) -> str:
        lines = ["n,mean_gap,q90_gap"]
        for n, mean, q90 in self.rows:
            lines.append(f"{n},{mean!r},{q90!r}")
        return "\n".join(lines) + "\n"


def draw_instances(dist, seed: int, count: int) -> list:
    return [sample(dist, derive(seed, i)) for i in range(count)]


def tree_size_with_gmi(inst: IPInstance, u: Sequence, bc: BCConfig) -> int:
    """Tree size after one GMI root cut; a degenerate multiplier adds no cut."""
    eq = to_equality_form(inst)
    try:
        cuts = [gmi_cut(eq, u)]
    except DegenerateCutError:
        cuts = []
    return run(inst, cuts, bc).size


def generalization_gap(
    distribution,
    u_grid: Sequence,
    n_schedule: Sequence[int],
    repetitions: int,
    seed: int,
    bc: BCConfig = BCConfig(),
    holdout_factor: int = 10,
    quantile: float = 0.9,
) -> GapReport:
    """Empirical max-over-u gap between training-average tree size and a
    holdout reference mean, per training-set size N."""
    if not u_grid or not n_schedule or repetitions < 1:
        raise ValueError("need a u grid, an N schedule, and at least one repetition")
    holdout = draw_instances(distribution, derive(seed, 0), holdout_factor * max(n_schedule))
    ref = []
    for u in u_grid:
        sizes = [tree_size_with_gmi(inst, u, bc) for inst in holdout]
        ref.append(sum(sizes) / len(sizes))
    rows = []
    for n in n_schedule:
        gaps = []
        for r in range(repetitions):
            train = draw_instances(distribution, derive(seed, 1, n, r), n)
            worst = 0.0
            for uix, u in enumerate(u_grid):
                sizes = [tree_size_with_gmi(inst, u, bc) for inst in train]
                worst = max(worst, abs(sum(sizes) / len(sizes) - ref[uix]))
            gaps.append(worst)
        gaps.sort()
        mean = sum(gaps) / len(gaps)
        q_index = min(len(gaps) - 1, max(0, math.ceil(quantile * len(gaps)) - 1))
        rows.append((n, mean, gaps[q_index]))
    return GapReport(tuple(rows))
