"""Branch-and-cut engine: root cuts, product-scoring variable selection,
best-bound node selection, three-way fathoming, a node-count cap, and a
canonical tree fingerprint for invariance testing.

The search runs in a maximization frame (minimize instances are negated
internally); incumbent-trace values are in that frame.  Every node's LP is
solved exactly once: children inherit the outcomes computed while product
scoring their parent, and the best-bound queue orders open nodes by their own
exact LP value (ties by creation order).  Everything is deterministic given
(instance, cuts, config).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional as Opt
from typing import Sequence

from .cuts import CutPlane
from .ip import IPInstance, relaxation
from .lp import GE, LE, Infeasible, LinearProgram, Optimal, Unbounded, solve
from .rat import ONE, ZERO, Rat, dot, fmt, is_integral, qceil, qfloor, rat

BRANCHED = "Branched"
FATHOMED_INFEASIBLE = "FathomedInfeasible"
FATHOMED_INTEGRAL = "FathomedIntegral"
FATHOMED_BY_BOUND = "FathomedByBound"
OPEN_CAPPED = "OpenCapped"


class IntegralCoordinateError(ValueError):
    """Product score requested for a variable with integral LP value."""


class InfiniteScore:
    """Marker ranked above every finite product score (infeasible child)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "InfiniteScore"


INFINITE_SCORE = InfiniteScore()


BEST_BOUND = "best-bound"


@dataclass(frozen=True)
class BCConfig:
    kappa: int = 100_000
    gamma: Rat = rat(1, 10**6)
    node_selection: str = BEST_BOUND
    suppress_bounding: bool = False  # fathom only on infeasible/integral

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.node_selection != BEST_BOUND:
            raise ValueError("only best-bound node selection is implemented")


def reduce_branchset(sigma: Sequence) -> tuple:
    """Keep only the tightest <= (minimum level) and tightest >= (maximum
    level) per variable, in canonical (variable, sense) order."""
    tight = {}
    for var, sense, level in sigma:
        key = (var, sense)
        if key not in tight:
            tight[key] = level
        elif sense == LE:
            tight[key] = min(tight[key], level)
        else:
            tight[key] = max(tight[key], level)
    order = sorted(tight, key=lambda k: (k[0], 0 if k[1] == LE else 1))
    return tuple((var, sense, tight[(var, sense)]) for var, sense in order)


def _sigma_rows(n: int, sigma) -> list:
    rows = []
    for var, sense, level in sigma:
        coeffs = tuple(ONE if j == var else ZERO for j in range(n))
        rows.append((coeffs, sense, rat(level)))
    return rows


@dataclass(frozen=True)
class BCNode:
    index: int
    parent: Opt[int]
    sigma: tuple
    depth: int
    lp: object
    status: str
    branch_var: Opt[int] = None


@dataclass(frozen=True)
class BCTree:
    nodes: tuple
    incumbent_trace: tuple  # (node exploration index, max-frame value)
    optimal: Opt[tuple]  # integer vector, None when capped or infeasible
    capped: bool
    instance: IPInstance

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def objective_value(self) -> Opt[Rat]:
        """Optimal objective in the instance's own sense."""
        if self.optimal is None:
            return None
        return dot(self.instance.objective, tuple(rat(v) for v in self.optimal))


def _score_pair(z: Rat, out_lo, out_hi, gamma: Rat):
    """(rank key, public score) for the two child outcomes of one variable."""
    if isinstance(out_lo, Infeasible) or isinstance(out_hi, Infeasible):
        return (1, ZERO), INFINITE_SCORE
    s = max(z - out_lo.value, gamma) * max(z - out_hi.value, gamma)
    return (0, s), s


def _solve_children(base: LinearProgram, sigma, vertex, i: int):
    v = vertex[i]
    lo_sigma = reduce_branchset(sigma + ((i, LE, qfloor(v)),))
    hi_sigma = reduce_branchset(sigma + ((i, GE, qceil(v)),))
    out_lo = solve(base.add_constraints(_sigma_rows(base.n, lo_sigma)))
    out_hi = solve(base.add_constraints(_sigma_rows(base.n, hi_sigma)))
    return lo_sigma, out_lo, hi_sigma, out_hi


def product_score(base_lp: LinearProgram, sigma, lp: Optimal, i: int, gamma: Rat = rat(1, 10**6)):
    """Product scoring rule for branching candidate i at a node:
    max(z - z(x_i <= floor v_i), gamma) * max(z - z(x_i >= ceil v_i), gamma),
    exact; an infeasible child yields the infinite marker."""
    if is_integral(lp.vertex[i]):
        raise IntegralCoordinateError(f"variable {i} is integral at this vertex")
    _, out_lo, _, out_hi = _solve_children(base_lp, tuple(sigma), lp.vertex, i)
    _, public = _score_pair(lp.value, out_lo, out_hi, gamma)
    return public


def run(ip: IPInstance, root_cuts: Sequence[CutPlane] = (), config: BCConfig = BCConfig()) -> BCTree:
    """Run branch-and-cut with the given root cuts; see module docstring for
    the determinism contract.  Cut validity is the caller's responsibility."""
    base = relaxation(ip).add_constraints(
        [(cut.alpha, LE, cut.beta) for cut in root_cuts]
    )
    root_out = solve(base)
    if isinstance(root_out, Unbounded):
        raise ValueError("relaxation is unbounded; IP instances must be polytopes")

    created = []  # (sigma, depth, outcome, parent exploration index)
    heap = []

    def push(sigma, depth, outcome, parent):
        cid = len(created)
        created.append((sigma, depth, outcome, parent))
        if isinstance(outcome, Infeasible):
            key = (1, ZERO)
        else:
            key = (0, -outcome.value)
        heapq.heappush(heap, (key, cid))

    push((), 0, root_out, None)

    explored = []
    trace = []
    incumbent_val = None
    incumbent_x = None
    capped = False

    while heap:
        _, cid = heapq.heappop(heap)
        sigma, depth, outcome, parent = created[cid]
        idx = len(explored)
        if isinstance(outcome, Infeasible):
            explored.append(BCNode(idx, parent, sigma, depth, outcome, FATHOMED_INFEASIBLE))
            continue
        vertex = outcome.vertex
        if all(is_integral(v) for v in vertex):
            if incumbent_val is None or outcome.value > incumbent_val:
                incumbent_val = outcome.value
                incumbent_x = tuple(int(v) for v in vertex)
                trace.append((idx, outcome.value))
            explored.append(BCNode(idx, parent, sigma, depth, outcome, FATHOMED_INTEGRAL))
            continue
        if (
            not config.suppress_bounding
            and incumbent_val is not None
            and outcome.value <= incumbent_val
        ):
            explored.append(BCNode(idx, parent, sigma, depth, outcome, FATHOMED_BY_BOUND))
            continue

        best = None  # (rank key, var, children payload)
        for i, v in enumerate(vertex):
            if is_integral(v):
                continue
            lo_sigma, out_lo, hi_sigma, out_hi = _solve_children(base, sigma, vertex, i)
            key, _ = _score_pair(outcome.value, out_lo, out_hi, config.gamma)
            if best is None or key > best[0]:
                best = (key, i, (lo_sigma, out_lo, hi_sigma, out_hi))
        assert best is not None, "fractional vertex must have a fractional coordinate"

        if len(created) + 2 > config.kappa:
            explored.append(BCNode(idx, parent, sigma, depth, outcome, OPEN_CAPPED))
            capped = True
            break
        _, var, (lo_sigma, out_lo, hi_sigma, out_hi) = best
        explored.append(BCNode(idx, parent, sigma, depth, outcome, BRANCHED, var))
        push(lo_sigma, depth + 1, out_lo, idx)
        push(hi_sigma, depth + 1, out_hi, idx)

    if capped:
        leftovers = sorted(cid for _, cid in heap)
        for cid in leftovers:
            sigma, depth, outcome, parent = created[cid]
            idx = len(explored)
            explored.append(BCNode(idx, parent, sigma, depth, outcome, OPEN_CAPPED))

    optimal = incumbent_x if not capped else None
    return BCTree(
        nodes=tuple(explored),
        incumbent_trace=tuple(trace),
        optimal=optimal,
        capped=capped,
        instance=ip,
    )


def _sigma_text(sigma) -> str:
    parts = [
        f"x{var}{'<=' if sense == LE else '>='}{level}" for var, sense, level in sigma
    ]
    return ",".join(parts) if parts else "root"


def fingerprint(tree: BCTree) -> str:
    """Canonical serialization of the tree's discrete decisions: per node in
    exploration order, the reduced branch set, the status tag, and the
    branched variable.  LP values are excluded (they vary within a region)."""
    lines = []
    for node in tree.nodes:
        var = "" if node.branch_var is None else f"|v{node.branch_var}"
        lines.append(f"{_sigma_text(node.sigma)}|{node.status}{var}")
    return "\n".join(lines)


def dump_tree(tree: BCTree) -> str:
    """Debug dump, one line per node."""
    lines = []
    for node in tree.nodes:
        parent = "-" if node.parent is None else str(node.parent)
        line = f"node {node.index} parent {parent} sigma {_sigma_text(node.sigma)} status {node.status}"
        if node.branch_var is not None:
            line += f" var {node.branch_var}"
        if isinstance(node.lp, Optimal):
            line += f" z {fmt(node.lp.value)}"
        lines.append(line)
    return "\n".join(lines)
