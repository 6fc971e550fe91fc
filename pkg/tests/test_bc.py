import random

import pytest

from cutlab.bc import (
    BCConfig,
    BRANCHED,
    FATHOMED_BY_BOUND,
    FATHOMED_INFEASIBLE,
    FATHOMED_INTEGRAL,
    INFINITE_SCORE,
    OPEN_CAPPED,
    IntegralCoordinateError,
    dump_tree,
    fingerprint,
    product_score,
    reduce_branchset,
    run,
)
from cutlab.cuts import CutPlane
from cutlab.ip import best_integer_point, enumerate_integer_points, gen_jeroslow, gen_packing, ip_instance, relaxation
from cutlab.lp import EQ, GE, LE, Optimal, solve
from cutlab.rat import dot, rat


def test_integral_root_fathoms_immediately():
    ip = ip_instance([1, 1], [([1, 0], LE, 1), ([0, 1], LE, 1)], [2, 2])
    tree = run(ip)
    assert tree.size == 1
    assert tree.nodes[0].status == FATHOMED_INTEGRAL
    assert tree.optimal == (1, 1)


def test_jeroslow_without_cuts_grows():
    for n, bound in ((3, 2), (5, 4)):
        tree = run(gen_jeroslow(n, 0))
        assert tree.size >= bound
        assert tree.optimal is None  # infeasible IP
        assert not tree.capped


def test_jeroslow_with_cg_rescue_cut():
    n = 5
    cut = CutPlane((rat(1),) * n, rat(n // 2))
    tree = run(gen_jeroslow(n, 0), [cut])
    assert tree.size == 1
    assert tree.nodes[0].status == FATHOMED_INFEASIBLE


def test_product_score_gamma_clamp():
    # Zero objective: every child drop is 0 < gamma, so score = gamma^2.
    ip = gen_jeroslow(3, 0)
    lp = relaxation(ip)
    out = solve(lp)
    frac = next(i for i, v in enumerate(out.vertex) if v.denominator != 1)
    gamma = rat(1, 10**6)
    assert product_score(lp, (), out, frac, gamma) == gamma * gamma


def test_product_score_infeasible_child():
    ip = ip_instance([1], [([2], EQ, 1)], [1])
    lp = relaxation(ip)
    out = solve(lp)
    assert out.vertex == (rat(1, 2),)
    assert product_score(lp, (), out, 0) is INFINITE_SCORE


def test_product_score_integral_coordinate_rejected():
    ip = ip_instance([1, 1], [([1, 2], LE, 2)], [1, 1])
    out = solve(relaxation(ip))
    whole = next(i for i, v in enumerate(out.vertex) if v.denominator == 1)
    with pytest.raises(IntegralCoordinateError):
        product_score(relaxation(ip), (), out, whole)


def test_symmetric_tie_branches_lowest_index():
    tree = run(gen_jeroslow(3, 0))
    root = tree.nodes[0]
    assert root.status == BRANCHED
    out = solve(relaxation(gen_jeroslow(3, 0)))
    lowest_frac = next(i for i, v in enumerate(out.vertex) if v.denominator != 1)
    assert root.branch_var == lowest_frac


def test_reduce_branchset():
    assert reduce_branchset(((0, LE, 1), (0, LE, 5))) == ((0, LE, 1),)
    assert reduce_branchset(()) == ()
    both = ((0, LE, 2), (0, GE, 1))
    assert reduce_branchset(both) == both
    assert reduce_branchset(((1, GE, 1), (1, GE, 3), (0, LE, 2))) == (
        (0, LE, 2),
        (1, GE, 3),
    )


def test_fingerprint_deterministic_and_distinguishes():
    ip = gen_jeroslow(3, 0)
    a = fingerprint(run(ip))
    b = fingerprint(run(ip))
    assert a == b
    cut = CutPlane((rat(1),) * 3, rat(1))
    assert fingerprint(run(ip, [cut])) != a


def test_fingerprint_single_node():
    ip = ip_instance([1], [([1], LE, 1)], [1])
    tree = run(ip)
    assert fingerprint(tree) == "root|FathomedIntegral"


def _random_valid_cut(ip, rng):
    points = enumerate_integer_points(ip)
    alpha = tuple(rat(rng.randint(-3, 3)) for _ in range(ip.n))
    if points:
        beta = max(dot(alpha, tuple(rat(v) for v in x)) for x in points)
    else:
        beta = rat(rng.randint(0, 3))
    return CutPlane(alpha, beta)


def test_bc_matches_brute_force_with_and_without_cuts():
    rng = random.Random(99)
    for trial in range(30):
        ip = gen_packing(3, 2, 4, seed=trial, ub_max=2)
        best = best_integer_point(ip)
        tree = run(ip)
        assert not tree.capped
        if best is None:
            assert tree.optimal is None
        else:
            assert tree.objective_value == best[0]
        cut = _random_valid_cut(ip, rng)
        tree2 = run(ip, [cut])
        if best is None:
            assert tree2.optimal is None
        else:
            assert tree2.objective_value == best[0]


def test_incumbent_trace_strictly_increasing():
    for seed in range(10):
        ip = gen_packing(4, 3, 4, seed=seed, ub_max=2)
        tree = run(ip)
        values = [v for _, v in tree.incumbent_trace]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_fathomed_by_bound_consistent_with_trace():
    for seed in range(10):
        ip = gen_packing(4, 3, 4, seed=seed, ub_max=2)
        tree = run(ip)
        for node in tree.nodes:
            if node.status == FATHOMED_BY_BOUND:
                prior = [v for idx, v in tree.incumbent_trace if idx < node.index]
                assert prior and node.lp.value <= max(prior)


def test_kappa_cap():
    tree = run(gen_jeroslow(9, 0), config=BCConfig(kappa=5))
    assert tree.capped
    assert tree.size <= 5
    assert tree.optimal is None
    assert any(n.status == OPEN_CAPPED for n in tree.nodes)


def test_suppress_bounding_mode():
    ip = gen_packing(4, 2, 4, seed=3, ub_max=2)
    normal = run(ip)
    relaxed = run(ip, config=BCConfig(suppress_bounding=True))
    assert all(n.status != FATHOMED_BY_BOUND for n in relaxed.nodes)
    assert relaxed.size >= normal.size


def test_min_sense_objective_value():
    # Minimization: engine negates internally, reported value is original.
    ip = ip_instance([2, 3], [([1, 1], GE, 1)], [1, 1], maximize=False)
    tree = run(ip)
    assert tree.optimal == (1, 0)
    assert tree.objective_value == 2


def test_dump_tree_format():
    tree = run(gen_jeroslow(3, 0))
    dump = dump_tree(tree)
    assert dump.splitlines()[0].startswith("node 0 parent - sigma root status Branched")
