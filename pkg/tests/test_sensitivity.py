import itertools
import random

import pytest

from cutlab.cuts import CutPlane, to_equality_form
from cutlab.ip import gen_jeroslow, gen_packing, ip_instance
from cutlab.lp import LE, Infeasible, Optimal, linear_program, solve
from cutlab.rat import ZERO, dot, rat
from cutlab.sensitivity import (
    ACTIVE_EDGE,
    CUT_INFEASIBLE,
    UNCHANGED,
    BudgetExceededError,
    EdgeId,
    FaceId,
    PolySurface,
    SingularAugmentedSystemError,
    build_arrangement,
    closed_form,
    edge_hit_halfspaces,
    edge_hits,
    gmi_arrangement,
    gmi_floor_tuple,
    indifference_poly,
    lp_edges,
    multi_closed_form,
    proportional_scalar,
    verify_closed_form,
)
from cutlab.rng import SplitMix64


def triangle_lp():
    # max x + y s.t. x <= 1, y <= x; explicit rows are
    # 0: x <= 1, 1: -x + y <= 0, 2: -x <= 0, 3: -y <= 0.
    return linear_program([1, 1], [([1, 0], LE, 1), ([-1, 1], LE, 0)])


def square_lp():
    return linear_program([1, 1], [], upper=[1, 1])


def test_triangle_has_three_edges():
    edges = lp_edges(triangle_lp())
    assert [e.rows for e in edges] == [(0,), (1,), (3,)]


def test_square_has_four_edges():
    assert len(lp_edges(square_lp())) == 4


def test_duplicate_rows_both_reported():
    lp = linear_program([1, 1], [([1, 0], LE, 1), ([1, 0], LE, 1)], upper=[2, 1])
    edges = lp_edges(lp)
    rows = [e.rows for e in edges]
    assert (0,) in rows and (1,) in rows


def test_closed_form_on_edge_x_equals_1():
    x = closed_form(triangle_lp(), EdgeId((0,)), [rat(1, 2), rat(1)], rat(1))
    assert x == (rat(1), rat(1, 2))


def test_closed_form_on_edge_y_equals_x():
    x = closed_form(triangle_lp(), EdgeId((1,)), [rat(1), rat(1)], rat(1))
    assert x == (rat(1, 2), rat(1, 2))


def test_closed_form_singular():
    with pytest.raises(SingularAugmentedSystemError):
        closed_form(triangle_lp(), EdgeId((0,)), [rat(1), rat(0)], rat(2))


def test_halfspaces_match_direct_interval_condition():
    # For edge {x = 1}, the crossing condition is 0 <= (beta - a1)/a2 <= 1.
    lp = triangle_lp()
    e = EdgeId((0,))
    rng = SplitMix64(4)
    for _ in range(200):
        a1 = rat(rng.randint(-32, 32), 8)
        a2 = rat(rng.randint(-32, 32), 8)
        beta = rat(rng.randint(-32, 32), 8)
        expected = a2 != 0 and ZERO <= (beta - a1) / a2 <= rat(1)
        assert edge_hits(lp, e, (a1, a2), beta) == expected


def test_halfspaces_are_degree_one():
    for e in lp_edges(triangle_lp()):
        for h in edge_hit_halfspaces(triangle_lp(), e):
            assert h.degree <= 1


def test_hit_edge_vertex_inside_polytope():
    lp = triangle_lp()
    rng = SplitMix64(9)
    rows = [((rat(1), rat(0)), rat(1)), ((rat(-1), rat(1)), rat(0)),
            ((rat(-1), rat(0)), rat(0)), ((rat(0), rat(-1)), rat(0))]
    for _ in range(120):
        alpha = (rat(rng.randint(-64, 64), 16), rat(rng.randint(-64, 64), 16))
        beta = rat(rng.randint(-64, 64), 16)
        for e in lp_edges(lp):
            if edge_hits(lp, e, alpha, beta):
                x = closed_form(lp, e, alpha, beta)
                assert all(dot(a, x) <= b for a, b in rows)


def test_far_cut_hits_no_edge():
    lp = square_lp()
    for e in lp_edges(lp):
        assert not edge_hits(lp, e, (rat(1), rat(1)), rat(10))


def test_triangle_indifference_factorization():
    lp = triangle_lp()
    poly = indifference_poly(lp, EdgeId((0,)), EdgeId((1,)))
    assert poly.degree <= 2
    at_beta_1 = poly.substitute(2, rat(1))
    # target: (a1 - a2)(a1 + a2 - 1) in variables (a1, a2, b)
    names = ("a1", "a2", "b")
    a1 = PolySurface.var(0, 3, names)
    a2 = PolySurface.var(1, 3, names)
    one = PolySurface.const(1, 3, names)
    target = (a1 - a2) * (a1 + a2 - one)
    lam = proportional_scalar(at_beta_1, target)
    assert lam is not None and lam != 0
    # vanishes exactly on both lines
    for k in range(-25, 26):
        t = rat(k, 5)
        assert at_beta_1.evaluate((t, t, rat(1))) == 0
        assert at_beta_1.evaluate((t, rat(1) - t, rat(1))) == 0


def three_var_lp():
    return linear_program(
        [1, 1, 1],
        [
            ([1, 1, 0], LE, 1),
            ([1, 0, 1], LE, 1),
            ([1, 0, 0], LE, 1),
            ([0, 0, 1], LE, 1),
        ],
    )


def test_three_var_indifference_surface():
    lp = three_var_lp()
    poly = indifference_poly(lp, EdgeId((0, 2)), EdgeId((1, 3)))
    names = ("a1", "a2", "a3", "b")
    a1 = PolySurface.var(0, 4, names)
    a2 = PolySurface.var(1, 4, names)
    a3 = PolySurface.var(2, 4, names)
    b = PolySurface.var(3, 4, names)
    target = a1 * a2 - a2 * b - a3 * a3 + a3 * b
    lam = proportional_scalar(poly, target)
    assert lam is not None and lam != 0


def test_indifference_point_gives_equal_objectives():
    # Construct (alpha, beta) exactly on an indifference surface by solving
    # the (linear-in-beta) restriction for beta; both edges' closed-form
    # vertices must then score the same objective.
    lp = triangle_lp()
    e_p, e_q = EdgeId((0,)), EdgeId((1,))
    poly = indifference_poly(lp, e_p, e_q)
    rng = SplitMix64(21)
    checked = 0
    while checked < 30:
        a1 = rat(rng.randint(-40, 40), 8)
        a2 = rat(rng.randint(-40, 40), 8)
        restricted = poly.substitute(0, a1).substitute(1, a2)
        c1 = restricted.coeffs.get((0, 0, 1), ZERO)
        c0 = restricted.coeffs.get((0, 0, 0), ZERO)
        if c1 == 0 or any(p > 1 for (_, _, p) in restricted.coeffs):
            continue
        beta = -c0 / c1
        assert poly.evaluate((a1, a2, beta)) == 0
        try:
            xp = closed_form(lp, e_p, (a1, a2), beta)
            xq = closed_form(lp, e_q, (a1, a2), beta)
        except SingularAugmentedSystemError:
            continue
        obj = lp.objective
        assert dot(obj, xp) == dot(obj, xq)
        checked += 1


def test_indifference_antisymmetry_and_identity():
    lp = triangle_lp()
    p = indifference_poly(lp, EdgeId((0,)), EdgeId((1,)))
    q = indifference_poly(lp, EdgeId((1,)), EdgeId((0,)))
    assert proportional_scalar(p, q) == rat(-1)
    with pytest.raises(ValueError):
        indifference_poly(lp, EdgeId((0,)), EdgeId((0,)))


def test_build_arrangement_triangle():
    store = build_arrangement(triangle_lp())
    assert store.hyperplane_count <= store.hyperplane_bound
    assert store.degree2_count <= store.degree2_bound
    assert all(s.degree <= 2 for s in store.all_surfaces())
    # The two factored lines of the worked example appear in some indifference
    # surface at beta = 1 (up to a rational scalar).
    names = ("a1", "a2", "b")
    a1 = PolySurface.var(0, 3, names)
    a2 = PolySurface.var(1, 3, names)
    one = PolySurface.const(1, 3, names)
    target = (a1 - a2) * (a1 + a2 - one)
    found = any(
        proportional_scalar(s.substitute(2, rat(1)), target) not in (None, 0)
        for _, _, s in store.indifference_surfaces
    )
    assert found
    dump = store.dump()
    assert dump.splitlines()[0].startswith("surf deg=1")


def test_build_arrangement_budget():
    lp = linear_program([1] * 4, [([1] * 4, LE, 2)], upper=[1] * 4)
    with pytest.raises(BudgetExceededError):
        build_arrangement(lp)


def test_verify_unchanged_far_cut():
    lp = triangle_lp()
    # Sampled directly: every non-separating sample must verify as Unchanged.
    wits = verify_closed_form(lp, trials=120, seed=11)
    assert all(w.verified for w in wits)
    assert any(w.regime == UNCHANGED for w in wits)
    assert any(w.regime == ACTIVE_EDGE for w in wits)


def test_verify_known_point_is_active_edge_x1():
    lp = triangle_lp()
    alpha = (rat(1, 2), rat(1))
    beta = rat(1)
    e = EdgeId((0,))
    assert edge_hits(lp, e, alpha, beta)
    out = solve(lp.add_constraints([(alpha, LE, beta)]))
    assert out.vertex == closed_form(lp, e, alpha, beta) == (rat(1), rat(1, 2))


def test_verify_includes_infeasible_regime():
    lp = triangle_lp()
    wits = verify_closed_form(lp, trials=400, seed=3)
    assert all(w.verified for w in wits)
    assert any(w.regime == CUT_INFEASIBLE for w in wits)


def _random_bounded_lp(rng, n, m):
    rows = []
    for _ in range(m):
        rows.append(
            ([rat(rng.randint(-4, 4)) for _ in range(n)], LE, rat(rng.randint(1, 8)))
        )
    obj = [rat(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n)]
    upper = [rat(rng.randint(1, 3)) for _ in range(n)]
    return linear_program(obj, rows, upper=upper)


def test_verify_random_lps():
    rng = random.Random(2)
    for _ in range(6):
        n = rng.randint(2, 3)
        m = rng.randint(1, 4)
        lp = _random_bounded_lp(rng, n, m)
        if not isinstance(solve(lp), Optimal):
            continue
        wits = verify_closed_form(lp, trials=25, seed=rng.randint(0, 99999))
        assert all(w.verified for w in wits)


def test_multi_closed_form_single_cut_matches_closed_form():
    lp = triangle_lp()
    cut = CutPlane((rat(1, 2), rat(1)), rat(1))
    got = multi_closed_form(lp, FaceId((0,)), [cut])
    assert got == closed_form(lp, EdgeId((0,)), cut.alpha, cut.beta)


def test_multi_closed_form_two_cut_intersection():
    lp = square_lp()
    cuts = [CutPlane((rat(1), rat(1)), rat(1)), CutPlane((rat(1), rat(-1)), rat(0))]
    got = multi_closed_form(lp, FaceId(()), cuts)
    assert got == (rat(1, 2), rat(1, 2))


def test_multi_closed_form_shape_check():
    with pytest.raises(ValueError):
        multi_closed_form(square_lp(), FaceId((0,)), [])


def test_multi_closed_form_matches_resolve_via_face_search():
    from cutlab.lp import explicit_rows

    rng = SplitMix64(123)
    lp = three_var_lp()
    base = solve(lp)
    rows = explicit_rows(lp)
    found_cases = 0
    trials = 0
    while found_cases < 5 and trials < 200:
        trials += 1
        cuts = [
            CutPlane(
                tuple(rat(rng.randint(-16, 16), 8) for _ in range(3)),
                rat(rng.randint(-8, 16), 8),
            )
            for _ in range(2)
        ]
        out = solve(lp.add_constraints([(c.alpha, LE, c.beta) for c in cuts]))
        if not isinstance(out, Optimal) or out.vertex == base.vertex:
            continue
        matched = False
        for k in (1, 2):
            for cut_subset in itertools.combinations(cuts, k):
                for face in itertools.combinations(range(len(rows)), 3 - k):
                    try:
                        x = multi_closed_form(lp, FaceId(face), list(cut_subset))
                    except SingularAugmentedSystemError:
                        continue
                    if x == out.vertex:
                        matched = True
                        break
                if matched:
                    break
            if matched:
                break
        assert matched
        found_cases += 1
    assert found_cases == 5


def test_gmi_arrangement_jeroslow_levels():
    eq = to_equality_form(gen_jeroslow(3, 0))
    arr = gmi_arrangement(eq, 1)
    # Columns a_i = (2): levels in [-2, 2]; rhs b = (3): levels in [-3, 3].
    assert arr.raw_level_pairs == 3 * 5 * 7
    assert arr.raw_level_pairs <= arr.bound
    assert all(s.degree == 1 for s in arr.surfaces)


def test_gmi_arrangement_u_zero_degenerate_box():
    eq = to_equality_form(gen_jeroslow(3, 0))
    arr = gmi_arrangement(eq, 0)
    assert gmi_floor_tuple(eq, [ZERO]) == ((0, 0, 0), 0, (True, True, True))
    assert arr.sign_vector([ZERO]) == (0,) * len(arr.surfaces)


def test_gmi_arrangement_budget():
    eq = to_equality_form(gen_jeroslow(3, 0))
    with pytest.raises(BudgetExceededError):
        gmi_arrangement(eq, 10**5)


def test_gmi_cell_invariance_sampled_pairs():
    ip = gen_packing(3, 2, 3, seed=5)
    eq = to_equality_form(ip)
    arr = gmi_arrangement(eq, 1)
    m = eq.instance.m
    rng = SplitMix64(31)
    eps = rat(1, 1 << 18)
    pairs = 0
    attempts = 0
    while pairs < 120 and attempts < 2000:
        attempts += 1
        u = [rat(rng.randint(-64, 64), 64) for _ in range(m)]
        v = [x + eps * rat(rng.randint(-2, 2)) for x in u]
        if arr.sign_vector(u) != arr.sign_vector(v):
            continue
        assert gmi_floor_tuple(eq, u) == gmi_floor_tuple(eq, v)
        pairs += 1
    assert pairs == 120
