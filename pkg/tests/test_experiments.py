import pytest

from cutlab.bc import BCConfig, fingerprint, run
from cutlab.experiments import (
    DEFAULT_BREAKPOINT_CEILING,
    DEGENERATE_CUT_CLASS,
    INVALID_CUT_CLASS,
    GapReport,
    SweepConfig,
    breakpoint_matches_surface,
    draw_instances,
    generalization_gap,
    gmi_grid_scan,
    line_scan,
    mu_sweep,
    root_cut_pool,
    tree_size_with_gmi,
)
from cutlab.ip import Jeroslow, RandomPacking, gen_jeroslow, gen_packing, ip_instance
from cutlab.lp import LE
from cutlab.rat import rat
from cutlab.rng import SplitMix64


def test_line_scan_jeroslow_rescue_to_vacuous():
    ip = gen_jeroslow(3, 0)
    report = line_scan(ip, [1, 1, 1], (1, 3), resolution=9)
    assert report.grid_classes[0] != report.grid_classes[-1]
    assert len(report.breakpoints) >= 1
    assert len(report.interval_fingerprints) == len(report.breakpoints) + 1
    # adjacent intervals are distinct by construction
    for a, b in zip(report.interval_fingerprints, report.interval_fingerprints[1:]):
        assert a != b
    # breakpoints were refined to within (hi-lo)/2^20
    assert len(report.breakpoints) <= DEFAULT_BREAKPOINT_CEILING
    # the first regime fathoms at the root (rescue), the last matches no-cut
    no_cut = fingerprint(run(ip))
    table = {fid: fp for fid, _, fp in report.fingerprint_table}
    assert table[report.grid_classes[-1]] == no_cut


def test_line_scan_constant_when_cut_vacuous():
    ip = gen_packing(3, 2, 3, seed=8)
    report = line_scan(ip, [1, 0, 0], (50, 60), resolution=2)
    assert report.breakpoints == ()
    assert len(set(report.grid_classes)) == 1
    table = {fid: fp for fid, _, fp in report.fingerprint_table}
    assert table[report.grid_classes[0]] == fingerprint(run(ip))


def test_line_scan_invalid_region_is_distinguished():
    ip = ip_instance([1, 1], [([1, 1], LE, 2)], [1, 1])
    # integer points reach x1 = 1, so beta < 1 makes the cut x1 <= beta invalid
    report = line_scan(ip, [1, 0], (rat(-1), rat(2)), resolution=7)
    table = {fid: fp for fid, _, fp in report.fingerprint_table}
    classes = [table[c] for c in report.grid_classes]
    assert INVALID_CUT_CLASS in classes
    assert classes[-1] != INVALID_CUT_CLASS


def test_line_scan_probe_stability():
    from cutlab.experiments import line_fingerprint_fn

    ip = gen_jeroslow(3, 0)
    report = line_scan(ip, [1, 1, 1], (1, 3), resolution=5)
    table = {fid: fp for fid, _, fp in report.fingerprint_table}
    evaluate = line_fingerprint_fn(ip, [1, 1, 1])
    rng = SplitMix64(77)
    for lo, hi, fid in report.certain_spans():
        expected = table[fid]
        if hi <= lo:
            continue
        for _ in range(6):
            t = lo + (hi - lo) * rat(rng.randint(1, 127), 128)
            assert evaluate(t) == expected


def test_gmi_grid_scan_jeroslow():
    ip = gen_jeroslow(3, 0)
    reports = gmi_grid_scan(ip, 1, resolution=9)
    assert len(reports) == 1  # one equality row, one axis
    table = {fid: fp for fid, _, fp in reports[0].fingerprint_table}
    classes = [table[c] for c in reports[0].grid_classes]
    assert DEGENERATE_CUT_CLASS in classes  # u = 0
    assert len(set(classes)) >= 2


def test_gmi_grid_scan_budget():
    ip = gen_jeroslow(3, 0)
    with pytest.raises(ValueError):
        gmi_grid_scan(ip, 1, resolution=20001)


def test_breakpoint_matches_surface_exact_roots():
    from cutlab.sensitivity import PolySurface

    names = ("a1", "a2", "b")
    a1 = PolySurface.var(0, 3, names)
    b = PolySurface.var(2, 3, names)
    # surface a1 - b: restricted at alpha=(3, 0) has root t = 3
    s = a1 - b
    tol = rat(1, 1 << 20)
    assert breakpoint_matches_surface([s], [rat(3), rat(0)], rat(3), tol)
    assert breakpoint_matches_surface([s], [rat(3), rat(0)], rat(3) + tol / 2, tol)
    assert not breakpoint_matches_surface([s], [rat(3), rat(0)], rat(3) + 3 * tol, tol)
    # double root: (b - 1)^2 at t = 1
    one = PolySurface.const(1, 3, names)
    sq = (b - one) * (b - one)
    assert breakpoint_matches_surface([sq], [rat(0), rat(0)], rat(1), tol)
    assert not breakpoint_matches_surface([sq], [rat(0), rat(0)], rat(1) + 3 * tol, tol)


def test_root_cut_pool_jeroslow():
    pool, c_max, x_root = root_cut_pool(gen_jeroslow(3, 0))
    assert pool, "fractional root must produce tableau cuts"
    assert len(x_root) == 3


def test_mu_sweep_deterministic_and_stepwise():
    cfg = SweepConfig(
        distribution=RandomPacking(n=3, m=2, coeff_max=4, ub_max=2),
        samples=3,
        seed=5,
        mu_step=rat(1, 4),
        cuts_per_instance=2,
    )
    res1 = mu_sweep(cfg)
    res2 = mu_sweep(cfg)
    assert res1.to_csv() == res2.to_csv()
    assert res1.mus == (rat(0), rat(1, 4), rat(1, 2), rat(3, 4), rat(1))
    header, *rows = res1.to_csv().strip().splitlines()
    assert header == "mu,mean_tree_size,sd,n_samples"
    assert len(rows) == 5
    # distinct tree sizes bounded by distinct selections, per instance
    for sizes, sels in zip(res1.per_instance_sizes, res1.per_instance_selections):
        assert len(set(sizes)) <= len(set(sels))


def test_mu_sweep_degenerate_single_point():
    cfg = SweepConfig(
        distribution=Jeroslow((3,)),
        samples=1,
        seed=1,
        mu_step=rat(1),
        cuts_per_instance=5,
    )
    res = mu_sweep(cfg)
    assert res.mus == (rat(0), rat(1))
    inst = draw_instances(Jeroslow((3,)), __sweep_seed(1, 0), 1)[0]
    assert res.per_instance_sizes[0][0] >= 1


def __sweep_seed(seed, idx):
    from cutlab.rng import derive

    return derive(seed, 7, idx)


def test_draw_instances_pure_function():
    a = draw_instances(Jeroslow((3, 5)), 9, 4)
    b = draw_instances(Jeroslow((3, 5)), 9, 4)
    assert a == b


def test_gap_zero_for_deterministic_distribution():
    report = generalization_gap(
        Jeroslow((3,)),
        u_grid=[[rat(1, 4)], [rat(1, 3)]],
        n_schedule=[2, 4],
        repetitions=2,
        seed=3,
        holdout_factor=2,
    )
    for _, mean, q90 in report.rows:
        assert mean == 0.0 and q90 == 0.0
    csv = report.to_csv()
    assert csv.splitlines()[0] == "n,mean_gap,q90_gap"


def test_gap_identical_samples_give_zero_gap():
    dist = Jeroslow((3, 5))
    insts = draw_instances(dist, 17, 6)
    again = draw_instances(dist, 17, 6)
    u = [rat(1, 4)]
    bc = BCConfig()
    m1 = sum(tree_size_with_gmi(i, u, bc) for i in insts) / 6
    m2 = sum(tree_size_with_gmi(i, u, bc) for i in again) / 6
    assert m1 == m2


def test_gap_decreases_with_more_samples():
    report = generalization_gap(
        Jeroslow((3, 5, 7)),
        u_grid=[[rat(1, 4)], [rat(1, 2)], [rat(2, 3)]],
        n_schedule=[2, 24],
        repetitions=6,
        seed=11,
        holdout_factor=4,
    )
    rows = report.rows
    assert rows[-1][1] <= rows[0][1]
