"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage error (including
malformed inputs), 3 budget or capacity error.  Every randomized subcommand
requires --seed, so runs are reproducible by construction.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter

from .bc import BCConfig, run
from .cuts import DegenerateCutError, gmi_cut, parse_cut, to_equality_form
from .experiments import SweepConfig, generalization_gap, line_scan, mu_sweep
from .ip import (
    FacilityLine,
    FacilityPerturb,
    Jeroslow,
    ParseError,
    RandomPacking,
    TooLargeError,
    gen_facility_base,
    parse_instance,
    relaxation,
    sample,
    serialize_instance,
)
from .rat import fmt, rat
from .sensitivity import BudgetExceededError, build_arrangement, verify_closed_form

USAGE_ERROR = 2
VERIFY_FAIL = 1
BUDGET_ERROR = 3


def _read_instance(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _read_cuts(path: str):
    cuts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                cuts.append(parse_cut(line))
    return cuts


def _write_or_print(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dist_from_args(args) -> object:
    kind = args.dist
    if kind == "jeroslow":
        if args.n is None or args.n % 2 == 0:
            raise ValueError("jeroslow needs an odd --n")
        return Jeroslow((args.n,))
    if kind == "jeroslow-mix":
        ns = tuple(int(t) for t in args.ns.split(","))
        if not ns or any(n % 2 == 0 for n in ns):
            raise ValueError("jeroslow-mix needs odd sizes in --ns")
        return Jeroslow(ns)
    if kind == "fl-perturb":
        base = gen_facility_base(args.locations, args.clients, args.base_seed)
        return FacilityPerturb(base, args.noise_sd)
    if kind == "fl-line":
        return FacilityLine(args.locations, args.clients, args.capacity_max)
    if kind == "packing":
        return RandomPacking(args.n or 4, args.m or 3, args.coeff_max, args.ub_max)
    raise ValueError(f"unknown distribution {kind!r}")


def _add_dist_flags(p: argparse.ArgumentParser, default_loc: int, default_cli: int):
    p.add_argument(
        "--dist",
        required=True,
        choices=["fl-perturb", "fl-line", "jeroslow", "jeroslow-mix", "packing"],
    )
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--ns", type=str, default="3,5")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--coeff-max", type=int, default=4)
    p.add_argument("--ub-max", type=int, default=1)
    p.add_argument("--locations", type=int, default=default_loc)
    p.add_argument("--clients", type=int, default=default_cli)
    p.add_argument("--capacity-max", type=int, default=43)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--noise-sd", type=float, default=10.0)


def cmd_solve(args) -> int:
    ip = _read_instance(args.instance)
    cuts = _read_cuts(args.cuts) if args.cuts else []
    tree = run(ip, cuts, BCConfig(kappa=args.kappa))
    counts = Counter(node.status for node in tree.nodes)
    print(f"size {tree.size}")
    print("status " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    print(f"capped {'yes' if tree.capped else 'no'}")
    if tree.capped:
        print("optimum unknown (capped)")
    elif tree.optimal is None:
        print("integer infeasible")
    else:
        xs = " ".join(str(v) for v in tree.optimal)
        print(f"optimal {xs}")
        print(f"value {fmt(tree.objective_value)}")
    return 0


def cmd_gen(args) -> int:
    dist = _dist_from_args(args)
    inst = sample(dist, args.seed)
    _write_or_print(serialize_instance(inst), args.out)
    return 0


def cmd_gmi(args) -> int:
    ip = _read_instance(args.instance)
    eq = to_equality_form(ip)
    u = [rat(t) for t in args.u.split(",")]
    cut = gmi_cut(eq, u)
    print(cut.text())
    return 0


def cmd_sensitivity_verify(args) -> int:
    ip = _read_instance(args.instance)
    witnesses = verify_closed_form(relaxation(ip), args.trials, args.seed)
    regimes = Counter(w.regime for w in witnesses)
    bad = sum(1 for w in witnesses if not w.verified)
    print(f"trials {len(witnesses)}")
    print("regimes " + " ".join(f"{k}={v}" for k, v in sorted(regimes.items())))
    print(f"unverified {bad}")
    return 0 if bad == 0 else VERIFY_FAIL


def cmd_sensitivity_arrange(args) -> int:
    ip = _read_instance(args.instance)
    store = build_arrangement(relaxation(ip))
    print(store.dump())
    print(
        f"# hyperplanes {store.hyperplane_count} (bound {store.hyperplane_bound}) "
        f"degree2 {store.degree2_count} (bound {store.degree2_bound})"
    )
    return 0


def cmd_scan(args) -> int:
    ip = _read_instance(args.instance)
    alpha = [rat(t) for t in args.alpha.split(",")]
    report = line_scan(
        ip,
        alpha,
        (rat(args.beta_lo), rat(args.beta_hi)),
        args.res,
        BCConfig(kappa=args.kappa),
    )
    if args.out:
        _write_or_print(report.to_csv(), args.out)
        _write_or_print(report.sidecar_csv(), args.out + ".fp.csv")
    else:
        sys.stdout.write(report.to_csv())
        sys.stdout.write("\n")
        sys.stdout.write(report.sidecar_csv())
    return 0


def cmd_sweep(args) -> int:
    cfg = SweepConfig(
        distribution=_dist_from_args(args),
        samples=args.samples,
        seed=args.seed,
        mu_step=rat(args.mu_step),
        cuts_per_instance=args.cuts_per_instance,
        bc=BCConfig(kappa=args.kappa),
    )
    result = mu_sweep(cfg)
    _write_or_print(result.to_csv(), args.out)
    return 0


def cmd_gap(args) -> int:
    dist = _dist_from_args(args)
    u_grid = []
    with open(args.u_grid, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                u_grid.append([rat(t) for t in line.split(",")])
    schedule = [int(t) for t in args.n_schedule.split(",")]
    report = generalization_gap(
        dist,
        u_grid,
        schedule,
        repetitions=args.reps,
        seed=args.seed,
        bc=BCConfig(kappa=args.kappa),
    )
    _write_or_print(report.to_csv(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="cutlab", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run branch-and-cut on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--cuts", default=None, help="file of 'cut ... <= ...' lines")
    p.add_argument("--kappa", type=int, default=100_000)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="sample an instance from a distribution")
    _add_dist_flags(p, default_loc=40, default_cli=40)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gmi", help="emit the GMI cut of a multiplier vector")
    p.add_argument("--instance", required=True)
    p.add_argument("--u", required=True, help="comma-separated rationals")
    p.set_defaults(func=cmd_gmi)

    p = sub.add_parser("sensitivity", help="closed-form verification / arrangement dump")
    ssub = p.add_subparsers(dest="subcommand", required=True)
    pv = ssub.add_parser("verify")
    pv.add_argument("--instance", required=True)
    pv.add_argument("--trials", type=int, default=200)
    pv.add_argument("--seed", type=int, required=True)
    pv.set_defaults(func=cmd_sensitivity_verify)
    pa = ssub.add_parser("arrange")
    pa.add_argument("--instance", required=True)
    pa.set_defaults(func=cmd_sensitivity_arrange)

    p = sub.add_parser("scan", help="fingerprint B&C along a cut line")
    p.add_argument("--instance", required=True)
    p.add_argument("--alpha", required=True, help="comma-separated rationals")
    p.add_argument("--beta-lo", required=True)
    p.add_argument("--beta-hi", required=True)
    p.add_argument("--res", type=int, default=17)
    p.add_argument("--kappa", type=int, default=100_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sweep", help="mu-weighted cut-selection sweep")
    _add_dist_flags(p, default_loc=40, default_cli=40)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--mu-step", default="1/100")
    p.add_argument("--cuts-per-instance", type=int, default=5)
    p.add_argument("--kappa", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gap", help="empirical generalization-gap estimator")
    _add_dist_flags(p, default_loc=40, default_cli=40)
    p.add_argument("--u-grid", required=True, help="file: one comma-separated u per line")
    p.add_argument("--n-schedule", required=True)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--kappa", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gap)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BudgetExceededError, TooLargeError) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return BUDGET_ERROR
    except (ParseError, DegenerateCutError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
