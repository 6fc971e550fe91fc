"""IP instances, the brute-force integer oracle, and instance generators.

An IPInstance is a pure-integer program: integer constraint data, integer
variables with 0 <= x <= upper, rational objective, maximize or minimize.
Generators (facility location, Jeroslow, random packing) are pure functions
of (parameters, seed).  The on-disk format is a line-oriented text document
holding exact rationals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from . import lp as lpmod
from .lp import EQ, GE, LE, Infeasible, LinearProgram, Unbounded
from .rat import ONE, ZERO, dot, fmt, is_integral, qceil, rat
from .rng import SplitMix64, derive, quantize

ENUMERATION_CAP = 10**7


class UnboundedRelaxationError(ValueError):
    """The LP relaxation is unbounded in some coordinate direction."""


class TooLargeError(ValueError):
    """Integer enumeration box exceeds the configured cap."""


class EvenNError(ValueError):
    """Jeroslow instances need an odd variable count."""


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class IPInstance:
    objective: tuple
    rows: tuple  # (coeffs: tuple[Rat,...] integral, sense, rhs: Rat integral)
    upper: tuple  # per-variable Opt[int]
    maximize: bool = True

    def __post_init__(self):
        for coeffs, sense, rhs in self.rows:
            if len(coeffs) != self.n:
                raise ValueError("row length does not match variable count")
            if not all(is_integral(c) for c in coeffs) or not is_integral(rhs):
                raise ValueError("constraint data must be integral")

    @property
    def n(self) -> int:
        return len(self.objective)

    @property
    def m(self) -> int:
        return len(self.rows)


def ip_instance(objective, rows, upper, maximize=True) -> IPInstance:
    obj = tuple(rat(c) for c in objective)
    built = tuple(lpmod.make_row(c, s, r) for c, s, r in rows)
    ub = tuple(None if u is None else int(u) for u in upper)
    if len(ub) != len(obj):
        raise ValueError("upper-bound list length mismatch")
    return IPInstance(obj, built, ub, maximize)


def relaxation(ip: IPInstance) -> LinearProgram:
    """LP relaxation in maximization form (minimize becomes max of -c)."""
    obj = ip.objective if ip.maximize else tuple(-c for c in ip.objective)
    ub = tuple(None if u is None else rat(u) for u in ip.upper)
    return LinearProgram(obj, ip.rows, ub)


def with_bound_rows(ip: IPInstance) -> IPInstance:
    """Materialize finite upper bounds as explicit x_i <= u rows (bounds data
    cleared).  Used before to_equality_form when the GMI pipeline needs the
    full optimum to be a basic solution of the row system."""
    extra = []
    n = ip.n
    for i, u in enumerate(ip.upper):
        if u is not None:
            coeffs = tuple(ONE if j == i else ZERO for j in range(n))
            extra.append((coeffs, LE, rat(u)))
    return IPInstance(ip.objective, ip.rows + tuple(extra), (None,) * n, ip.maximize)


def tau_bound(ip: IPInstance) -> int:
    """ceil of the largest coordinate magnitude over the LP relaxation,
    computed by 2n exact LP solves (per-coordinate max and min)."""
    base = relaxation(ip)
    n = ip.n
    best = ZERO
    for i in range(n):
        for sign in (1, -1):
            obj = tuple(rat(sign) if j == i else ZERO for j in range(n))
            out = lpmod.solve(LinearProgram(obj, base.rows, base.upper))
            if isinstance(out, Unbounded):
                raise UnboundedRelaxationError(f"variable {i} unbounded in relaxation")
            if isinstance(out, Infeasible):
                continue
            # sign=-1 maximizes -x_i, so out.value is already the magnitude
            # of the most negative coordinate when one exists.
            if out.value > best:
                best = out.value
    return max(0, qceil(best))


def enumerate_integer_points(ip: IPInstance, cap: int = ENUMERATION_CAP) -> list:
    """Exactly P_I = P intersect Z^n, by scanning [0, min(tau, ub_i)]^n."""
    tau = tau_bound(ip)
    highs = []
    total = 1
    for u in ip.upper:
        h = tau if u is None else min(tau, u)
        highs.append(h)
        total *= h + 1
        if total > cap:
            raise TooLargeError(f"enumeration box exceeds cap ({cap})")
    points = []
    for cand in itertools.product(*(range(h + 1) for h in highs)):
        ok = True
        for coeffs, sense, rhs in ip.rows:
            lhs = sum(int(c) * v for c, v in zip(coeffs, cand))
            if sense == LE:
                ok = lhs <= rhs
            elif sense == GE:
                ok = lhs >= rhs
            else:
                ok = lhs == rhs
            if not ok:
                break
        if ok:
            points.append(cand)
    return points


def best_integer_point(ip: IPInstance, cap: int = ENUMERATION_CAP):
    """Brute-force optimum: (value, point) in the instance's own sense, or
    None when integer-infeasible."""
    best = None
    for x in enumerate_integer_points(ip, cap):
        v = dot(ip.objective, tuple(rat(c) for c in x))
        if best is None:
            best = (v, x)
        elif ip.maximize and v > best[0]:
            best = (v, x)
        elif not ip.maximize and v < best[0]:
            best = (v, x)
    return best


# ---------------------------------------------------------------------------
# Generators


def gen_jeroslow(n: int, c) -> IPInstance:
    """Binary IP with the single row 2 x_1 + ... + 2 x_n = n; infeasible for
    odd n.  The objective vector is (c, ..., c), constant on the relaxation's
    feasible region and distinct per c."""
    if n % 2 == 0:
        raise EvenNError("Jeroslow construction needs odd n")
    cc = rat(c)
    return ip_instance(
        [cc] * n,
        [([2] * n, EQ, n)],
        [1] * n,
        maximize=True,
    )


def facility_instance(f: Sequence, s: Sequence[Sequence], kappa: Sequence[int]) -> IPInstance:
    """Capacitated facility location 0/1 IP (minimize).

    Variables: x_j for each location j, then y_{c,j} (client-major).
    Rows: per client, sum_j y_{c,j} = 1; per location, sum_c y_{c,j} <= kappa_j x_j.
    """
    nloc = len(f)
    ncli = len(s)
    n = nloc + ncli * nloc
    obj = [rat(v) for v in f]
    for c in range(ncli):
        if len(s[c]) != nloc:
            raise ValueError("service cost matrix shape mismatch")
        obj.extend(rat(v) for v in s[c])
    rows = []
    for c in range(ncli):
        coeffs = [ZERO] * n
        for j in range(nloc):
            coeffs[nloc + c * nloc + j] = ONE
        rows.append((coeffs, EQ, 1))
    for j in range(nloc):
        coeffs = [ZERO] * n
        coeffs[j] = rat(-int(kappa[j]))
        for c in range(ncli):
            coeffs[nloc + c * nloc + j] = ONE
        rows.append((coeffs, LE, 0))
    return ip_instance(obj, rows, [1] * n, maximize=False)


def facility_data(ip: IPInstance):
    """Recover (f, s, kappa) from a facility_instance layout."""
    ncli = sum(1 for _, sense, _ in ip.rows if sense == EQ)
    nloc = ip.m - ncli
    assert ip.n == nloc + ncli * nloc, "not a facility-layout instance"
    f = list(ip.objective[:nloc])
    s = [list(ip.objective[nloc + c * nloc : nloc + (c + 1) * nloc]) for c in range(ncli)]
    kappa = [int(-ip.rows[ncli + j][0][j]) for j in range(nloc)]
    return f, s, kappa


def gen_facility_base(locations: int, clients: int, seed: int) -> IPInstance:
    """Base instance for the perturbation distribution: costs uniform in
    [0, 100], capacities uniform in {0..39}; all costs quantized to 10^-6."""
    rng = SplitMix64(seed)
    f = [quantize(rng.uniform(0.0, 100.0)) for _ in range(locations)]
    s = [[quantize(rng.uniform(0.0, 100.0)) for _ in range(locations)] for _ in range(clients)]
    kappa = [rng.randint(0, 39) for _ in range(locations)]
    return facility_instance(f, s, kappa)


@dataclass(frozen=True)
class FacilityPerturb:
    base: IPInstance
    noise_sd: float = 10.0


@dataclass(frozen=True)
class FacilityLine:
    locations: int = 80
    clients: int = 80
    capacity_max: int = 43


@dataclass(frozen=True)
class Jeroslow:
    """Mixture over odd sizes; a singleton tuple gives the fixed-n family."""

    ns: tuple = (3,)


@dataclass(frozen=True)
class RandomPacking:
    n: int
    m: int
    coeff_max: int
    ub_max: int = 1


def gen_facility(kind, seed: int) -> IPInstance:
    rng = SplitMix64(seed)
    if isinstance(kind, FacilityPerturb):
        f0, s0, k0 = facility_data(kind.base)
        sd = kind.noise_sd
        f = [quantize(float(v) + rng.gauss(0.0, sd)) for v in f0]
        s = [[quantize(float(v) + rng.gauss(0.0, sd)) for v in row] for row in s0]
        kappa = [max(0, round(v + rng.gauss(0.0, sd))) for v in k0]
        return facility_instance(f, s, kappa)
    if isinstance(kind, FacilityLine):
        nloc, ncli = kind.locations, kind.clients
        xs = [j / (nloc - 1) if nloc > 1 else 0.0 for j in range(nloc)]
        clients = [(rng.u01(), rng.u01()) for _ in range(ncli)]
        s = [
            [quantize(math.hypot(cx - xs[j], cy - 0.5)) for j in range(nloc)]
            for cx, cy in clients
        ]
        f = [ONE] * nloc
        kappa = [rng.randint(0, kind.capacity_max) for _ in range(nloc)]
        return facility_instance(f, s, kappa)
    raise TypeError(f"not a facility distribution: {kind!r}")


def gen_packing(n: int, m: int, coeff_max: int, seed: int, ub_max: int = 1) -> IPInstance:
    rng = SplitMix64(seed)
    rows = []
    for _ in range(m):
        while True:
            coeffs = [rng.randint(0, coeff_max) for _ in range(n)]
            if any(coeffs):
                break
        cap = max(1, sum(c * ub_max for c in coeffs) // 2)
        rows.append(([rat(c) for c in coeffs], LE, rat(cap)))
    obj = [rat(rng.randint(1, coeff_max)) for _ in range(n)]
    return ip_instance(obj, rows, [ub_max] * n, maximize=True)


def sample(dist, seed: int) -> IPInstance:
    """Draw one instance; a pure function of (distribution, seed)."""
    if isinstance(dist, (FacilityPerturb, FacilityLine)):
        return gen_facility(dist, seed)
    if isinstance(dist, Jeroslow):
        rng = SplitMix64(seed)
        n = dist.ns[rng.randint(0, len(dist.ns) - 1)]
        c = quantize(rng.u01())
        return gen_jeroslow(n, c)
    if isinstance(dist, RandomPacking):
        return gen_packing(dist.n, dist.m, dist.coeff_max, derive(seed, 3), dist.ub_max)
    raise TypeError(f"unknown distribution {dist!r}")


# ---------------------------------------------------------------------------
# On-disk format


def serialize_instance(ip: IPInstance) -> str:
    out = [f"ip {ip.n} {ip.m} {'max' if ip.maximize else 'min'}"]
    out.append("c " + " ".join(fmt(c) for c in ip.objective))
    for coeffs, sense, rhs in ip.rows:
        out.append("row " + " ".join(fmt(c) for c in coeffs) + f" {sense} {fmt(rhs)}")
    out.append("ub " + " ".join("-" if u is None else str(u) for u in ip.upper))
    return "\n".join(out) + "\n"


def parse_instance(text: str) -> IPInstance:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((no, stripped))
    if not lines:
        raise ParseError(0, "empty document")

    def expect(idx, tag):
        if idx >= len(lines):
            raise ParseError(lines[-1][0], f"missing {tag} line")
        no, content = lines[idx]
        toks = content.split()
        if toks[0] != tag:
            raise ParseError(no, f"expected {tag!r}, got {toks[0]!r}")
        return no, toks[1:]

    no, head = expect(0, "ip")
    if len(head) != 3 or head[2] not in ("max", "min"):
        raise ParseError(no, "header must be 'ip <n> <m> <max|min>'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(no, "n and m must be integers") from None

    no, ctoks = expect(1, "c")
    if len(ctoks) != n:
        raise ParseError(no, f"objective has {len(ctoks)} entries, expected {n}")
    try:
        objective = [rat(t) for t in ctoks]
    except (ValueError, ZeroDivisionError):
        raise ParseError(no, "bad rational in objective") from None

    rows = []
    for k in range(m):
        no, toks = expect(2 + k, "row")
        if len(toks) != n + 2:
            raise ParseError(no, f"row needs {n} coefficients, a sense, and a rhs")
        if toks[n] not in (LE, EQ, GE):
            raise ParseError(no, f"bad sense {toks[n]!r}")
        try:
            coeffs = [rat(t) for t in toks[:n]]
            rhs = rat(toks[n + 1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(no, "bad rational in row") from None
        rows.append((coeffs, toks[n], rhs))

    no, utoks = expect(2 + m, "ub")
    if len(utoks) != n:
        raise ParseError(no, f"ub has {len(utoks)} entries, expected {n}")
    try:
        upper = [None if t == "-" else int(t) for t in utoks]
    except ValueError:
        raise ParseError(no, "bad integer in ub") from None

    try:
        return ip_instance(objective, rows, upper, maximize=(head[2] == "max"))
    except ValueError as exc:
        raise ParseError(no, str(exc)) from None
