"""Conjugation-method polynomial selection for eta = kappa = 2, plus setup validation and scoring."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import gmpy2
import sympy
from sympy.ntheory import sqrt_mod

from .arith import is_prime
from .errors import ConfigError, ContractViolation, PolynomialError, SearchExhausted
from .lattice import lll
from .norms import k_mul, k_norm, norm_of
from .poly import IntPoly, PolyRing, QuadField, RelPoly, absolute_poly, is_irreducible_mod, roots_mod

logger = logging.getLogger("extnfs.polyselect")

DEFAULT_H = IntPoly((1, -1, 1))


@dataclass(frozen=True)
class TowerParams:
    """p, the subgroup order ell and cofactor with ell * cofactor = p^2 + 1."""

    p: int
    ell: int
    cofactor: int
    eta: int = 2
    kappa: int = 2

    @classmethod
    def from_p_ell(cls, p: int, ell: int) -> "TowerParams":
        return cls(p, ell, (p * p + 1) // ell)

    def validate(self) -> "TowerParams":
        """Parameter gate; raises ConfigError listing every violation."""
        errors = []
        if self.eta != 2 or self.kappa != 2:
            errors.append("only eta = kappa = 2 is supported.")
        if not is_prime(self.p):
            errors.append("p must be prime.")
        if not is_prime(self.ell):
            errors.append("ell must be prime.")
        if self.ell * self.cofactor != self.p * self.p + 1:
            errors.append("ell * cofactor must equal p^2 + 1.")
        if math.gcd(self.ell, self.p * self.p - 1) != 1:
            errors.append("ell must be coprime to p^2 - 1.")
        if errors:
            raise ConfigError("\n".join(errors))
        return self


@dataclass(frozen=True)
class PolySetup:
    """The tower (h, f0, g0) with absolute polynomials f, g and the search witnesses."""

    params: TowerParams
    h: IntPoly
    f0: RelPoly
    g0: RelPoly
    f: IntPoly
    g: IntPoly
    s: int
    t: Tuple[int, int]
    u: int
    v: int
    cache: Dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def ell(self) -> int:
        return self.params.ell

    def side_poly(self, side: int) -> RelPoly:
        return self.f0 if side == 0 else self.g0

    def abs_poly(self, side: int) -> IntPoly:
        return self.f if side == 0 else self.g

    def lc_is_unit(self, side: int) -> bool:
        """Whether the leading coefficient of F_side is a unit of Z[alpha]."""
        return abs(k_norm(self.side_poly(side).lc, self.h)) == 1

    @property
    def j_sides(self) -> Tuple[int, ...]:
        """Sides carrying a denominator ideal column."""
        return tuple(side for side in (0, 1) if not self.lc_is_unit(side))


@dataclass
class SetupReport:
    checks: List[Tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> List[str]:
        return [name for name, passed, _ in self.checks if not passed]

    def result(self, name: str) -> bool:
        for check, passed, _ in self.checks:
            if check == name:
                return passed
        raise KeyError(name)

    def lines(self) -> List[str]:
        return [f"{'PASS' if passed else 'FAIL'} {name}" + (f" ({detail})" if detail else "")
                for name, passed, detail in self.checks]


def h_candidates() -> Iterator[IntPoly]:
    """Monic y^2 + h1*y + h0 with negative discriminant, small coefficients first."""
    for h0 in range(1, 16):
        for h1 in (-1, 0, 1):
            if h1 * h1 - 4 * h0 < 0:
                yield IntPoly((h0, h1, 1))


def choose_h(p: int) -> IntPoly:
    for h in h_candidates():
        if is_irreducible_mod(h, p):
            return h
    raise SearchExhausted(f"no small quadratic h is irreducible mod {p}")


def t_rank(m: int) -> List[Tuple[int, int]]:
    """Candidates t = t0 + t1*alpha whose largest coefficient is ``m``; pure values first."""
    mixed = [(t0, t1) for t1 in range(1, m + 1) for t0 in range(-m, m + 1)
             if t0 != 0 and max(abs(t0), t1) == m]
    return [(m, 0), (0, m)] + sorted(mixed, key=lambda pair: (pair[1], pair[0]))


def t_candidates(max_coeff: int) -> Iterator[Tuple[int, int]]:
    """t ordered by max coefficient; pure values before mixed ones."""
    for m in range(1, max_coeff + 1):
        yield from t_rank(m)


def t_groups(max_coeff: int, h: IntPoly) -> Iterator[List[Tuple[int, int]]]:
    """Equal-rank groups of t: by max coefficient, units of Z[alpha] before non-units."""
    for m in range(1, max_coeff + 1):
        rank = t_rank(m)
        units = [t for t in rank if abs(k_norm(t, h)) == 1]
        others = [t for t in rank if abs(k_norm(t, h)) != 1]
        yield from (group for group in (units, others) if group)


def short_vector(p: int, r: int) -> Tuple[int, int]:
    """First LLL vector of the lattice spanned by (p, 0) and (r, 1), with v > 0."""
    reduced, _ = lll([(p, 0), (r, 1)])
    u, v = reduced[0]
    if v < 0 or (v == 0 and u < 0):
        u, v = -u, -v
    return u, v


def conjugation_pair(h: IntPoly, s: int, t: Tuple[int, int], u: int, v: int) -> Tuple[RelPoly, RelPoly]:
    """f0 = t*v*x^2 + u*x + t*v and g0 = t^2*x^4 + (2t^2 - s)*x^2 + t^2."""
    t_sq = k_mul(t, t, h)
    tv = (t[0] * v, t[1] * v)
    f0 = RelPoly((tv, (u, 0), tv))
    middle = (2 * t_sq[0] - s, 2 * t_sq[1])
    g0 = RelPoly((t_sq, (0, 0), middle, (0, 0), t_sq))
    return f0, g0


def make_setup(params: TowerParams, h: IntPoly, s: int, t: Tuple[int, int], u: int, v: int) -> PolySetup:
    f0, g0 = conjugation_pair(h, s, t, u, v)
    return PolySetup(params, h, f0, g0, absolute_poly(f0, h), absolute_poly(g0, h), s, t, u, v)


def verify_setup(setup: PolySetup) -> SetupReport:
    """Check the tower invariants one by one; failures are reported, not raised."""
    report = SetupReport()
    p = setup.p
    try:
        h_ok = is_irreducible_mod(setup.h, p)
    except PolynomialError as exc:
        h_ok, detail = False, str(exc)
    else:
        detail = ""
    report.add("h irreducible mod p", h_ok, detail)

    f0_ok = divides = False
    if h_ok:
        ring = PolyRing(QuadField(p, setup.h))
        f0_bar = setup.f0.over_extension(p)
        g0_bar = setup.g0.over_extension(p)
        if len(f0_bar) == 3:
            f0_ok = ring.is_irreducible(f0_bar)
            divides = bool(g0_bar) and not ring.rem(g0_bar, f0_bar)
    report.add("f0 irreducible over F_p^2", f0_ok)
    report.add("f0 divides g0 over F_p^2", divides)
    report.add("f irreducible over Q", setup.f.degree == 4 and _irreducible_over_q(setup.f))
    report.add("g irreducible over Q", setup.g.degree == 8 and _irreducible_over_q(setup.g))
    report.add("ell divides p^2 + 1", (p * p + 1) % setup.ell == 0)
    report.add("p does not divide the norm of lc(f0)", k_norm(setup.f0.lc, setup.h) % p != 0)
    return report


def _irreducible_over_q(poly: IntPoly) -> bool:
    x = sympy.Symbol("x")
    return bool(sympy.Poly(list(reversed(poly.coeffs)), x).is_irreducible)


def select_polynomials(params: TowerParams, max_s: int = 500, max_t_coeff: int = 3,
                       seed: int = 1, h: Optional[IntPoly] = None,
                       quality_samples: int = 5) -> PolySetup:
    """Best passing setup of the first (s, t group) rank that holds one.

    Ties among the passing setups of a rank go to the lowest ``quality_score``
    over ``quality_samples`` sample primes, the earliest on equal scores. A
    non-unit t puts a denominator column on side 1 too. ``seed`` is recorded only.
    """
    params.validate()
    p = params.p
    h = h or choose_h(p)
    tried: List[Tuple[int, Tuple[int, int]]] = []
    for s in range(2, max_s + 1):
        if gmpy2.is_square(s) or gmpy2.legendre(s, p) != 1:
            continue
        r = int(sqrt_mod(s, p))
        r = min(r, p - r)
        u, v = short_vector(p, r)
        for group in t_groups(max_t_coeff, h):
            passing: List[PolySetup] = []
            for t in group:
                tried.append((s, t))
                setup = make_setup(params, h, s, t, u, v)
                if verify_setup(setup).ok:
                    passing.append(setup)
            if not passing:
                continue
            best, score = best_by_quality(passing, quality_samples)
            logger.info("Selected s=%d t=%s+%s*a (u=%d, v=%d, score %.2f, %d passing) after %d candidates "
                        "(seed %d)", s, best.t[0], best.t[1], u, v, score, len(passing), len(tried), seed)
            return best
    listing = ", ".join(f"({s},{t[0]}+{t[1]}a)" for s, t in tried[:40])
    raise SearchExhausted(f"polynomial search exhausted; tried {len(tried)} pairs: {listing}")


def best_by_quality(setups: Sequence[PolySetup], samples: int = 5) -> Tuple[PolySetup, float]:
    """Lowest quality score over ``samples`` sample primes each; earliest wins a tie."""
    if not setups:
        raise ContractViolation("no setups to rank")
    scores = [quality_score(setup, sample_primes(setup, samples)) for setup in setups]
    best = min(range(len(setups)), key=lambda i: (scores[i], i))
    return setups[best], scores[best]


def quality_score(setup: PolySetup, sample_qs: Sequence[int], half_width: int = 3) -> float:
    """Mean of log2|N0*N1| - log2 q over the lattice points of a small box per sample q."""
    from .enumeration import Orthotope, enumerate_box
    from .sieve4d import build_special_q_lattice
    from .factorbase import IdealOracle

    if not sample_qs:
        raise ContractViolation("quality score needs at least one sample q")
    oracle = IdealOracle(setup, 0)
    box = Orthotope((half_width,) * 4)
    total, count = 0.0, 0
    for q in sample_qs:
        ideals = [ideal for ideal in oracle.ideals_above(q) if ideal.degree == 1]
        if not ideals:
            continue
        sq = build_special_q_lattice(ideals[0], setup)
        for z, point in enumerate_box(sq.reduced_basis, box):
            if not any(point) or math.gcd(*point) != 1:
                continue
            n0 = norm_of(setup.f0, setup.h, point)
            n1 = norm_of(setup.g0, setup.h, point)
            if n0 and n1:
                total += math.log2(n0) + math.log2(n1) - math.log2(q)
                count += 1
    if count == 0:
        raise ContractViolation("no degree-1 ideal (or no box point) for any sample q")
    return total / count


def sample_primes(setup: PolySetup, count: int = 5, start: int = 1000) -> List[int]:
    """First primes above ``start`` carrying a degree-1 ideal on side 0."""
    out: List[int] = []
    q = start
    while len(out) < count:
        q = int(gmpy2.next_prime(q))
        for r in roots_mod(setup.h, q):
            reduced = setup.f0.at_root(r, q)
            # projective or vanishing reductions carry no degree-1 ideal
            if len(reduced) == setup.f0.degree + 1 and roots_mod(IntPoly(reduced), q):
                out.append(q)
                break
    return out


def write_setup(path: Path, setup: PolySetup) -> None:
    lines = [
        f"p = {setup.p}",
        f"ell = {setup.ell}",
        f"cofactor = {setup.params.cofactor}",
        f"h = {setup.h.dump()}",
        f"f0 = {setup.f0.dump()}",
        f"g0 = {setup.g0.dump()}",
        f"f = {setup.f.dump()}",
        f"g = {setup.g.dump()}",
        f"s = {setup.s}",
        f"t = {setup.t[0]},{setup.t[1]}",
        f"u = {setup.u}",
        f"v = {setup.v}",
    ]
    lines.extend(f"{key} = {value}" for key, value in sorted(setup.cache.items()))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_setup(path: Path) -> PolySetup:
    values: Dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = raw
    core = {"p", "ell", "cofactor", "h", "f0", "g0", "f", "g", "s", "t", "u", "v"}
    missing = core - set(values)
    if missing:
        raise ConfigError(f"setup file {path} lacks: {', '.join(sorted(missing))}")
    t0, t1 = (int(x) for x in values["t"].split(","))
    params = TowerParams(int(values["p"]), int(values["ell"]), int(values["cofactor"]))
    return PolySetup(
        params,
        IntPoly.parse(values["h"]),
        RelPoly.parse(values["f0"]),
        RelPoly.parse(values["g0"]),
        IntPoly.parse(values["f"]),
        IntPoly.parse(values["g"]),
        int(values["s"]),
        (t0, t1),
        int(values["u"]),
        int(values["v"]),
        {key: value for key, value in values.items() if key not in core},
    )
