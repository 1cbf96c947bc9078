"""Bundled parameters: the 512-bit F_{p^4} record and the desk-scale toy field."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

from .arith import is_prime
from .descent import verify_dlog
from .poly import IntPoly
from .polyselect import PolySetup, SetupReport, TowerParams, make_setup, verify_setup

logger = logging.getLogger("extnfs.fixtures")

RECORD_P = 314159265358979323846264338327950288459
RECORD_ELL = 3518936953814357579166997631392367151668364387422300934981051190217
RECORD_COFACTOR = 28047119146
RECORD_H = IntPoly((1, -1, 1))
RECORD_S = 45
RECORD_T = (0, 1)
RECORD_U = -3386516025263921869
RECORD_V = 2690013449567156494
RECORD_GENERATOR = (5, 0, 1, 0)
RECORD_TARGET = (
    30599218174135966290435729003342952605,
    54759457138217852516642742746639193200,
    57247093699959574966967627724076630353,
    27182818284590452353602874713526624977,
)
RECORD_VLOG_G = 992323251125728356329649930303177107284104491653542204374572554143
RECORD_VLOG_T = 401809551984744589507112134228751535116674975282792047359473327871
RECORD_SPLIT_FACTORS = (
    2, 2, 5701, 41611, 55057, 4088911, 996853403317, 203630288936359, 512871673683067,
    1796070586527211, 247959619100557519, 244801552463017277719,
)
RECORD_SPLIT_BITS = 68

TOY_P = 1048991
TOY_ELL = 42322389157
TOY_COFACTOR = 26


@dataclass(frozen=True)
class RecordFixture:
    p: int = RECORD_P
    ell: int = RECORD_ELL
    cofactor: int = RECORD_COFACTOR
    h: IntPoly = RECORD_H
    s: int = RECORD_S
    t: Tuple[int, int] = RECORD_T
    u: int = RECORD_U
    v: int = RECORD_V
    generator: Tuple[int, int, int, int] = RECORD_GENERATOR
    target: Tuple[int, int, int, int] = RECORD_TARGET
    vlog_g: int = RECORD_VLOG_G
    vlog_t: int = RECORD_VLOG_T
    split_factors: Tuple[int, ...] = RECORD_SPLIT_FACTORS

    def setup(self) -> PolySetup:
        params = TowerParams(self.p, self.ell, self.cofactor)
        return make_setup(params, self.h, self.s, self.t, self.u, self.v)

    def perturbed(self, **changes) -> "RecordFixture":
        return replace(self, **changes)


def record_fixture() -> RecordFixture:
    return RecordFixture()


def toy_params() -> TowerParams:
    return TowerParams(TOY_P, TOY_ELL, TOY_COFACTOR)


@dataclass
class RecordReport:
    setup: SetupReport
    checks: List[Tuple[str, bool]] = field(default_factory=list)

    def add(self, name: str, passed: bool) -> None:
        self.checks.append((name, bool(passed)))

    @property
    def ok(self) -> bool:
        return self.setup.ok and all(passed for _, passed in self.checks)

    def result(self, name: str) -> bool:
        for check, passed in self.checks:
            if check == name:
                return passed
        return self.setup.result(name)

    def lines(self) -> List[str]:
        return self.setup.lines() + [f"{'PASS' if passed else 'FAIL'} {name}" for name, passed in self.checks]


def verify_record(fixture: Optional[RecordFixture] = None) -> RecordReport:
    """Recheck the published record: setup, cofactor, split factors and the final identity."""
    fixture = fixture or record_fixture()
    setup = fixture.setup()
    report = RecordReport(verify_setup(setup))
    report.add("ell * cofactor = p^2 + 1", fixture.ell * fixture.cofactor == fixture.p**2 + 1)
    factors = fixture.split_factors
    report.add("split factors are prime", all(is_prime(q) for q in factors))
    report.add(f"largest split factor below 2^{RECORD_SPLIT_BITS}",
               bool(factors) and max(factors) < 1 << RECORD_SPLIT_BITS)
    identity = False
    if report.setup.result("h irreducible mod p"):
        identity = verify_dlog(fixture.generator, fixture.target, fixture.vlog_g, fixture.vlog_t, setup)
    report.add("g^(C*vlog_t) = t^(C*vlog_g)", identity)
    for line in report.lines():
        logger.info(line)
    return report
