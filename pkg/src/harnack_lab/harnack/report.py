"""
Verdict records shared by every inequality check.
"""
import math
from enum import StrEnum

import numpy as np
import pandas as pd
from serde import serde

from harnack_lab.errors import ConfigurationError
from harnack_lab.semigroup.estimates import McEstimate
from harnack_lab.transforms.constants import AssumptionCertificate, HarnackConstants


class Statement(StrEnum):
    DRIFT_LOG = "thm1.1-log"
    DRIFTLESS_LOG = "prop2.1-log"
    TRANSFORMED_LOG = "thm1.2-log"
    TRANSFORMED_POWER = "thm1.2-power"
    WANG_LOG = "wang-log"
    WANG_POWER = "wang-power"
    STABLE_HARNACK = "stable-harnack"


LOG_STATEMENTS = (Statement.DRIFT_LOG, Statement.DRIFTLESS_LOG, Statement.TRANSFORMED_LOG, Statement.WANG_LOG)
POWER_STATEMENTS = (Statement.TRANSFORMED_POWER, Statement.WANG_POWER)


class Verdict(StrEnum):
    HOLDS = "HOLDS"
    VIOLATED = "VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"


def classify(lhs: McEstimate, rhs: McEstimate, paired: bool = False) -> Verdict:
    """
    HOLDS iff the LHS interval lies below the RHS interval, VIOLATED iff it lies
    strictly above, else INCONCLUSIVE. Paired sides come from the same samples
    and compare exactly.
    """
    if paired:
        tolerance = 1e-12 * max(1.0, abs(lhs.mean), abs(rhs.mean))
        return Verdict.HOLDS if lhs.mean <= rhs.mean + tolerance else Verdict.VIOLATED
    if lhs.upper <= rhs.lower:
        return Verdict.HOLDS
    if lhs.lower > rhs.upper:
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


@serde
class InequalityConstants:
    """Constants entering an inequality, with where they came from."""
    K: float | None = None
    kappa: float | None = None
    delta: float | None = None
    C: float | None = None
    source: str = "explicit"

    @staticmethod
    def from_harnack_constants(constants: HarnackConstants) -> "InequalityConstants":
        return InequalityConstants(constants.K1, constants.kappa1, constants.delta1, None,
                                   f"Ito-Tanaka lambda={constants.lam:g}, {constants.norms}")

    @staticmethod
    def from_certificate(certificate: AssumptionCertificate) -> "InequalityConstants":
        return InequalityConstants(certificate.K0, certificate.kappa0, certificate.delta0, None,
                                   f"probe suprema over {certificate.probe_count} pairs")

    def require(self, statement: Statement, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            hint = " (fit it first or point constant_file at a fitted constant)" if "C" in missing else ""
            raise ConfigurationError(f"{statement} needs constants {missing}{hint}")


@serde
class HarnackReport:
    statement: Statement
    x: list[float]
    y: list[float]
    s: float
    t: float
    f: str
    lhs: McEstimate
    rhs: McEstimate
    term: float
    constants: InequalityConstants
    verdict: Verdict
    p: float | None = None
    alternative_term: float | None = None
    alternative_verdict: Verdict | None = None
    paired: bool = False

    @property
    def margin(self) -> float:
        return self.rhs.mean - self.lhs.mean


def as_list(x) -> list[float]:
    return np.atleast_1d(np.asarray(x, dtype=float)).tolist()


def pairs_distance(x, y) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def kt_factor(K: float, t: float) -> float:
    """K / (1 - e^{-Kt}), with the limit 1/t at K = 0."""
    if K == 0.0:
        return 1.0 / t
    return K / -math.expm1(-K * t)


def reports_to_frame(reports: list[HarnackReport]) -> pd.DataFrame:
    """One row per instance; columns are documented in the README."""
    rows = []
    for r in reports:
        row = {"statement": str(r.statement), "s": r.s, "t": r.t, "f": r.f, "p": r.p}
        row |= {f"x{i + 1}": v for i, v in enumerate(r.x)}
        row |= {f"y{i + 1}": v for i, v in enumerate(r.y)}
        row |= {
            "distance": pairs_distance(r.x, r.y),
            "lhs": r.lhs.mean,
            "lhs_lower": r.lhs.lower,
            "lhs_upper": r.lhs.upper,
            "rhs": r.rhs.mean,
            "rhs_lower": r.rhs.lower,
            "rhs_upper": r.rhs.upper,
            "term": r.term,
            "alternative_term": r.alternative_term,
            "verdict": str(r.verdict),
            "alternative_verdict": None if r.alternative_verdict is None else str(r.alternative_verdict),
        }
        rows.append(row)
    return pd.DataFrame(rows)
