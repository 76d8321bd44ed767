"""Classical, refined and reversed Hoelder bounds for isotonic functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import NonFiniteError, ShapeError
from .functional import Functional, Partition

CHAIN_RTOL = 1e-10
QUAD_TOL_FACTOR = 10.0
MIN_STANDARD_P = 1.0 + 1e-6


class RegimeError(ValueError):
    pass


def conjugate_of(p: float) -> float:
    """The exponent q with 1/p + 1/q = 1."""
    if p == 1:
        raise ValueError("p = 1 has no finite conjugate exponent")
    if p == 0:
        raise ValueError("p = 0 has no conjugate exponent")
    return p / (p - 1.0)


@dataclass(frozen=True)
class ConjugateExponents:
    p: float
    q: float

    def __post_init__(self):
        if not (np.isfinite(self.p) and np.isfinite(self.q)) or self.p == 0 or self.q == 0:
            raise ValueError(f"invalid exponents p={self.p}, q={self.q}")
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
            raise ValueError(f"1/p + 1/q = {1 / self.p + 1 / self.q!r}, expected 1")

    @classmethod
    def from_p(cls, p: float) -> "ConjugateExponents":
        return cls(float(p), conjugate_of(float(p)))

    @property
    def regime(self) -> str:
        if self.p > 1:
            return "standard"
        if 0 < self.p < 1:
            return "reversed"
        return "negative"


def _exps(exps) -> ConjugateExponents:
    return exps if isinstance(exps, ConjugateExponents) else ConjugateExponents.from_p(exps)


class YoungResult(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def young_gap(a: float, b: float, t: float) -> YoungResult:
    """Weighted AM-GM: a^t b^(1-t) <= t a + (1-t) b."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    lhs = a**t * b ** (1 - t)
    rhs = t * a + (1 - t) * b
    # evaluated relative to b to avoid cancelling two nearly equal large numbers
    lr = math.log(a / b)
    gap = b * (t * math.expm1(lr) - math.expm1(t * lr))
    return YoungResult(lhs, rhs, max(gap, 0.0))


@dataclass(frozen=True)
class BoundReport:
    p: float
    q: float
    lhs: float
    classical: float
    terms: tuple[float, ...]
    refined: float

    @property
    def slack_refined(self) -> float:
        return self.refined - self.lhs

    @property
    def refinement_gap(self) -> float:
        return self.classical - self.refined

    @property
    def tightness(self) -> float | None:
        return self.refined / self.classical if self.classical > 0 else None


@dataclass(frozen=True)
class ChainReport:
    lhs: float
    refined: float
    classical: float
    passed: bool
    min_slack: float
    tolerance: float
    report: BoundReport


def _node_values(A: Functional, w, f, g):
    wv = np.abs(A.values(w))
    fv = np.abs(A.values(f))
    gv = np.abs(A.values(g))
    return wv, fv, gv


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("non-finite intermediate value in bound computation")


def _power_sums(A: Functional, w, f, g, exps: ConjugateExponents, part: Partition | None):
    p, q = exps.p, exps.q
    wv, fv, gv = _node_values(A, w, f, g)
    if q < 0 and np.any(gv[wv > 0] == 0):
        raise ZeroDivisionError("g vanishes where a negative power is taken")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        wfp = wv * fv**p
        wgq = np.where(wv > 0, wv * gv**q, 0.0)
    lhs = A.apply(wv * fv * gv)
    Fp, Gq = A.apply(wfp), A.apply(wgq)
    _check_finite(wfp, wgq, lhs, Fp, Gq)
    parts = None
    if part is not None:
        if part.domain != A.domain:
            raise ShapeError("partition and functional live on different domains")
        W = np.clip(part.weights_at(A.nodes), 0.0, None)
        parts = (A.apply(W * wfp), A.apply(W * wgq))
        _check_finite(*parts)
    return lhs, Fp, Gq, parts


def _product(Fp, Gq, p, q):
    """Fp^(1/p) * Gq^(1/q) with the zero-mass branch defined as 0."""
    Fp = np.asarray(Fp, dtype=float)
    Gq = np.asarray(Gq, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.power(Fp, 1.0 / p) * np.power(Gq, 1.0 / q)
    if q > 0:
        out = np.where((Fp <= 0) | (Gq <= 0), 0.0, out)
    return out


def classical_holder(A: Functional, w, f, g, exps) -> BoundReport:
    """A(wfg) against A(w f^p)^(1/p) A(w g^q)^(1/q); absolute values are taken first."""
    exps = _exps(exps)
    if exps.regime != "standard":
        raise RegimeError(f"p = {exps.p} is not > 1; use reversed_holder for 0 < p < 1")
    if exps.p < MIN_STANDARD_P:
        raise RegimeError(f"p = {exps.p} is too close to 1")
    lhs, Fp, Gq, _ = _power_sums(A, w, f, g, exps, None)
    classical = float(_product(Fp, Gq, exps.p, exps.q))
    return BoundReport(exps.p, exps.q, lhs, classical, (), classical)


def improved_holder(A: Functional, w, f, g, exps, part: Partition) -> BoundReport:
    """Split A through the partition and apply Hoelder to each piece.

    terms[i] = A(alpha_i w f^p)^(1/p) * A(alpha_i w g^q)^(1/q), refined = sum(terms).
    """
    exps = _exps(exps)
    if exps.regime != "standard":
        raise RegimeError(f"p = {exps.p} is not > 1; no refined bound is asserted for 0 < p < 1")
    if exps.p < MIN_STANDARD_P:
        raise RegimeError(f"p = {exps.p} is too close to 1")
    lhs, Fp, Gq, (Fi, Gi) = _power_sums(A, w, f, g, exps, part)
    classical = float(_product(Fp, Gq, exps.p, exps.q))
    terms = tuple(float(v) for v in _product(Fi, Gi, exps.p, exps.q))
    return BoundReport(exps.p, exps.q, lhs, classical, terms, math.fsum(terms))


def reversed_holder(A: Functional, w, f, g, exps) -> BoundReport:
    """Lower bound for 0 < p < 1 (q < 0): A(wfg) >= A(w f^p)^(1/p) A(w g^q)^(1/q)."""
    exps = _exps(exps)
    if exps.regime != "reversed":
        raise RegimeError(f"p = {exps.p} is not in (0, 1)")
    lhs, Fp, Gq, _ = _power_sums(A, w, f, g, exps, None)
    if not Gq > 0:
        raise ValueError("A(w g^q) must be positive in the reversed regime")
    bound = float(_product(Fp, Gq, exps.p, exps.q))
    return BoundReport(exps.p, exps.q, lhs, bound, (), bound)


def _relative_slacks(lhs, refined, classical):
    scale = max(abs(lhs), abs(refined), abs(classical))
    if scale == 0:
        return 0.0, 0.0, 0.0
    return (refined - lhs) / scale, (classical - refined) / scale, scale


def chain_tolerance(A: Functional, w, f, g, exps, part, report: BoundReport, estimate_error: bool = True):
    """Relative tolerance for the chain check.

    Sums use CHAIN_RTOL. Quadrature functionals add ten times a Richardson
    estimate of the quadrature error of the three chain quantities.
    """
    tol = CHAIN_RTOL
    if A.is_quadrature and estimate_error:
        fine = improved_holder(A.refined(), w, f, g, exps, part)
        order = A.scheme.rule.order
        factor = 2.0**order / (2.0**order - 1.0)
        err = factor * max(
            abs(fine.lhs - report.lhs),
            abs(fine.refined - report.refined),
            abs(fine.classical - report.classical),
        )
        scale = max(abs(report.lhs), abs(report.refined), abs(report.classical))
        if scale > 0:
            tol = max(tol, QUAD_TOL_FACTOR * err / scale)
    return tol


def verify_chain(A: Functional, w, f, g, exps, part: Partition, estimate_error: bool = True) -> ChainReport:
    """Check lhs <= refined <= classical up to a relative tolerance."""
    report = improved_holder(A, w, f, g, exps, part)
    tol = chain_tolerance(A, w, f, g, exps, part, report, estimate_error)
    s1, s2, _ = _relative_slacks(report.lhs, report.refined, report.classical)
    min_slack = min(s1, s2)
    return ChainReport(report.lhs, report.refined, report.classical, min_slack >= -tol, min_slack, tol, report)


__all__ = [
    "CHAIN_RTOL",
    "RegimeError",
    "conjugate_of",
    "ConjugateExponents",
    "YoungResult",
    "young_gap",
    "BoundReport",
    "ChainReport",
    "classical_holder",
    "improved_holder",
    "reversed_holder",
    "verify_chain",
    "chain_tolerance",
]
