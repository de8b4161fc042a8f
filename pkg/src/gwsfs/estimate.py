"""Extinction-probability and effective-mutation-rate estimators.

The workhorse is phi_j(p): among mutations carried by at least j
individuals, the limiting share carried by exactly j. It is strictly
decreasing in p with range (0, 1/(j+1)], so the observed share inverts to an
extinction-probability estimate by bisection. The total mutation count per
capita then calibrates the effective mutation rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import InvalidConfigError
from .sfs import EmptySpectrumError, SiteFrequencySpectrum, summarize

# series evaluation degrades past this point (the geometric terms decay too
# slowly); the inverter treats it as the top of its bracket
P_MAX = 0.999


class DegenerateEstimateError(Exception):
    """The spectrum pins the extinction probability to 1, where the
    effective-mutation-rate formula is undefined. Carries the partial report."""

    def __init__(self, report: "EstimateReport"):
        super().__init__(
            "observed proportion 0 forces extinction-probability estimate 1; "
            "the effective mutation rate is undefined there"
        )
        self.report = report


@dataclass(frozen=True)
class FixedSizeBasis:
    """The spectrum was taken when the population first reached this size."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or isinstance(self.size, bool) or self.size < 1:
            raise InvalidConfigError("population size must be a positive integer")

    def effective_size(self) -> float:
        return float(self.size)


@dataclass(frozen=True)
class FixedTimeBasis:
    """The spectrum was taken at a fixed time; size enters as y_hat * e^{growth_rate * t}.

    y_hat is the growth-normalized size estimate from the simulation (or any
    external estimate of the exponential prefactor).
    """

    duration: float
    growth_rate: float
    y_hat: float

    def __post_init__(self):
        if not (isinstance(self.duration, (int, float)) and math.isfinite(self.duration)
                and self.duration >= 0):
            raise InvalidConfigError("duration must be finite and nonnegative")
        if not (isinstance(self.growth_rate, (int, float)) and math.isfinite(self.growth_rate)
                and self.growth_rate > 0):
            raise InvalidConfigError("growth_rate must be finite and positive")
        if not (isinstance(self.y_hat, (int, float)) and math.isfinite(self.y_hat)
                and self.y_hat > 0):
            raise InvalidConfigError("y_hat must be finite and positive")

    def effective_size(self) -> float:
        return self.y_hat * math.exp(self.growth_rate * self.duration)


@dataclass(frozen=True)
class EstimateReport:
    p_hat: float
    effective_mutation_rate_hat: float | None
    j_used: int
    x_observed: float
    clamped: bool

    @property
    def q_hat(self) -> float:
        return 1.0 - self.p_hat


def phi1(p: float) -> float:
    """Closed form of phi_j at j=1: -(p + q log q) / (p log q), with value 1/2 at p=0."""
    if not (isinstance(p, (int, float)) and 0 <= p < 1):
        raise InvalidConfigError("extinction probability must lie in [0, 1)")
    if p == 0:
        return 0.5
    logq = math.log1p(-p)
    return -(p + (1.0 - p) * logq) / (p * logq)


def _tilted_sum(p: float, j: int) -> tuple[float, float]:
    """(sum_k p^k/(j+k), sum_k p^k/(j+k+1)) to near machine precision.

    Both series share the powers of p; terms are positive and geometrically
    dominated, so the truncation point comes from the closed tail bound
    p^{K+1} / ((1-p)(j+K+1)).
    """
    if p == 0:
        return 1.0 / j, 1.0 / (j + 1)
    # smallest K with p^{K+1} / ((1-p)(j+K+1)) < 1e-17
    cut = math.log(1e-17 * (1.0 - p) * (j + 1)) / math.log(p)
    terms = int(cut) + 2
    k = np.arange(terms, dtype=np.float64)
    powers = np.power(p, k)
    return float(np.sum(powers / (j + k))), float(np.sum(powers / (j + k + 1)))


def phi_j(p: float, j: int) -> float:
    """Limiting share, among mutations in >= j individuals, of those in exactly j.

    Equals 1/(j+1) at p=0 and decreases strictly to 0 as p -> 1.
    """
    if not (isinstance(p, (int, float)) and 0 <= p < 1):
        raise InvalidConfigError("extinction probability must lie in [0, 1)")
    if not isinstance(j, int) or isinstance(j, bool) or j < 1:
        raise InvalidConfigError("multiplicity j must be an integer >= 1")
    if p == 0:
        return 1.0 / (j + 1)
    s_j, s_j1 = _tilted_sum(p, j)
    return 1.0 - s_j1 / s_j


def invert_phi_j(x: float, j: int = 1, tol: float = 1e-10) -> tuple[float, bool]:
    """Solve phi_j(p) = x for p; returns (p_hat, clamped).

    x above the range maximum 1/(j+1) clamps to p_hat = 0 and x = 0 clamps to
    p_hat = 1, mirroring how the estimator extends the inverse beyond the
    attainable range. In-range x is bisected to within tol; monotonicity
    makes the root unique.
    """
    if not (isinstance(x, (int, float)) and 0 <= x <= 1):
        raise InvalidConfigError("observed proportion must lie in [0, 1]")
    if not isinstance(j, int) or isinstance(j, bool) or j < 1:
        raise InvalidConfigError("multiplicity j must be an integer >= 1")
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise InvalidConfigError("tol must be positive")
    if x == 0:
        return 1.0, True
    top = 1.0 / (j + 1)
    if x >= top:
        # at the boundary x == top the root is exactly 0 (not a clamp)
        return 0.0, x > top
    lo, hi = 0.0, P_MAX
    if phi_j(hi, j) >= x:
        # root sits beyond the supported bracket; report the bracket edge
        return hi, False
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi_j(mid, j) > x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), False


def estimate_from_spectrum(sfs: SiteFrequencySpectrum, size_basis, j: int = 1,
                           tol: float = 1e-10) -> EstimateReport:
    """Estimate extinction probability and effective mutation rate from one spectrum.

    The observed share x = S_j / M_j inverts phi_j into p_hat; the total
    mutation count per capita then gives the effective rate via the
    total-mutation limit: M/size times -p_hat/(q_hat log q_hat), reducing to
    M/size at p_hat = 0. A spectrum with S_j = 0 (possible for j >= 2) pins
    p_hat to 1 and raises DegenerateEstimateError carrying the partial
    report, since the rate formula degenerates there.
    """
    if not isinstance(j, int) or isinstance(j, bool) or j < 1:
        raise InvalidConfigError("multiplicity j must be an integer >= 1")
    if not isinstance(size_basis, (FixedSizeBasis, FixedTimeBasis)):
        raise InvalidConfigError(f"unknown size basis: {size_basis!r}")
    summary = summarize(sfs)
    m_j = summary.m_tail(j)
    if m_j == 0:
        raise EmptySpectrumError(f"no mutations at multiplicity >= {j}")
    x = summary.count(j) / m_j
    p_hat, clamped = invert_phi_j(x, j, tol)
    per_capita = summary.m_total / size_basis.effective_size()
    if p_hat >= 1.0:
        raise DegenerateEstimateError(EstimateReport(
            p_hat=1.0, effective_mutation_rate_hat=None, j_used=j,
            x_observed=x, clamped=clamped,
        ))
    if p_hat == 0.0:
        rate = per_capita
    else:
        rate = per_capita * (-p_hat / ((1.0 - p_hat) * math.log1p(-p_hat)))
    return EstimateReport(
        p_hat=p_hat, effective_mutation_rate_hat=rate, j_used=j,
        x_observed=x, clamped=clamped,
    )
