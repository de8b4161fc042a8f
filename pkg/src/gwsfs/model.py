"""Model parameters for a branching population with neutral mutations.

The population model: each individual lives an Exponential(lifetime_rate)
lifetime and on death is replaced by k offspring with probability
``offspring[k]``; independently, each individual acquires novel mutations at
rate ``mutation_rate``. Mutations never recur and never affect the dynamics.

This module validates parameters and derives the quantities the rest of the
package needs: mean offspring number, Malthusian growth rate, and the
extinction probability (the smallest fixed point of the offspring
probability generating function on [0, 1]).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import yaml

__all__ = [
    "ModelError",
    "NotNormalizedError",
    "NonPositiveRateError",
    "SubcriticalError",
    "NoConvergenceError",
    "InvalidConfigError",
    "OffspringDistribution",
    "ModelParams",
    "DerivedQuantities",
    "validate_params",
    "extinction_probability",
    "derive",
    "parse_model_config",
    "load_model_config",
]

#: Probability vectors must sum to 1 within this.
NORMALIZATION_TOL = 1e-12


class ModelError(ValueError):
    """Base class for model parameter errors."""


class NotNormalizedError(ModelError):
    """Offspring probabilities are not a probability vector."""


class NonPositiveRateError(ModelError):
    """A rate parameter that must be strictly positive is not."""


class SubcriticalError(ModelError):
    """Mean offspring number is not greater than 1."""


class NoConvergenceError(ModelError):
    """Root bracketing or bisection failed to converge."""


class InvalidConfigError(ModelError):
    """A config file is malformed or missing required keys."""


@dataclass(frozen=True)
class OffspringDistribution:
    """Offspring counts distribution with finite support.

    ``probs[k]`` is the probability that a dying individual leaves k
    offspring. Trailing zeros are trimmed so ``max_offspring`` is the true
    top of the support.
    """

    probs: tuple[float, ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> "OffspringDistribution":
        """Build from a sparse {k: probability} mapping."""
        if not mapping:
            raise NotNormalizedError("offspring distribution is empty")
        ks = list(mapping.keys())
        for k in ks:
            if not isinstance(k, int) or isinstance(k, bool) or k < 0:
                raise NotNormalizedError(f"offspring count must be a nonnegative integer, got {k!r}")
        top = max(ks)
        probs = [0.0] * (top + 1)
        for k, v in mapping.items():
            probs[k] = float(v)
        return cls(tuple(probs))

    def __post_init__(self) -> None:
        probs = tuple(float(v) for v in self.probs)
        while len(probs) > 1 and probs[-1] == 0.0:
            probs = probs[:-1]
        object.__setattr__(self, "probs", probs)

    @property
    def max_offspring(self) -> int:
        return len(self.probs) - 1

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, u in enumerate(self.probs) if u > 0.0)

    def is_binary_fission(self) -> bool:
        """True when the support is contained in {0, 2} (birth-death case)."""
        return all(k in (0, 2) for k in self.support)

    def mean(self) -> float:
        return math.fsum(k * u for k, u in enumerate(self.probs))

    def pgf(self, s: float) -> float:
        """Probability generating function, evaluated by Horner's rule."""
        acc = 0.0
        for u in reversed(self.probs):
            acc = acc * s + u
        return acc

    def cdf(self) -> tuple[float, ...]:
        """Cumulative probabilities, used by the samplers."""
        out = []
        acc = 0.0
        for u in self.probs:
            acc += u
            out.append(acc)
        out[-1] = 1.0
        return tuple(out)


@dataclass(frozen=True)
class ModelParams:
    """Full parameterization of the mutating branching population."""

    lifetime_rate: float
    mutation_rate: float
    offspring: OffspringDistribution


@dataclass(frozen=True)
class DerivedQuantities:
    """Quantities derived from ModelParams.

    mean_offspring: expected offspring number per death.
    growth_rate: Malthusian parameter, lifetime_rate * (mean_offspring - 1).
    extinction_prob: probability the population ever dies out.
    survival_prob: 1 - extinction_prob.
    """

    mean_offspring: float
    growth_rate: float
    extinction_prob: float
    survival_prob: float


def validate_params(params: ModelParams) -> None:
    """Raise a ModelError subclass if the parameters are unusable.

    Checks: rates strictly positive, offspring probabilities in [0, 1]
    summing to 1 within 1e-12, and mean offspring number > 1 (the package
    only treats growing populations).
    """
    if not (params.lifetime_rate > 0.0) or math.isinf(params.lifetime_rate):
        raise NonPositiveRateError(f"lifetime_rate must be positive and finite, got {params.lifetime_rate}")
    if not (params.mutation_rate > 0.0) or math.isinf(params.mutation_rate):
        raise NonPositiveRateError(f"mutation_rate must be positive and finite, got {params.mutation_rate}")
    probs = params.offspring.probs
    for k, u in enumerate(probs):
        if not (0.0 <= u <= 1.0) or math.isnan(u):
            raise NotNormalizedError(f"offspring[{k}] = {u} is not in [0, 1]")
    total = math.fsum(probs)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalizedError(f"offspring probabilities sum to {total!r}, not 1")
    m = params.offspring.mean()
    if not m > 1.0:
        raise SubcriticalError(f"mean offspring number {m} is not > 1; only growing populations are supported")


def extinction_probability(offspring: OffspringDistribution, tol: float = 1e-12) -> float:
    """Smallest fixed point of the offspring PGF on [0, 1].

    For binary fission the root is probs[0] / probs[2] exactly. Otherwise
    bisection on [0, 1 - tol]: the PGF is convex with f(0) = probs[0] and,
    for a supercritical distribution, f(s) < s just left of 1, so the sign
    change brackets the smallest root.
    """
    if not (tol > 0.0):
        raise NoConvergenceError(f"tol must be positive, got {tol}")
    probs = offspring.probs
    if probs[0] == 0.0:
        return 0.0
    if offspring.is_binary_fission():
        return probs[0] / probs[2]
    lo, hi = 0.0, 1.0 - tol
    g_lo = offspring.pgf(lo) - lo
    g_hi = offspring.pgf(hi) - hi
    if g_lo <= 0.0 or g_hi >= 0.0:
        raise NoConvergenceError(
            "failed to bracket the extinction probability; the root is within "
            f"tol={tol} of 1 (mean offspring barely exceeds 1?)"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid == lo or mid == hi:
            return mid
        if offspring.pgf(mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    raise NoConvergenceError(f"bisection budget exhausted; tol={tol} is below float resolution here")


def derive(params: ModelParams, tol: float = 1e-12) -> DerivedQuantities:
    """Validate and compute the derived quantities."""
    validate_params(params)
    m = params.offspring.mean()
    growth = params.lifetime_rate * (m - 1.0)
    p = extinction_probability(params.offspring, tol=tol)
    return DerivedQuantities(
        mean_offspring=m,
        growth_rate=growth,
        extinction_prob=p,
        survival_prob=1.0 - p,
    )


def _as_number(value: object, context: str) -> float:
    """Accept decimals, integers, or fraction strings like '1/3'."""
    if isinstance(value, bool):
        raise InvalidConfigError(f"{context}: booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidConfigError(f"{context}: cannot parse {value!r} as a number or fraction") from exc
    raise InvalidConfigError(f"{context}: unsupported value {value!r}")


def parse_model_config(config: Mapping[str, object]) -> ModelParams:
    """Extract ModelParams from a parsed config mapping.

    Required keys: lifetime_rate, mutation_rate, offspring (a mapping from
    offspring count to probability; counts may be integers or integer
    strings, probabilities may be decimals or fraction strings). Extra keys
    are ignored so run-level settings can live in the same file.
    """
    if not isinstance(config, Mapping):
        raise InvalidConfigError(f"config root must be a mapping, got {type(config).__name__}")
    missing = [key for key in ("lifetime_rate", "mutation_rate", "offspring") if key not in config]
    if missing:
        raise InvalidConfigError(f"config is missing required keys: {', '.join(missing)}")
    offspring_raw = config["offspring"]
    if not isinstance(offspring_raw, Mapping) or not offspring_raw:
        raise InvalidConfigError("offspring must be a nonempty mapping of count -> probability")
    mapping: dict[int, float] = {}
    for k, v in offspring_raw.items():
        try:
            count = int(k)
        except (TypeError, ValueError) as exc:
            raise InvalidConfigError(f"offspring count {k!r} is not an integer") from exc
        if count < 0 or (isinstance(k, float) and k != count):
            raise InvalidConfigError(f"offspring count {k!r} is not a nonnegative integer")
        if count in mapping:
            raise InvalidConfigError(f"offspring count {count} appears twice")
        mapping[count] = _as_number(v, f"offspring[{count}]")
    params = ModelParams(
        lifetime_rate=_as_number(config["lifetime_rate"], "lifetime_rate"),
        mutation_rate=_as_number(config["mutation_rate"], "mutation_rate"),
        offspring=OffspringDistribution.from_mapping(mapping),
    )
    validate_params(params)
    return params


def load_model_config(path: str | Path) -> ModelParams:
    """Load ModelParams from a YAML or JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            config = json.loads(text)
        else:
            config = yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"cannot parse config file {path}: {exc}") from exc
    if config is None:
        raise InvalidConfigError(f"config file {path} is empty")
    return parse_model_config(config)
