"""Spectrum summaries, cross-replicate aggregation, and file round-trips.

A spectrum is a sparse map {multiplicity j >= 1: number of mutations carried
by exactly j live individuals}; zero entries are omitted. Tumor-like spectra
are heavy at j=1 and thin out fast, so the sparse form is the natural one.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

from .model import InvalidConfigError
from .sim import ReplicateResult

SiteFrequencySpectrum = dict[int, int]


class SpectrumError(Exception):
    """Base class for spectrum-layer failures."""


class EmptySpectrumError(SpectrumError):
    """A summary or estimate was requested from a spectrum with no mutations."""


class NoSurvivorsError(SpectrumError):
    """Aggregation over conditioned replicates received none that survived."""


def validate_spectrum(sfs: SiteFrequencySpectrum) -> None:
    for j, count in sfs.items():
        if not isinstance(j, int) or isinstance(j, bool) or j < 1:
            raise InvalidConfigError(f"spectrum multiplicity {j!r} must be an integer >= 1")
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise InvalidConfigError(
                f"spectrum count {count!r} at multiplicity {j} must be an integer >= 1"
            )


class SpectrumSummary:
    """Total mutation count, tail sums, and the two mutation proportions.

    m_tail(j) counts mutations carried by at least j individuals, so
    m_tail(1) is the total and the tails are nonincreasing in j.
    """

    def __init__(self, sfs: SiteFrequencySpectrum):
        validate_spectrum(sfs)
        if not sfs:
            raise EmptySpectrumError("spectrum has no mutations")
        self._counts = dict(sorted(sfs.items()))
        self._js = list(self._counts)
        # suffix sums over the sparse support, largest j first
        tail = 0
        tails = {}
        for j in reversed(self._js):
            tail += self._counts[j]
            tails[j] = tail
        self._tails = tails
        self.m_total = tail

    def count(self, j: int) -> int:
        return self._counts.get(j, 0)

    def m_tail(self, j: int) -> int:
        """Number of mutations carried by at least j individuals."""
        if j < 1:
            raise InvalidConfigError("multiplicity must be >= 1")
        total = 0
        for jj in self._js:
            if jj >= j:
                total = self._tails[jj]
                break
        return total

    def prop(self, j: int) -> float:
        """Share of all mutations carried by exactly j individuals."""
        return self.count(j) / self.m_total

    def prop_tail(self, j: int) -> float:
        """Share of mutations at multiplicity >= j that sit exactly at j."""
        mj = self.m_tail(j)
        if mj == 0:
            raise EmptySpectrumError(f"no mutations at multiplicity >= {j}")
        return self.count(j) / mj

    def __repr__(self):
        return f"SpectrumSummary({self._counts!r})"


def summarize(sfs: SiteFrequencySpectrum) -> SpectrumSummary:
    return SpectrumSummary(sfs)


@dataclass(frozen=True)
class MeanNormalizedFixedSize:
    """Aggregate spectra stopped at a size threshold, scaled by 1/threshold."""

    threshold: int

    def __post_init__(self):
        if not isinstance(self.threshold, int) or isinstance(self.threshold, bool) \
                or self.threshold < 1:
            raise InvalidConfigError("threshold must be a positive integer")

    def factor(self, result: ReplicateResult) -> float:
        return 1.0 / self.threshold


@dataclass(frozen=True)
class MeanNormalizedFixedTime:
    """Aggregate spectra observed at a fixed time, scaled by e^{-growth_rate * duration}."""

    duration: float
    growth_rate: float

    def __post_init__(self):
        if not (isinstance(self.duration, (int, float)) and math.isfinite(self.duration)
                and self.duration >= 0):
            raise InvalidConfigError("duration must be a finite nonnegative number")
        if not (isinstance(self.growth_rate, (int, float)) and math.isfinite(self.growth_rate)
                and self.growth_rate > 0):
            raise InvalidConfigError("growth_rate must be a finite positive number")

    def factor(self, result: ReplicateResult) -> float:
        return math.exp(-self.growth_rate * self.duration)


@dataclass(frozen=True)
class AggregateRow:
    j: int
    mean: float
    std_error: float | None  # None when a single replicate leaves it undefined
    n_replicates: int


def mean_and_se(values) -> tuple[float, float | None]:
    """Sample mean and standard error (unbiased variance); SE None for n < 2.

    Sums via fsum, so the result is exactly permutation-invariant.
    """
    vals = list(values)
    n = len(vals)
    if n == 0:
        raise InvalidConfigError("cannot average zero values")
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


def aggregate(results: list[ReplicateResult], mode) -> list[AggregateRow]:
    """Per-multiplicity mean and standard error of the normalized spectrum.

    Surviving replicates only; multiplicities absent from a replicate count
    as zero there. Rows come back sorted by multiplicity.
    """
    if not isinstance(mode, (MeanNormalizedFixedSize, MeanNormalizedFixedTime)):
        raise InvalidConfigError(f"unknown aggregation mode: {mode!r}")
    survivors = [r for r in results if r.survived]
    if not survivors:
        raise NoSurvivorsError("no surviving replicates to aggregate")
    js = sorted({j for r in survivors for j in r.sfs})
    n = len(survivors)
    rows = []
    for j in js:
        mean, se = mean_and_se(r.sfs.get(j, 0) * mode.factor(r) for r in survivors)
        rows.append(AggregateRow(j=j, mean=mean, std_error=se, n_replicates=n))
    return rows


def pool_spectra(results: list[ReplicateResult]) -> SiteFrequencySpectrum:
    """Sum the spectra of the surviving replicates into one."""
    survivors = [r for r in results if r.survived]
    if not survivors:
        raise NoSurvivorsError("no surviving replicates to pool")
    pooled: dict[int, int] = {}
    for r in survivors:
        for j, c in r.sfs.items():
            pooled[j] = pooled.get(j, 0) + c
    return dict(sorted(pooled.items()))


# ---------------------------------------------------------------------------
# file round-trips: CSV for people, JSON for machines; floats via repr so
# parse(write(x)) == x exactly


def _fmt(x: float) -> str:
    return repr(float(x))


def spectrum_to_csv(sfs: SiteFrequencySpectrum) -> str:
    validate_spectrum(sfs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "count"])
    for j in sorted(sfs):
        w.writerow([j, sfs[j]])
    return buf.getvalue()


def spectrum_from_csv(text: str) -> SiteFrequencySpectrum:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["j", "count"]:
        raise InvalidConfigError("spectrum CSV must start with header 'j,count'")
    sfs: dict[int, int] = {}
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 2:
            raise InvalidConfigError(f"bad spectrum CSV row: {row!r}")
        j, count = int(row[0]), int(row[1])
        if j in sfs:
            raise InvalidConfigError(f"duplicate multiplicity {j} in spectrum CSV")
        sfs[j] = count
    validate_spectrum(sfs)
    return sfs


def spectrum_to_json(sfs: SiteFrequencySpectrum) -> str:
    validate_spectrum(sfs)
    return json.dumps({str(j): sfs[j] for j in sorted(sfs)}, indent=2) + "\n"


def spectrum_from_json(text: str) -> SiteFrequencySpectrum:
    raw = json.loads(text)
    if not isinstance(raw, dict):
        raise InvalidConfigError("spectrum JSON must be an object of multiplicity -> count")
    sfs = {}
    for k, v in raw.items():
        j = int(k)
        if j in sfs:
            raise InvalidConfigError(f"duplicate multiplicity {j} in spectrum JSON")
        sfs[j] = v
    validate_spectrum(sfs)
    return sfs


def aggregate_to_csv(rows: list[AggregateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "mean", "std_error", "n_replicates"])
    for r in rows:
        se = "" if r.std_error is None else _fmt(r.std_error)
        w.writerow([r.j, _fmt(r.mean), se, r.n_replicates])
    return buf.getvalue()


def aggregate_from_csv(text: str) -> list[AggregateRow]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["j", "mean", "std_error", "n_replicates"]:
        raise InvalidConfigError(
            "aggregate CSV must start with header 'j,mean,std_error,n_replicates'"
        )
    out = []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 4:
            raise InvalidConfigError(f"bad aggregate CSV row: {row!r}")
        out.append(AggregateRow(
            j=int(row[0]),
            mean=float(row[1]),
            std_error=None if row[2] == "" else float(row[2]),
            n_replicates=int(row[3]),
        ))
    return out


def aggregate_to_json(rows: list[AggregateRow]) -> str:
    payload = [
        {"j": r.j, "mean": r.mean, "std_error": r.std_error, "n_replicates": r.n_replicates}
        for r in rows
    ]
    return json.dumps(payload, indent=2) + "\n"


def aggregate_from_json(text: str) -> list[AggregateRow]:
    raw = json.loads(text)
    return [
        AggregateRow(j=int(r["j"]), mean=float(r["mean"]),
                     std_error=None if r["std_error"] is None else float(r["std_error"]),
                     n_replicates=int(r["n_replicates"]))
        for r in raw
    ]
