"""Exact stochastic simulation of the branching population with mutations.

Two engines share one randomness contract. ``run`` drives the compiled event
loop in ``gwsfs._kernel``; ``run_reference`` drives the pure-Python
``PopulationState`` step by step. Given the same seed they consume the
generator stream identically and produce bit-identical results, which is what
the cross-engine tests lean on.

Each individual carries a genotype: the set of mutations on its line of
descent. Under the infinite-sites assumption every mutation event creates a
brand-new site, so genotypes form a tree rooted at the founder. The site
frequency spectrum reported per replicate counts, for each multiplicity j,
the mutations carried by exactly j live individuals at the stop state.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from . import _kernel
from .model import DerivedQuantities, InvalidConfigError, ModelParams, derive

_MASK64 = (1 << 64) - 1


class SimulationError(Exception):
    """Base class for simulation-layer failures."""


class EmptyPopulationError(SimulationError):
    """An event was requested from a population with no live individuals."""


class NotInstrumentedError(SimulationError):
    """Decomposition counters were requested from an uninstrumented run."""


class StopReason(Enum):
    REACHED_TIME = "reached_time"
    REACHED_SIZE = "reached_size"
    EXTINCT = "extinct"


_STATUS_TO_REASON = {
    _kernel.STATUS_REACHED_TIME: StopReason.REACHED_TIME,
    _kernel.STATUS_REACHED_SIZE: StopReason.REACHED_SIZE,
    _kernel.STATUS_EXTINCT: StopReason.EXTINCT,
}


@dataclass(frozen=True)
class FixedTime:
    """Stop once the simulation clock reaches ``duration``."""

    duration: float

    def __post_init__(self):
        if not (isinstance(self.duration, (int, float)) and math.isfinite(self.duration)):
            raise InvalidConfigError("stop duration must be a finite number")
        if self.duration < 0:
            raise InvalidConfigError("stop duration must be nonnegative")


@dataclass(frozen=True)
class FixedSize:
    """Stop at the first event that brings the population to >= ``threshold``."""

    threshold: int

    def __post_init__(self):
        if not isinstance(self.threshold, int) or isinstance(self.threshold, bool):
            raise InvalidConfigError("stop threshold must be an integer")
        if self.threshold < 1:
            raise InvalidConfigError("stop threshold must be at least 1")


@dataclass(frozen=True)
class SimOptions:
    """Per-run switches.

    instrument: multiplicities whose enter/exit counters are maintained
        (turns on the clone-size bookkeeping; empty tuple disables it).
    y_extension: extra time to run the population-size process past the
        stop, sharpening the growth-normalized size estimate. Mutations in
        the extension window are unobservable at the stop state and neutral,
        so only demographic events are simulated there.
    """

    instrument: tuple[int, ...] = ()
    y_extension: float = 0.0

    def __post_init__(self):
        for j in self.instrument:
            if not isinstance(j, int) or isinstance(j, bool) or j < 1:
                raise InvalidConfigError("instrumented multiplicities must be positive integers")
        if len(set(self.instrument)) != len(self.instrument):
            raise InvalidConfigError("instrumented multiplicities must be distinct")
        if not (
            isinstance(self.y_extension, (int, float))
            and math.isfinite(self.y_extension)
            and self.y_extension >= 0
        ):
            raise InvalidConfigError("y_extension must be a finite nonnegative number")


@dataclass(frozen=True)
class CloneCounter:
    """How many clones ever entered and left one tracked multiplicity."""

    enters: int
    exits: int


@dataclass(frozen=True)
class ReplicateResult:
    stop_reason: StopReason
    final_time: float
    final_pop: int
    sfs: dict[int, int]
    total_mutations: int
    y_hat: float
    tau_n: float | None
    t_n_hat: float | None
    counters: dict[int, CloneCounter] | None
    seed: int
    index: int | None = None

    @property
    def survived(self) -> bool:
        return self.stop_reason is not StopReason.EXTINCT


def replicate_seed(master_seed: int, index: int) -> int:
    """Derive the per-replicate generator seed from a master seed.

    splitmix64 of master_seed + (index + 1) * golden-ratio increment; the
    mixing keeps nearby (seed, index) pairs statistically unrelated while
    staying reproducible across platforms.
    """
    if not isinstance(master_seed, int) or isinstance(master_seed, bool) or master_seed < 0:
        raise InvalidConfigError("master seed must be a nonnegative integer")
    if not isinstance(index, int) or isinstance(index, bool) or index < 0:
        raise InvalidConfigError("replicate index must be a nonnegative integer")
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@lru_cache(maxsize=None)
def _derived(params: ModelParams) -> DerivedQuantities:
    return derive(params)


def _check_seed(seed):
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise InvalidConfigError("seed must be a nonnegative integer")


def _stop_args(stop):
    if isinstance(stop, FixedTime):
        return _kernel.STOP_FIXED_TIME, float(stop.duration), 0
    if isinstance(stop, FixedSize):
        return _kernel.STOP_FIXED_SIZE, 0.0, stop.threshold
    raise InvalidConfigError(f"unknown stop rule: {stop!r}")


def _assemble(params, stop, opts, seed, index, status, stop_t, stop_z, end_t, end_z, sfs,
              enters, exits):
    d = _derived(params)
    reason = _STATUS_TO_REASON[status]
    y_hat = math.exp(-d.growth_rate * end_t) * end_z
    tau_n = None
    t_n_hat = None
    if reason is StopReason.REACHED_SIZE:
        tau_n = stop_t
        if y_hat > 0:
            t_n_hat = math.log(stop.threshold / y_hat) / d.growth_rate
    counters = None
    if opts.instrument:
        counters = {
            j: CloneCounter(enters=int(enters[i]), exits=int(exits[i]))
            for i, j in enumerate(opts.instrument)
        }
    return ReplicateResult(
        stop_reason=reason,
        final_time=stop_t,
        final_pop=int(stop_z),
        sfs=sfs,
        total_mutations=sum(sfs.values()),
        y_hat=y_hat,
        tau_n=tau_n,
        t_n_hat=t_n_hat,
        counters=counters,
        seed=seed,
        index=index,
    )


def _sizes_to_sfs(sizes) -> dict[int, int]:
    # node 0 is the founder genotype, not a mutation
    muts = sizes[1:]
    muts = muts[muts > 0]
    if muts.size == 0:
        return {}
    vals, counts = np.unique(muts, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def run(params: ModelParams, stop, opts: SimOptions = SimOptions(), *, seed: int = 0,
        index: int | None = None) -> ReplicateResult:
    """Simulate one replicate with the compiled engine."""
    d = _derived(params)
    _check_seed(seed)
    stop_kind, stop_time, stop_size = _stop_args(stop)
    tracked = np.asarray(sorted(opts.instrument), dtype=np.int64)
    cdf = np.asarray(params.offspring.cdf(), dtype=np.float64)
    rng = np.random.default_rng(seed)
    (status, stop_t, stop_z, end_t, end_z, n_nodes, _n_events,
     parent, live, depth, enters, exits) = _kernel.simulate_kernel(
        rng, cdf, params.lifetime_rate, params.mutation_rate, d.growth_rate,
        stop_kind, stop_time, stop_size, float(opts.y_extension), tracked,
    )
    sizes = _kernel.clone_sizes(parent, live, depth, n_nodes, not opts.instrument)
    sfs = _sizes_to_sfs(sizes)
    return _assemble(params, stop, opts, seed, index, status, stop_t, stop_z,
                     end_t, end_z, sfs, enters, exits)


def run_batch(params: ModelParams, stop, n_replicates: int,
              opts: SimOptions = SimOptions(), *, master_seed: int = 0,
              workers: int = 1) -> list[ReplicateResult]:
    """Simulate independent replicates; replicate i uses replicate_seed(master_seed, i).

    Output is ordered by replicate index and does not depend on the worker
    count, only on the master seed.
    """
    if not isinstance(n_replicates, int) or isinstance(n_replicates, bool) or n_replicates < 1:
        raise InvalidConfigError("n_replicates must be a positive integer")
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise InvalidConfigError("workers must be a positive integer")
    _check_seed(master_seed)
    _derived(params)  # validate once up front

    def one(i: int) -> ReplicateResult:
        return run(params, stop, opts, seed=replicate_seed(master_seed, i), index=i)

    if workers == 1:
        return [one(i) for i in range(n_replicates)]
    results: list[ReplicateResult | None] = [None] * n_replicates
    # the compiled kernel releases the GIL, so threads are enough
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i, res in zip(range(n_replicates), pool.map(one, range(n_replicates))):
            results[i] = res
    return results  # type: ignore[return-value]


class PopulationState:
    """Pure-Python reference engine over the same arena layout as the kernel.

    Exists for two jobs: validating the compiled engine draw-for-draw, and
    letting tests apply forced events to hand-built configurations. Slow by
    design; use ``run`` for real workloads.
    """

    def __init__(self, params: ModelParams, rng: np.random.Generator,
                 instrument: tuple[int, ...] = ()):
        self._derived = _derived(params)
        self.params = params
        self._rng = rng
        self._a = params.lifetime_rate
        self._nu = params.mutation_rate
        self._p_demo = self._a / (self._a + self._nu)
        self._cdf = np.asarray(params.offspring.cdf(), dtype=np.float64)
        self.instrument = tuple(sorted(instrument))
        self._tracked = np.asarray(self.instrument, dtype=np.int64)
        self._instrumented = bool(self.instrument)

        cap = 16
        self._cap = cap
        self.parent = np.empty(cap, np.int64)
        self.live = np.zeros(cap, np.int64)
        self.depth = np.zeros(cap, np.int64)
        aux = cap if self._instrumented else 1
        self._csize = np.zeros(aux, np.int64)
        self._free_stack = np.empty(aux, np.int64)
        self._free_top = 0
        self._tree = np.zeros(cap + 1, np.int64)
        self.enters = np.zeros(len(self.instrument), np.int64)
        self.exits = np.zeros(len(self.instrument), np.int64)

        self.parent[0] = -1
        self.live[0] = 1
        self.depth[0] = 0
        if self._instrumented:
            self._csize[0] = 1
        _kernel.fenwick_add(self._tree, 0, 1)
        self.n_nodes = 1
        self.population_size = 1
        self.time = 0.0
        self.n_events = 0

    def genotype_at(self, target: int) -> int:
        """Genotype of the target-th live individual in node-index order."""
        if not 0 <= target < self.population_size:
            raise ValueError("individual index out of range")
        return int(_kernel.fenwick_find(self._tree, target))

    def live_counts(self) -> dict[int, int]:
        return {
            int(i): int(self.live[i])
            for i in range(self.n_nodes)
            if self.live[i] > 0
        }

    def clone_size(self, node: int) -> int:
        if not self._instrumented:
            raise NotInstrumentedError("clone sizes are cached only on instrumented runs")
        return int(self._csize[node])

    def _grow(self):
        new_cap = self._cap * 2
        for name in ("parent", "live", "depth"):
            arr = getattr(self, name)
            new = np.zeros(new_cap, np.int64)
            new[: self._cap] = arr
            setattr(self, name, new)
        if self._instrumented:
            new_csize = np.zeros(new_cap, np.int64)
            new_csize[: self._cap] = self._csize
            self._csize = new_csize
            new_free = np.empty(new_cap, np.int64)
            new_free[: self._cap] = self._free_stack
            self._free_stack = new_free
        self._tree = np.zeros(new_cap + 1, np.int64)
        _kernel.fenwick_build(self.live, self.n_nodes, self._tree)
        self._cap = new_cap

    def apply_demographic(self, genotype: int, n_offspring: int) -> None:
        """Replace one individual of the given genotype by n_offspring copies."""
        if self.live[genotype] < 1:
            raise ValueError(f"genotype {genotype} has no live individuals")
        if not isinstance(n_offspring, int) or n_offspring < 0:
            raise ValueError("offspring count must be a nonnegative integer")
        d = n_offspring - 1
        if d == 0:
            return
        self.live[genotype] += d
        _kernel.fenwick_add(self._tree, genotype, d)
        self.population_size += d
        if self._instrumented:
            self._free_top = _kernel._record_size_change(
                self._csize, self.parent, self._tracked, self.enters, self.exits,
                self._free_stack, self._free_top, genotype, d,
            )

    def apply_mutation(self, genotype: int) -> int:
        """Give one individual of the given genotype a novel mutation."""
        if self.live[genotype] < 1:
            raise ValueError(f"genotype {genotype} has no live individuals")
        if self._free_top > 0:
            self._free_top -= 1
            c = int(self._free_stack[self._free_top])
        else:
            if self.n_nodes == self._cap:
                self._grow()
            c = self.n_nodes
            self.n_nodes += 1
        self.parent[c] = genotype
        self.live[c] = 1
        self.depth[c] = self.depth[genotype] + 1
        self.live[genotype] -= 1
        _kernel.fenwick_add(self._tree, c, 1)
        _kernel.fenwick_add(self._tree, genotype, -1)
        if self._instrumented:
            self._csize[c] = 1
            for i, j in enumerate(self.instrument):
                if j == 1:
                    self.enters[i] += 1
        return c

    def step(self, time_limit: float | None = None):
        """Draw and apply one event; mirrors the compiled loop draw-for-draw.

        Returns ("demographic", genotype, n_offspring) or
        ("mutation", genotype, new_node), or None when the waiting time would
        cross time_limit (the clock is then advanced exactly to the limit).
        """
        z = self.population_size
        if z == 0:
            raise EmptyPopulationError("no live individuals to draw an event for")
        dt = -math.log1p(-self._rng.random()) / (z * (self._a + self._nu))
        if time_limit is not None and self.time + dt > time_limit:
            self.time = time_limit
            return None
        self.time += dt
        self.n_events += 1
        is_demo = self._rng.random() < self._p_demo
        g = self.genotype_at(int(self._rng.random() * z))
        if is_demo:
            u = self._rng.random()
            k = 0
            while self._cdf[k] <= u:
                k += 1
            self.apply_demographic(g, int(k))
            return ("demographic", g, int(k))
        c = self.apply_mutation(g)
        return ("mutation", g, c)

    @property
    def ever_reused(self) -> bool:
        return self._instrumented


def snapshot_sfs(state: PopulationState) -> dict[int, int]:
    """Site frequency spectrum of the state: multiplicity -> mutation count."""
    sizes = _kernel.clone_sizes(
        state.parent, state.live, state.depth, state.n_nodes, not state.ever_reused
    )
    return _sizes_to_sfs(sizes)


def run_reference(params: ModelParams, stop, opts: SimOptions = SimOptions(), *,
                  seed: int = 0, index: int | None = None) -> ReplicateResult:
    """Pure-Python twin of ``run``: same seed, same draws, same result."""
    d = _derived(params)
    _check_seed(seed)
    _stop_args(stop)  # validate the rule shape
    rng = np.random.default_rng(seed)
    state = PopulationState(params, rng, instrument=tuple(sorted(opts.instrument)))

    status = None
    if isinstance(stop, FixedSize) and state.population_size >= stop.threshold:
        status = _kernel.STATUS_REACHED_SIZE
    while status is None:
        if state.population_size == 0:
            status = _kernel.STATUS_EXTINCT
            break
        if isinstance(stop, FixedTime):
            ev = state.step(time_limit=stop.duration)
            if ev is None:
                status = _kernel.STATUS_REACHED_TIME
                break
        else:
            ev = state.step()
            if ev[0] == "demographic" and state.population_size >= stop.threshold:
                status = _kernel.STATUS_REACHED_SIZE
                break

    stop_t = state.time
    stop_z = state.population_size
    end_t = stop_t
    end_z = stop_z
    if status != _kernel.STATUS_EXTINCT and opts.y_extension > 0.0 and stop_z > 0:
        end_t = stop_t + opts.y_extension
        tt = stop_t
        zz = stop_z
        cdf = state._cdf
        while zz > 0:
            dt = -math.log1p(-rng.random()) / (params.lifetime_rate * zz)
            if tt + dt > end_t:
                break
            tt += dt
            u = rng.random()
            k = 0
            while cdf[k] <= u:
                k += 1
            zz += k - 1
        end_z = zz

    return _assemble(params, stop, opts, seed, index, status, stop_t, stop_z,
                     end_t, end_z, snapshot_sfs(state), state.enters, state.exits)


def verify_decomposition(result: ReplicateResult) -> dict[int, bool]:
    """Check enters - exits == spectrum count for every instrumented multiplicity."""
    if result.counters is None:
        raise NotInstrumentedError("run with SimOptions(instrument=...) to collect counters")
    return {
        j: (c.enters - c.exits) == result.sfs.get(j, 0)
        for j, c in result.counters.items()
    }
