import math

import numpy as np
import pytest
from scipy import stats

from gwsfs.model import InvalidConfigError, ModelParams, OffspringDistribution
from gwsfs.sim import (
    EmptyPopulationError,
    FixedSize,
    FixedTime,
    NotInstrumentedError,
    PopulationState,
    ReplicateResult,
    SimOptions,
    StopReason,
    replicate_seed,
    run,
    run_batch,
    run_reference,
    snapshot_sfs,
    verify_decomposition,
)

from oracles import SEED_DERIVATION_VECTORS, state_ancestor_walk_sfs, ancestor_walk_sfs


def make_params(offspring, rate=1.0, nu=1.0):
    return ModelParams(
        lifetime_rate=rate,
        mutation_rate=nu,
        offspring=OffspringDistribution.from_mapping(offspring),
    )


BD = make_params({0: 0.25, 2: 0.75})
PURE_FISSION = make_params({2: 1.0})
GENERAL = make_params({0: 0.2, 1: 0.3, 2: 0.5})


class TestSeedDerivation:
    def test_frozen_vectors(self):
        for master, index, expected in SEED_DERIVATION_VECTORS:
            assert replicate_seed(master, index) == expected

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidConfigError):
            replicate_seed(-1, 0)
        with pytest.raises(InvalidConfigError):
            replicate_seed(0, -1)
        with pytest.raises(InvalidConfigError):
            replicate_seed(True, 0)

    def test_no_collisions_in_block(self):
        seeds = {replicate_seed(7, i) for i in range(10_000)}
        assert len(seeds) == 10_000


class TestStopRules:
    def test_fixed_time_validation(self):
        with pytest.raises(InvalidConfigError):
            FixedTime(-1.0)
        with pytest.raises(InvalidConfigError):
            FixedTime(math.inf)

    def test_fixed_size_validation(self):
        with pytest.raises(InvalidConfigError):
            FixedSize(0)
        with pytest.raises(InvalidConfigError):
            FixedSize(2.5)

    def test_options_validation(self):
        with pytest.raises(InvalidConfigError):
            SimOptions(instrument=(0,))
        with pytest.raises(InvalidConfigError):
            SimOptions(instrument=(2, 2))
        with pytest.raises(InvalidConfigError):
            SimOptions(y_extension=-1.0)


class TestForcedEvents:
    """Drive the reference engine by hand and check every bookkeeping path."""

    def make_state(self, instrument=(1, 2)):
        return PopulationState(BD, np.random.default_rng(0), instrument=instrument)

    def test_hand_traced_scenario(self):
        st = self.make_state()
        # founder mutates: its individual moves to a new genotype of depth 1
        n1 = st.apply_mutation(0)
        assert n1 == 1
        assert st.live_counts() == {1: 1}
        assert snapshot_sfs(st) == {1: 1}

        # that individual splits in two
        st.apply_demographic(1, 2)
        assert st.population_size == 2
        assert snapshot_sfs(st) == {2: 1}

        # one of the pair mutates: the old mutation keeps both carriers,
        # the nested one starts with a single carrier
        n2 = st.apply_mutation(1)
        assert n2 == 2
        assert st.live_counts() == {1: 1, 2: 1}
        assert snapshot_sfs(st) == {1: 1, 2: 1}
        assert st.clone_size(1) == 2  # both live individuals carry mutation 1
        assert st.clone_size(2) == 1

        # the fresh mutant dies; its genotype slot empties out
        st.apply_demographic(2, 0)
        assert st.population_size == 1
        assert snapshot_sfs(st) == {1: 1}
        assert st.clone_size(2) == 0

        # next mutation reuses the freed slot
        n3 = st.apply_mutation(1)
        assert n3 == 2
        assert st.live_counts() == {2: 1}
        assert snapshot_sfs(st) == {1: 2}
        assert state_ancestor_walk_sfs(st) == {1: 2}

        # counter ledger for the whole history, tracked multiplicities (1, 2)
        assert st.enters.tolist() == [4, 1]
        assert st.exits.tolist() == [2, 1]
        # net counts equal the final spectrum
        assert st.enters[0] - st.exits[0] == 2
        assert st.enters[1] - st.exits[1] == 0

    def test_depth_tracks_mutation_chain(self):
        st = self.make_state()
        a = st.apply_mutation(0)
        b = st.apply_mutation(a)
        c = st.apply_mutation(b)
        assert st.depth[c] == 3
        # one individual carrying three nested mutations
        assert snapshot_sfs(st) == {1: 3}

    def test_apply_to_dead_genotype_rejected(self):
        st = self.make_state()
        st.apply_mutation(0)
        with pytest.raises(ValueError):
            st.apply_demographic(0, 2)
        with pytest.raises(ValueError):
            st.apply_mutation(0)

    def test_single_child_event_is_noop(self):
        st = self.make_state()
        st.apply_demographic(0, 1)
        assert st.population_size == 1
        assert st.live_counts() == {0: 1}

    def test_empty_population_raises(self):
        st = self.make_state()
        st.apply_demographic(0, 0)
        assert st.population_size == 0
        with pytest.raises(EmptyPopulationError):
            st.step()

    def test_genotype_at_index_ordering(self):
        st = self.make_state()
        st.apply_demographic(0, 2)
        n1 = st.apply_mutation(0)
        # live: node0 x1, node1 x1, in index order
        assert st.genotype_at(0) == 0
        assert st.genotype_at(1) == n1
        with pytest.raises(ValueError):
            st.genotype_at(2)

    def test_clone_size_needs_instrumentation(self):
        st = PopulationState(BD, np.random.default_rng(0))
        with pytest.raises(NotInstrumentedError):
            st.clone_size(0)

    def test_arena_growth_preserves_state(self):
        st = self.make_state(instrument=())
        g = 0
        for _ in range(50):  # push past the initial capacity of 16
            g = st.apply_mutation(g)
        assert st.n_nodes == 51
        assert st.population_size == 1
        assert snapshot_sfs(st) == {1: 50}
        assert state_ancestor_walk_sfs(st) == {1: 50}


class TestRunSemantics:
    def test_fixed_time_zero(self):
        r = run(BD, FixedTime(0.0), seed=5)
        assert r.stop_reason is StopReason.REACHED_TIME
        assert r.final_time == 0.0
        assert r.final_pop == 1
        assert r.sfs == {}
        assert r.tau_n is None

    def test_fixed_size_already_met(self):
        r = run(BD, FixedSize(1), seed=5)
        assert r.stop_reason is StopReason.REACHED_SIZE
        assert r.final_time == 0.0
        assert r.final_pop == 1
        assert r.tau_n == 0.0
        assert r.t_n_hat == 0.0  # y_hat is exactly 1 here

    def test_binary_fission_never_overshoots(self):
        for seed in range(30):
            r = run(BD, FixedSize(100), seed=seed)
            if r.survived:
                assert r.final_pop == 100

    def test_general_overshoot_bounded(self):
        params = make_params({0: 0.3, 3: 0.7})
        seen = set()
        for seed in range(30):
            r = run(params, FixedSize(100), seed=seed)
            if r.survived:
                assert 100 <= r.final_pop <= 102  # at most max_offspring - 1 over
                seen.add(r.final_pop)
        assert 100 in seen

    def test_extinction_shape(self):
        params = make_params({0: 0.45, 2: 0.55})
        extinct = None
        for seed in range(200):
            r = run(params, FixedSize(50), seed=seed)
            if not r.survived:
                extinct = r
                break
        assert extinct is not None, "no extinction in 200 tries at p=9/11?"
        assert extinct.stop_reason is StopReason.EXTINCT
        assert extinct.final_pop == 0
        assert extinct.y_hat == 0.0
        assert extinct.sfs == {}
        assert extinct.total_mutations == 0
        assert extinct.tau_n is None
        assert extinct.t_n_hat is None

    def test_determinism(self):
        a = run(BD, FixedSize(200), SimOptions(instrument=(1, 2)), seed=99)
        b = run(BD, FixedSize(200), SimOptions(instrument=(1, 2)), seed=99)
        assert a == b

    def test_extension_changes_only_growth_estimate(self):
        base = run(BD, FixedSize(150), seed=12)
        ext = run(BD, FixedSize(150), SimOptions(y_extension=2.0), seed=12)
        assert base.survived
        assert ext.stop_reason == base.stop_reason
        assert ext.final_time == base.final_time
        assert ext.final_pop == base.final_pop
        assert ext.sfs == base.sfs
        assert ext.tau_n == base.tau_n
        assert ext.y_hat != base.y_hat  # generic: 2 time units of extra growth

    def test_hitting_time_relation(self):
        r = run(BD, FixedSize(500), SimOptions(y_extension=2.0), seed=3)
        assert r.survived
        # t_n_hat = log(N / y_hat) / growth, by definition
        want = math.log(500 / r.y_hat) / 0.5
        assert math.isclose(r.t_n_hat, want, rel_tol=1e-12)
        assert abs(r.tau_n - r.t_n_hat) < 2.0  # same order, loose sanity band

    def test_total_mutations_consistent(self):
        r = run(BD, FixedSize(300), seed=21)
        assert r.total_mutations == sum(r.sfs.values())

    def test_counters_present_only_when_instrumented(self):
        plain = run(BD, FixedSize(50), seed=1)
        assert plain.counters is None
        with pytest.raises(NotInstrumentedError):
            verify_decomposition(plain)
        inst = run(BD, FixedSize(50), SimOptions(instrument=(1, 3)), seed=1)
        assert set(inst.counters) == {1, 3}

    def test_decomposition_identity(self):
        opts = SimOptions(instrument=(1, 2, 3))
        for seed in range(25):
            r = run(BD, FixedSize(120), opts, seed=seed)
            assert all(verify_decomposition(r).values())
        for seed in range(25):
            r = run(GENERAL, FixedTime(8.0), opts, seed=seed)
            assert all(verify_decomposition(r).values())


class TestEngineParity:
    @pytest.mark.parametrize("params", [BD, GENERAL], ids=["bd", "general"])
    @pytest.mark.parametrize(
        "stop", [FixedSize(60), FixedTime(3.0)], ids=["size", "time"]
    )
    @pytest.mark.parametrize(
        "opts",
        [SimOptions(), SimOptions(instrument=(1, 2), y_extension=1.5)],
        ids=["plain", "instrumented"],
    )
    def test_bit_identical(self, params, stop, opts):
        for seed in range(6):
            a = run(params, stop, opts, seed=seed)
            b = run_reference(params, stop, opts, seed=seed)
            assert a == b, f"engines disagree at seed {seed}"


class TestSpectrumAgainstBruteForce:
    def test_compiled_engine_matches_ancestor_walk(self):
        from gwsfs import _kernel

        for seed in range(20):
            params = BD if seed % 2 == 0 else GENERAL
            cdf = np.asarray(params.offspring.cdf(), dtype=np.float64)
            rng = np.random.default_rng(seed)
            from gwsfs.sim import _derived

            d = _derived(params)
            out = _kernel.simulate_kernel(
                rng, cdf, params.lifetime_rate, params.mutation_rate,
                d.growth_rate, _kernel.STOP_FIXED_SIZE, 0.0, 120, 0.0,
                np.zeros(0, dtype=np.int64),
            )
            status, n_nodes = out[0], out[5]
            parent, live, depth = out[7], out[8], out[9]
            want = ancestor_walk_sfs(parent, live, depth, n_nodes)
            got = run(params, FixedSize(120), seed=seed).sfs
            assert got == want

    def test_reference_engine_matches_ancestor_walk(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            st = PopulationState(GENERAL, rng, instrument=(1,))
            while st.population_size and st.population_size < 80:
                st.step()
            assert snapshot_sfs(st) == state_ancestor_walk_sfs(st)


class TestBatch:
    def test_order_and_seeds(self):
        batch = run_batch(BD, FixedSize(40), 8, master_seed=123)
        assert [r.index for r in batch] == list(range(8))
        assert [r.seed for r in batch] == [replicate_seed(123, i) for i in range(8)]

    def test_worker_count_is_invisible(self):
        one = run_batch(GENERAL, FixedSize(60), 12, master_seed=9, workers=1)
        four = run_batch(GENERAL, FixedSize(60), 12, master_seed=9, workers=4)
        assert one == four

    def test_batch_validation(self):
        with pytest.raises(InvalidConfigError):
            run_batch(BD, FixedSize(10), 0)
        with pytest.raises(InvalidConfigError):
            run_batch(BD, FixedSize(10), 5, workers=0)

    def test_results_are_plain_dataclasses(self):
        (r,) = run_batch(BD, FixedTime(1.0), 1, master_seed=4)
        assert isinstance(r, ReplicateResult)
        assert r.survived in (True, False)


class TestDistributionalChecks:
    def test_mean_growth_matches_exponential(self):
        # E[Z(t)] = exp(growth * t); pure fission so no extinction noise floor
        t = 3.0
        batch = run_batch(PURE_FISSION, FixedTime(t), 1500, master_seed=2024)
        sizes = np.array([r.final_pop for r in batch], dtype=float)
        want = math.exp(1.0 * t)
        se = sizes.std(ddof=1) / math.sqrt(len(sizes))
        assert abs(sizes.mean() - want) < 4 * se

    def test_normalized_size_is_exponential_for_pure_fission(self):
        # Z(t) is geometric with mean e^t, so exp(-t) Z(t) is within a hair
        # of a standard exponential at t = 5; the extension sharpens y_hat
        batch = run_batch(
            PURE_FISSION, FixedTime(5.0), 3000,
            SimOptions(y_extension=3.0), master_seed=77,
        )
        ys = np.array([r.y_hat for r in batch])
        assert (ys > 0).all()
        stat = stats.kstest(ys, "expon")
        assert stat.pvalue > 1e-3, f"KS p-value {stat.pvalue}"
