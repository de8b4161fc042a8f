import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwsfs.estimate import (
    P_MAX,
    DegenerateEstimateError,
    EstimateReport,
    FixedSizeBasis,
    FixedTimeBasis,
    estimate_from_spectrum,
    invert_phi_j,
    phi1,
    phi_j,
)
from gwsfs.model import InvalidConfigError
from gwsfs.sfs import EmptySpectrumError

from oracles import PHI1_AT_HALF, phi_quadrature


class TestPhi:
    def test_no_extinction_values_exact(self):
        # must be the exact rational endpoints, not a series approximation
        assert phi1(0.0) == 0.5
        assert phi_j(0.0, 1) == 0.5
        assert phi_j(0.0, 4) == 0.2
        assert phi_j(0.0, 9) == 0.1

    def test_half_extinction_closed_form(self):
        assert math.isclose(phi1(0.5), PHI1_AT_HALF, rel_tol=0, abs_tol=1e-15)

    def test_vanishes_toward_certain_extinction(self):
        assert phi1(0.999) < phi1(0.9) < phi1(0.5) < phi1(0.1)
        assert phi1(0.999) < 0.15

    def test_phi_j_at_one_matches_closed_form(self):
        for i in range(1, 100):
            p = i / 100
            assert abs(phi_j(p, 1) - phi1(p)) < 1e-12

    def test_against_quadrature_oracle(self):
        for p, j in [(0.7, 2), (0.3, 1), (0.5, 5), (0.9, 3)]:
            assert math.isclose(phi_j(p, j), phi_quadrature(p, j), abs_tol=1e-10)

    @pytest.mark.parametrize("j", [1, 2, 5])
    def test_strictly_decreasing(self, j):
        grid = [i / 200 * P_MAX for i in range(201)]
        vals = [phi_j(p, j) for p in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert all(0.0 < v <= 1.0 / (j + 1) for v in vals)

    def test_domain_checks(self):
        with pytest.raises(InvalidConfigError):
            phi_j(-0.1, 1)
        with pytest.raises(InvalidConfigError):
            phi_j(1.0, 1)
        with pytest.raises(InvalidConfigError):
            phi_j(0.5, 0)


class TestInversion:
    @given(
        st.floats(min_value=0.005, max_value=0.99),
        st.integers(min_value=1, max_value=10),
    )
    @settings(max_examples=150)
    def test_round_trip(self, p, j):
        x = phi_j(p, j)
        p_hat, clamped = invert_phi_j(x, j)
        assert not clamped
        assert abs(p_hat - p) < 1e-8

    def test_clamping_truth_table(self):
        # exactly at the p=0 ceiling: inverse is 0, no clamp needed
        assert invert_phi_j(0.5, 1) == (0.0, False)
        # above the ceiling: clamped down to 0
        assert invert_phi_j(0.5000001, 1) == (0.0, True)
        assert invert_phi_j(1.0, 1) == (0.0, True)
        # at zero the only consistent value is certain extinction
        assert invert_phi_j(0.0, 1) == (1.0, True)
        # below the search window floor: pinned to the edge, not clamped
        p_hat, clamped = invert_phi_j(0.01, 1)
        assert p_hat == P_MAX
        assert not clamped

    def test_ceiling_scales_with_j(self):
        assert invert_phi_j(0.25, 3) == (0.0, False)
        assert invert_phi_j(0.2500001, 3) == (0.0, True)

    def test_input_validation(self):
        with pytest.raises(InvalidConfigError):
            invert_phi_j(-0.01, 1)
        with pytest.raises(InvalidConfigError):
            invert_phi_j(1.01, 1)


class TestEstimateFromSpectrum:
    def test_worked_example(self):
        r = estimate_from_spectrum({1: 1, 2: 1}, FixedSizeBasis(10))
        assert isinstance(r, EstimateReport)
        assert r.p_hat == 0.0
        assert not r.clamped
        assert r.x_observed == 0.5
        assert r.j_used == 1
        # at p_hat = 0 the rate collapses to total mutations / size
        assert math.isclose(r.effective_mutation_rate_hat, 0.2, abs_tol=1e-15)

    def test_q_hat(self):
        r = estimate_from_spectrum({1: 1, 2: 1}, FixedSizeBasis(10))
        assert r.q_hat == 1.0

    def test_interior_estimate(self):
        # build a spectrum whose singleton fraction matches phi1(0.4)
        x = phi1(0.4)
        m = 10_000_000
        s1 = round(x * m)
        sfs = {1: s1, 2: m - s1}
        r = estimate_from_spectrum(sfs, FixedSizeBasis(1000))
        assert abs(r.p_hat - 0.4) < 1e-6
        assert not r.clamped
        # rate estimate applies the survivorship correction at p_hat
        per_capita = m / 1000
        want = per_capita * (-r.p_hat / ((1 - r.p_hat) * math.log1p(-r.p_hat)))
        assert math.isclose(r.effective_mutation_rate_hat, want, rel_tol=1e-12)

    def test_degenerate_raises_with_partial_report(self):
        with pytest.raises(DegenerateEstimateError) as exc:
            estimate_from_spectrum({3: 4}, FixedSizeBasis(10), j=2)
        report = exc.value.report
        assert report.p_hat == 1.0
        assert report.clamped
        assert report.x_observed == 0.0
        assert report.effective_mutation_rate_hat is None

    def test_empty_spectrum(self):
        with pytest.raises(EmptySpectrumError):
            estimate_from_spectrum({}, FixedSizeBasis(10))

    def test_empty_tail(self):
        with pytest.raises(EmptySpectrumError):
            estimate_from_spectrum({1: 5}, FixedSizeBasis(10), j=7)

    @given(st.integers(min_value=2, max_value=10_000))
    @settings(max_examples=50)
    def test_scaling_counts_leaves_p_hat_alone(self, c):
        base = estimate_from_spectrum({1: 3, 2: 4, 5: 1}, FixedSizeBasis(100))
        scaled = estimate_from_spectrum(
            {1: 3 * c, 2: 4 * c, 5: c}, FixedSizeBasis(100)
        )
        # the ratio of exact integers survives scaling, so the estimate is
        # bit-identical; only the rate scales
        assert scaled.p_hat == base.p_hat
        assert math.isclose(
            scaled.effective_mutation_rate_hat,
            c * base.effective_mutation_rate_hat,
            rel_tol=1e-12,
        )

    def test_higher_j_basis(self):
        x = phi_j(0.3, 2)
        m = 10_000_000
        s2 = round(x * m)
        sfs = {2: s2, 3: m - s2}
        r = estimate_from_spectrum(sfs, FixedSizeBasis(500), j=2)
        assert r.j_used == 2
        assert abs(r.p_hat - 0.3) < 1e-5


class TestSizeBases:
    def test_fixed_size(self):
        assert FixedSizeBasis(10).effective_size() == 10.0
        with pytest.raises(InvalidConfigError):
            FixedSizeBasis(0)

    def test_fixed_time(self):
        b = FixedTimeBasis(duration=2.0, growth_rate=0.5, y_hat=3.0)
        assert math.isclose(b.effective_size(), 3.0 * math.exp(1.0), rel_tol=1e-15)
        with pytest.raises(InvalidConfigError):
            FixedTimeBasis(duration=2.0, growth_rate=0.5, y_hat=0.0)
        with pytest.raises(InvalidConfigError):
            FixedTimeBasis(duration=-1.0, growth_rate=0.5, y_hat=1.0)

    def test_equivalent_bases_agree(self):
        sfs = {1: 40, 2: 25, 3: 10}
        by_size = estimate_from_spectrum(sfs, FixedSizeBasis(100))
        by_time = estimate_from_spectrum(
            sfs, FixedTimeBasis(duration=math.log(100) / 0.5, growth_rate=0.5, y_hat=1.0)
        )
        assert by_time.p_hat == by_size.p_hat
        assert math.isclose(
            by_time.effective_mutation_rate_hat,
            by_size.effective_mutation_rate_hat,
            rel_tol=1e-12,
        )
