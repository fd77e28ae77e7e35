"""Tests for distribution extraction, validity ratio and series metrics."""

import numpy as np
import pytest

from conftest import random_density, random_hermitian
from fardet.integrator import DensityState, make_initial_state
from fardet.observables import (
    ObservableSeries,
    PositivityWarning,
    excited_block,
    excited_state_estimate,
    fluorescence_estimate,
    ground_block,
    momentum_distribution,
    partial_trace_internal,
    ratio_from_excited_block,
    series_compare,
    trace_decay_rate,
    validity_ratio,
)
from fardet.operators import SimParams, build_basis, kick_superoperator, kick_weights, rabi_operator


class TestMomentumDistribution:
    def test_initial_state_is_a_point_mass(self):
        state = make_initial_state(build_basis(25))
        p = momentum_distribution(state)
        assert p[25] == 1.0
        assert np.count_nonzero(p) == 1

    def test_one_kick_spreads_per_weights(self):
        basis = build_basis(2)
        kick = kick_superoperator(basis, kick_weights())
        state = make_initial_state(basis)
        p = momentum_distribution(kick(state.matrix))
        assert p[basis.index(-1)] == pytest.approx(1 / 5, abs=1e-15)
        assert p[basis.index(0)] == pytest.approx(3 / 5, abs=1e-15)
        assert p[basis.index(1)] == pytest.approx(1 / 5, abs=1e-15)

    def test_sums_to_trace(self, rng):
        for _ in range(20):
            rho = random_density(rng, 7) * 0.9
            assert abs(momentum_distribution(rho).sum() - np.real(np.trace(rho))) <= 1e-13

    def test_internal_factor_traced_out(self, rng):
        com = random_density(rng, 5)
        internal = np.array([[0.7, 0.1], [0.1, 0.3]], dtype=complex)
        combined = np.kron(com, internal)
        p = momentum_distribution(combined)
        assert np.allclose(p, np.real(np.diag(com)), atol=1e-13)
        gg, ee = ground_block(combined), excited_block(combined)
        assert abs(np.trace(gg) + np.trace(ee) - np.trace(combined)) <= 1e-13
        assert np.allclose(partial_trace_internal(combined), gg + ee, atol=1e-14)

    def test_negative_entry_warns_without_clamping(self):
        rho = np.diag([0.5, -1e-6, 0.5 + 1e-6]).astype(complex)
        with pytest.warns(PositivityWarning):
            p = momentum_distribution(rho, negativity_floor=1e-9)
        assert p[1] == -1e-6  # never clamped

    def test_small_negativity_tolerated_silently(self):
        import warnings

        rho = np.diag([0.5, -1e-12, 0.5]).astype(complex)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            momentum_distribution(rho, negativity_floor=1e-9)


class TestValidityRatio:
    def test_zero_momentum_excited_weight_gives_zero(self):
        basis = build_basis(4)
        state = make_initial_state(basis, "excited")
        assert validity_ratio(state, gamma=200.0) == 0.0

    def test_level_four_weight(self):
        basis = build_basis(4)
        m = np.zeros((2 * basis.dim, 2 * basis.dim), dtype=complex)
        ee = np.zeros((basis.dim, basis.dim), dtype=complex)
        ee[basis.index(4), basis.index(4)] = 0.5
        m[1::2, 1::2] = ee
        m[0::2, 0::2] = np.eye(basis.dim) * (0.5 / basis.dim)
        assert validity_ratio(DensityState(m, 0.0), gamma=200.0) == pytest.approx(8.0 / 200.0)

    def test_invariant_under_scaling(self, rng):
        block = random_density(rng, 5)
        a = ratio_from_excited_block(block, gamma=3.0)
        b = ratio_from_excited_block(7.0 * block, gamma=3.0)
        assert a == pytest.approx(b, rel=1e-12)

    def test_vanishing_population_rejected(self):
        basis = build_basis(2)
        state = make_initial_state(basis, "ground")  # no excited weight at all
        with pytest.raises(ValueError):
            validity_ratio(state, gamma=200.0)

    def test_requires_internal_factor(self):
        state = make_initial_state(build_basis(2))
        with pytest.raises(ValueError):
            validity_ratio(state, gamma=200.0)


class TestExcitedEstimate:
    def test_matches_hand_formula(self, rng):
        basis = build_basis(3)
        rho = random_density(rng, basis.dim)
        om = rabi_operator(basis, 50.0).entries
        est = excited_state_estimate(rho, om, delta=500.0)
        assert np.allclose(est, om @ rho @ om.conj().T / (4 * 500.0**2), atol=1e-15)


class TestFluorescence:
    def params(self):
        return SimParams(delta=1e4, omega_max=2e3, gamma=200.0, n_max=2,
                         t_samples=np.array([0.0, 1.0]))

    def test_peak_drive_rate_and_emission_time(self):
        params = self.params()
        rate = fluorescence_estimate(params, params.omega_max**2)
        assert rate == pytest.approx(2.0)
        assert 1.0 / rate == pytest.approx(0.5)

    def test_quarter_drive_gives_two_time_units(self):
        params = self.params()
        rate = fluorescence_estimate(params, params.omega_max**2 / 4)
        assert 1.0 / rate == pytest.approx(2.0)

    def test_weak_drive_limit(self):
        rate = fluorescence_estimate(self.params(), 1e-12)
        assert 0.0 < rate < 1e-18

    def test_out_of_range_rejected(self):
        params = self.params()
        with pytest.raises(ValueError):
            fluorescence_estimate(params, 0.0)
        with pytest.raises(ValueError):
            fluorescence_estimate(params, params.omega_max**2 * 1.01)


class TestSeriesCompare:
    def test_identical_series(self):
        ts = np.linspace(0.0, 2.0, 101)
        a = ObservableSeries("a", ts, np.sin(ts))
        result = series_compare(a, a)
        assert result.max_abs_diff == 0.0
        assert result.lag == 0.0

    def test_shifted_series_recovers_the_shift(self):
        # synthetic oracle: b is a delayed copy, so a leads by +0.05
        ts = np.linspace(0.0, 2.0, 401)
        signal = lambda t: np.sin(2 * np.pi * 1.7 * t) * np.exp(-t / 3.0) + 0.3
        a = ObservableSeries("a", ts, signal(ts))
        b = ObservableSeries("b", ts, signal(ts - 0.05))
        result = series_compare(a, b)
        dt = ts[1] - ts[0]
        assert abs(result.lag - 0.05) <= dt + 1e-12

    def test_constant_series_lag_zero_by_convention(self):
        ts = np.linspace(0.0, 1.0, 51)
        a = ObservableSeries("a", ts, np.full(51, 0.4))
        b = ObservableSeries("b", ts, np.full(51, 0.9))
        assert series_compare(a, b).lag == 0.0

    def test_grid_mismatch_rejected(self):
        a = ObservableSeries("a", np.linspace(0, 1, 11), np.zeros(11))
        b = ObservableSeries("b", np.linspace(0, 2, 11), np.zeros(11))
        with pytest.raises(ValueError):
            series_compare(a, b)

    def test_lag_window_is_bounded(self):
        ts = np.linspace(0.0, 4.0, 801)
        sig = np.sin(2 * np.pi * ts / 4.0)
        a = ObservableSeries("a", ts, sig)
        b = ObservableSeries("b", ts, -sig)  # anti-phase: best true shift is 2.0
        result = series_compare(a, b, max_shift=0.5)
        assert abs(result.lag) <= 0.5 + 1e-12


class TestObservableSeries:
    def test_times_must_increase(self):
        with pytest.raises(ValueError):
            ObservableSeries("x", np.array([0.0, 1.0, 1.0]), np.zeros(3))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ObservableSeries("x", np.array([0.0, 1.0]), np.zeros(3))

    def test_vector_valued_series_allowed(self):
        s = ObservableSeries("d", np.array([0.0, 1.0]), np.zeros((2, 5)))
        assert s.values.shape == (2, 5)


class TestTraceDecayRate:
    def test_recovers_synthetic_rate(self):
        ts = np.linspace(0.0, 8.0, 200)
        traces = np.exp(-0.3 * ts)
        assert trace_decay_rate(ts, traces) == pytest.approx(0.3, rel=1e-9)

    def test_needs_two_positive_samples(self):
        with pytest.raises(ValueError):
            trace_decay_rate(np.array([0.0, 1.0]), np.array([1.0, -1.0]), t_min=0.5)
