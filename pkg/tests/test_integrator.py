"""Stepper behavior: accuracy, sampling, monitoring, determinism."""

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_density, toy_params
from fardet.equations import EquationKind, Generator, build_generator, vectorize
from fardet.integrator import (
    DensityState,
    LeakageError,
    StiffnessError,
    integrate,
    make_initial_state,
)
from fardet.observables import momentum_distribution
from fardet.operators import SIGMA_MINUS, SimParams, build_basis, kinetic_operator


def custom_generator(matrix, dim, kind=EquationKind.STANDARD, stiffness=1.0, internal=False):
    return Generator(kind, internal, dim, sp.csr_matrix(matrix), stiffness)


def plain_params(t_end=1.0, samples=11, **overrides):
    values = dict(delta=10.0, omega_max=2.0, gamma=0.5, n_max=1,
                  t_samples=np.linspace(0.0, t_end, samples))
    values.update(overrides)
    return SimParams(**values)


class TestZeroAndDiagonalGenerators:
    def test_zero_map_keeps_state_constant(self, rng):
        rho0 = random_density(rng, 3)
        gen = custom_generator(np.zeros((9, 9), dtype=complex), 3)
        traj = integrate(gen, DensityState(rho0, 0.0), plain_params())
        for s in traj.samples:
            assert np.allclose(s.matrix, (rho0 + rho0.conj().T) / 2, atol=1e-15)

    def test_kinetic_commutator_leaves_distribution_stationary(self, rng):
        basis = build_basis(2)
        gen = custom_generator(
            vectorize(kinetic_operator(basis).entries), basis.dim, stiffness=2.0
        )
        rho0 = random_density(rng, basis.dim)
        traj = integrate(gen, DensityState(rho0, 0.0), plain_params(t_end=2.0, samples=9))
        p0 = momentum_distribution(traj.samples[0])
        for s in traj.samples[1:]:
            assert np.max(np.abs(momentum_distribution(s) - p0)) <= 1e-12


class TestAccuracy:
    def test_damped_rotating_coherence_matches_analytic_solution(self):
        # two-level atom: Hamiltonian omega |e><e|, decay rate g
        omega, g = 7.0, 0.8
        h = np.diag([0.0, omega]).astype(complex)
        gen = custom_generator(
            vectorize(h, dissipators=[(g, SIGMA_MINUS)]), 2, stiffness=omega
        )
        rho0 = np.array([[0.4, 0.2 - 0.1j], [0.2 + 0.1j, 0.6]], dtype=complex)
        params = plain_params(t_end=3.0, samples=7, rtol=1e-10, atol=1e-13, leak_budget=0.9)
        traj = integrate(gen, DensityState(rho0, 0.0), params)
        for s in traj.samples:
            t = s.time
            ee = rho0[1, 1] * np.exp(-g * t)
            ge = rho0[0, 1] * np.exp((1j * omega - g / 2) * t)
            expected = np.array([[rho0[0, 0] + rho0[1, 1] - ee, ge], [np.conj(ge), ee]])
            assert np.max(np.abs(s.matrix - expected)) <= 1e-9

    def test_halving_tolerance_converges(self):
        basis = build_basis(4)
        results = []
        for rtol in (1e-6, 1e-7, 1e-8):
            params = toy_params(n_max=4, t_end=2.0, samples=5, rtol=rtol, atol=rtol * 1e-2)
            gen = build_generator(EquationKind.SOPHISTICATED, basis, params)
            traj = integrate(gen, make_initial_state(basis), params)
            results.append(momentum_distribution(traj.samples[-1])[basis.index(0)])
        first = abs(results[0] - results[1])
        second = abs(results[1] - results[2])
        assert second <= first
        assert second <= 1e-6


class TestSampling:
    def test_sample_times_equal_requested_grid(self):
        basis = build_basis(5)
        params = toy_params(n_max=5, t_end=0.7, samples=17)
        gen = build_generator(EquationKind.STANDARD, basis, params)
        traj = integrate(gen, make_initial_state(basis), params)
        assert np.array_equal(traj.times, params.t_samples)

    def test_samples_are_exactly_hermitian(self):
        basis = build_basis(3)
        params = toy_params(n_max=3, t_end=0.5, samples=9)
        gen = build_generator(EquationKind.SECULAR, basis, params)
        traj = integrate(gen, make_initial_state(basis, "ground"), params)
        for s in traj.samples:
            assert np.array_equal(s.matrix, s.matrix.conj().T)

    def test_single_sample_grid_returns_initial_state(self):
        basis = build_basis(2)
        params = toy_params(n_max=2, t_samples=np.array([0.0]))
        gen = build_generator(EquationKind.STANDARD, basis, params)
        traj = integrate(gen, make_initial_state(basis), params)
        assert len(traj.samples) == 1
        assert traj.stats.accepted == 0


class TestInitialState:
    def test_reference_shape_and_center(self):
        basis = build_basis(25)
        state = make_initial_state(basis)
        assert state.matrix.shape == (51, 51)
        assert state.matrix[25, 25] == 1.0
        assert np.count_nonzero(state.matrix) == 1
        assert np.trace(state.matrix) == 1.0

    def test_ground_variant_has_no_excited_population(self):
        basis = build_basis(25)
        state = make_initial_state(basis, "ground")
        assert state.matrix.shape == (102, 102)
        assert np.all(state.matrix[1::2, 1::2] == 0.0)
        assert np.trace(state.matrix) == 1.0

    def test_excited_variant(self):
        state = make_initial_state(build_basis(1), "excited")
        assert np.all(state.matrix[0::2, 0::2] == 0.0)
        assert np.trace(state.matrix) == 1.0

    def test_unknown_internal_label_rejected(self):
        with pytest.raises(ValueError):
            make_initial_state(build_basis(1), "superposition")


class TestValidation:
    def test_dimension_mismatch_rejected(self):
        basis = build_basis(2)
        params = toy_params(n_max=2)
        gen = build_generator(EquationKind.STANDARD, basis, params)
        with pytest.raises(ValueError):
            integrate(gen, make_initial_state(build_basis(3)), params)

    def test_non_hermitian_initial_state_rejected(self):
        basis = build_basis(2)
        params = toy_params(n_max=2)
        gen = build_generator(EquationKind.STANDARD, basis, params)
        bad = np.zeros((5, 5), dtype=complex)
        bad[0, 1] = 1.0
        bad[0, 0] = 1.0
        with pytest.raises(ValueError):
            integrate(gen, DensityState(bad, 0.0), params)

    def test_non_unit_trace_rejected(self):
        basis = build_basis(2)
        params = toy_params(n_max=2)
        gen = build_generator(EquationKind.STANDARD, basis, params)
        with pytest.raises(ValueError):
            integrate(gen, DensityState(np.eye(5, dtype=complex), 0.0), params)

    def test_initial_time_must_match_grid(self):
        basis = build_basis(2)
        params = toy_params(n_max=2)
        gen = build_generator(EquationKind.STANDARD, basis, params)
        state = make_initial_state(basis)
        with pytest.raises(ValueError):
            integrate(gen, DensityState(state.matrix, 0.5), params)


class TestMonitoring:
    def test_truncation_leak_fails_loudly(self):
        # reference parameters on a one-level ladder leak immediately
        basis = build_basis(1)
        params = SimParams(delta=1e4, omega_max=2e3, gamma=200.0, n_max=1,
                           t_samples=np.linspace(0.0, 2.0, 5))
        gen = build_generator(EquationKind.STANDARD, basis, params)
        with pytest.raises(LeakageError) as excinfo:
            integrate(gen, make_initial_state(basis), params)
        assert excinfo.value.kind == "standard"
        assert 0.0 < excinfo.value.time <= 2.0

    def test_secular_exempt_from_lower_trace_bound(self):
        basis = build_basis(1)
        params = SimParams(delta=1e4, omega_max=2e3, gamma=200.0, n_max=1,
                           t_samples=np.linspace(0.0, 2.0, 5))
        gen = build_generator(EquationKind.SECULAR, basis, params)
        traj = integrate(gen, make_initial_state(basis, "ground"), params)
        assert np.real(np.trace(traj.samples[-1].matrix)) < 1.0 - params.leak_budget

    def test_step_collapse_raises_stiffness_error(self):
        # a generator too violent for any representable step size
        scale = 1e18
        h = np.diag([0.0, scale]).astype(complex)
        gen = custom_generator(vectorize(h), 2, kind=EquationKind.FULL, stiffness=1.0)
        rho0 = np.array([[0.5, 0.25], [0.25, 0.5]], dtype=complex)
        params = plain_params(t_end=1.0, samples=3, rtol=1e-10, atol=1e-14)
        with pytest.raises(StiffnessError) as excinfo:
            integrate(gen, DensityState(rho0, 0.0), params)
        assert excinfo.value.kind == "full"


class TestDeterminism:
    def test_identical_inputs_give_bitwise_identical_trajectories(self):
        basis = build_basis(3)
        params = toy_params(n_max=3, t_end=1.0, samples=13)
        gen = build_generator(EquationKind.SECULAR, basis, params)
        rho0 = make_initial_state(basis, "ground")
        a = integrate(gen, rho0, params)
        b = integrate(gen, rho0, params)
        assert a.stats.accepted == b.stats.accepted
        assert a.stats.rejected == b.stats.rejected
        for sa, sb in zip(a.samples, b.samples):
            assert np.array_equal(sa.matrix, sb.matrix)

    def test_input_state_not_mutated(self):
        basis = build_basis(2)
        params = toy_params(n_max=2)
        gen = build_generator(EquationKind.STANDARD, basis, params)
        rho0 = make_initial_state(basis)
        before = rho0.matrix.copy()
        integrate(gen, rho0, params)
        assert np.array_equal(rho0.matrix, before)
