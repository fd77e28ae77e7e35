"""Shared fixtures and independent reference implementations.

The helpers here deliberately avoid the package's sparse/vectorized code
paths: master-equation right-hand sides are evaluated with plain dense
matrix products so the generators have something independent to be
checked against.
"""

import numpy as np
import pytest

from fardet.equations import EquationKind
from fardet.operators import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    MomentumBasis,
    SimParams,
    kick_weights,
    kinetic_operator,
    rabi_operator,
    raising_operator,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, dim, scale=1.0):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (m + m.conj().T) / 2.0


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def interior_hermitian(rng, basis, has_internal, pad=2):
    """Random Hermitian operator with no support on the outer `pad` levels."""
    d = basis.dim
    inner = d - 2 * pad
    core = random_hermitian(rng, inner)
    com = np.zeros((d, d), dtype=complex)
    com[pad : d - pad, pad : d - pad] = core
    if not has_internal:
        return com
    return np.kron(com, random_hermitian(rng, 2))


def toy_params(n_max=3, t_end=1.0, samples=11, **overrides):
    """Small far-detuned parameter set that fits comfortably in the basis."""
    values = dict(delta=500.0, omega_max=50.0, gamma=5.0, n_max=n_max,
                  t_samples=np.linspace(0.0, t_end, samples))
    values.update(overrides)
    return SimParams(**values)


def dense_kick(raising_matrix, rho):
    """Reference recoil map using plain matrix products."""
    w = kick_weights()
    r = raising_matrix
    return (
        w.v_minus * (r @ rho @ r.conj().T)
        + w.v_zero * rho
        + w.v_plus * (r.conj().T @ rho @ r)
    )


def reference_rhs(kind, basis, params, rho):
    """Dense evaluation of each master equation, written out term by term."""
    om = rabi_operator(basis, params.omega_max).entries
    kin = kinetic_operator(basis).entries
    r = raising_operator(basis).entries
    eye = np.eye(basis.dim, dtype=complex)
    delta, gamma = params.delta, params.gamma
    light = om @ om.conj().T / (4.0 * delta)
    quartic = (om @ om.conj().T) @ (om @ om.conj().T) / (16.0 * delta**3)

    def dissipator(c, kicked, raising_full=None):
        cdc = c.conj().T @ c
        sandwich = c @ rho @ c.conj().T
        if kicked:
            sandwich = dense_kick(raising_full, sandwich)
        return sandwich - 0.5 * (cdc @ rho + rho @ cdc)

    kind = EquationKind(kind)
    if kind in (EquationKind.STANDARD, EquationKind.SOPHISTICATED):
        h = kin - light
        if kind == EquationKind.SOPHISTICATED:
            h = h + quartic
        return -1j * (h @ rho - rho @ h) + gamma * dissipator(om / (2 * delta), True, r)

    r_full = np.kron(r, IDENTITY_2)
    if kind == EquationKind.FULL:
        h = (
            np.kron(kin, IDENTITY_2)
            + delta * np.kron(eye, SIGMA_PLUS @ SIGMA_MINUS)
            + 0.5 * (np.kron(om, SIGMA_PLUS) + np.kron(om.conj().T, SIGMA_MINUS))
        )
        out = -1j * (h @ rho - rho @ h)
        out += gamma * dissipator(np.kron(eye, SIGMA_MINUS), True, r_full)
        return out
    if kind == EquationKind.SECULAR:
        h = np.kron(kin, IDENTITY_2) + np.kron(light, SIGMA_Z)
        out = -1j * (h @ rho - rho @ h)
        out += gamma * dissipator(np.kron(eye, SIGMA_MINUS), True, r_full)
        out += gamma * dissipator(np.kron(om.conj().T / (2 * delta), SIGMA_MINUS), False)
        out += gamma * dissipator(np.kron(om / (2 * delta), SIGMA_PLUS), False)
        return out
    if kind == EquationKind.DRESSED:
        h = np.kron(kin, IDENTITY_2) + np.kron(light - quartic, SIGMA_Z)
        out = -1j * (h @ rho - rho @ h)
        out += gamma * dissipator(np.kron(eye, SIGMA_MINUS), True, r_full)
        out += gamma * dissipator(np.kron(om / (2 * delta), SIGMA_Z), True, r_full)
        return out
    raise AssertionError(kind)


def ground_state(basis, has_internal):
    from fardet.integrator import make_initial_state

    return make_initial_state(basis, "ground" if has_internal else None)
