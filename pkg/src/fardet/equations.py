"""Vectorized Liouvillian generators for the five master-equation variants.

Each generator is a sparse matrix acting on column-stacked density
matrices.  Combined states live on com (x) internal with the internal
index fastest, i.e. a combined operator is ``np.kron(com_part,
internal_part)``.  Five variants are built:

* ``full``           exact dynamics, stiff at the detuning scale
* ``standard``       adiabatic elimination of the internal state
* ``sophisticated``  the same plus a quartic potential correction
* ``secular``        internal populations kept, coherences dropped
* ``dressed``        dressed-basis variant; equals ``sophisticated`` on
                     the ground manifold
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .operators import (
    IDENTITY_2,
    PROJ_EXCITED,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    KickWeights,
    MomentumBasis,
    SimParams,
    hermitized,
    kick_weights,
    kinetic_operator,
    rabi_operator,
    raising_operator,
)

__all__ = [
    "EquationKind",
    "Generator",
    "vec",
    "unvec",
    "commutator_matrix",
    "kick_matrix",
    "vectorize",
    "quartic_potential",
    "full_generator",
    "standard_adiabatic_generator",
    "sophisticated_adiabatic_generator",
    "secular_generator",
    "dressed_generator",
    "build_generator",
]


class EquationKind(str, Enum):
    FULL = "full"
    STANDARD = "standard"
    SOPHISTICATED = "sophisticated"
    SECULAR = "secular"
    DRESSED = "dressed"


# Kinds that evolve the electronic state alongside the motion.
INTERNAL_KINDS = frozenset({EquationKind.FULL, EquationKind.SECULAR, EquationKind.DRESSED})


@dataclass(frozen=True)
class Generator:
    """A master-equation right-hand side in vectorized (matrix) form."""

    kind: EquationKind
    has_internal: bool
    dim_state: int
    matrix: sp.csr_matrix
    stiffness_scale: float

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evaluate d(rho)/dt for a density matrix given as a square array."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_state, self.dim_state):
            raise ValueError(
                f"state shape {rho.shape} does not match generator dim {self.dim_state}"
            )
        return unvec(self.matrix @ vec(rho), self.dim_state)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(matrix, dtype=complex).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    vector = np.asarray(vector)
    if dim is None:
        dim = math.isqrt(vector.size)
    if dim * dim != vector.size:
        raise ValueError(f"vector of size {vector.size} is not a stacked square matrix")
    return vector.reshape((dim, dim), order="F")


def _left(a: np.ndarray) -> sp.csr_matrix:
    """Superoperator for rho -> a rho under column stacking."""
    n = a.shape[0]
    return sp.kron(sp.identity(n, dtype=complex, format="csr"), sp.csr_matrix(a), format="csr")


def _right(a: np.ndarray) -> sp.csr_matrix:
    """Superoperator for rho -> rho a under column stacking."""
    n = a.shape[0]
    return sp.kron(sp.csr_matrix(a.T), sp.identity(n, dtype=complex, format="csr"), format="csr")


def commutator_matrix(h: np.ndarray) -> sp.csr_matrix:
    """Superoperator for rho -> [h, rho]."""
    h = np.asarray(h, dtype=complex)
    return (_left(h) - _right(h)).tocsr()


def _jump_matrix(c: np.ndarray) -> sp.csr_matrix:
    """Superoperator for rho -> c rho c^dag."""
    c = sp.csr_matrix(np.asarray(c, dtype=complex))
    return sp.kron(c.conj(), c, format="csr")


def _anticommutator_half(d: np.ndarray) -> sp.csr_matrix:
    """Superoperator for rho -> {d, rho} / 2."""
    d = np.asarray(d, dtype=complex)
    return (0.5 * (_left(d) + _right(d))).tocsr()


def kick_matrix(raising: np.ndarray, weights: KickWeights) -> sp.csr_matrix:
    """Vectorized recoil map for a raising operator on the target space.

    For combined states pass the raising operator embedded on the full
    space (e.g. ``np.kron(R, I2)``) so kicks act on the motional factor
    only.
    """
    r = np.asarray(raising, dtype=complex)
    n = r.shape[0]
    eye = sp.identity(n * n, dtype=complex, format="csr")
    return (
        weights.v_minus * _jump_matrix(r)
        + weights.v_zero * eye
        + weights.v_plus * _jump_matrix(r.conj().T)
    ).tocsr()


def vectorize(
    hamiltonian: np.ndarray | None = None,
    dissipators=(),
    kicked_dissipators=(),
    kick: sp.spmatrix | None = None,
    dim: int | None = None,
) -> sp.csr_matrix:
    """Assemble a Liouvillian matrix from Hamiltonian and dissipator parts.

    ``dissipators`` and ``kicked_dissipators`` are iterables of
    ``(rate, jump_operator)`` pairs; the kicked ones have their sandwich
    term composed with the recoil map ``kick``.  All operators must share
    one dimension.  The returned matrix satisfies
    ``matrix @ vec(rho) == vec(L(rho))``.
    """
    dissipators = list(dissipators)
    kicked_dissipators = list(kicked_dissipators)

    if dim is None:
        if hamiltonian is not None:
            dim = np.asarray(hamiltonian).shape[0]
        elif dissipators:
            dim = np.asarray(dissipators[0][1]).shape[0]
        elif kicked_dissipators:
            dim = np.asarray(kicked_dissipators[0][1]).shape[0]
        else:
            raise ValueError("cannot infer dimension from an empty generator spec")

    def check(name: str, op: np.ndarray) -> np.ndarray:
        op = np.asarray(op, dtype=complex)
        if op.shape != (dim, dim):
            raise ValueError(f"{name} has shape {op.shape}, expected ({dim}, {dim})")
        return op

    total = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    if hamiltonian is not None:
        total = total + (-1j) * commutator_matrix(check("hamiltonian", hamiltonian))
    for rate, c in dissipators:
        c = check("jump operator", c)
        total = total + rate * (_jump_matrix(c) - _anticommutator_half(c.conj().T @ c))
    if kicked_dissipators:
        if kick is None:
            raise ValueError("kicked dissipators require a kick map")
        if kick.shape != (dim * dim, dim * dim):
            raise ValueError(f"kick map shape {kick.shape} does not match dim {dim}")
        for rate, c in kicked_dissipators:
            c = check("jump operator", c)
            total = total + rate * (
                kick @ _jump_matrix(c) - _anticommutator_half(c.conj().T @ c)
            )
    total = total.tocsr()
    total.sum_duplicates()
    total.sort_indices()
    return total


# --------------------------------------------------------------------------
# The five equations
# --------------------------------------------------------------------------

def _light_shift(basis: MomentumBasis, params: SimParams, rabi: np.ndarray) -> np.ndarray:
    """Effective potential scale Omega Omega^dag / 4 delta."""
    return hermitized(rabi @ rabi.conj().T / (4.0 * params.delta))


def quartic_potential(basis: MomentumBasis, params: SimParams, rabi: np.ndarray | None = None) -> np.ndarray:
    """Higher-order potential correction Omega^2 Omega^dag^2 / 16 delta^3."""
    if rabi is None:
        rabi = rabi_operator(basis, params.omega_max).entries
    om_sq = rabi @ rabi.conj().T
    return hermitized(om_sq @ om_sq / (16.0 * params.delta**3))


def _com_kick(basis: MomentumBasis) -> sp.csr_matrix:
    return kick_matrix(raising_operator(basis).entries, kick_weights())


def _combined_kick(basis: MomentumBasis) -> sp.csr_matrix:
    r_full = np.kron(raising_operator(basis).entries, IDENTITY_2)
    return kick_matrix(r_full, kick_weights())


def full_generator(basis: MomentumBasis, params: SimParams) -> Generator:
    """Exact master equation on com (x) internal.

    H = p^2/2 + delta |e><e| + (Omega sigma^dag + Omega^dag sigma)/2, with
    spontaneous emission at rate gamma whose sandwich term carries a
    recoil kick on the motional factor.  The detuning term makes this the
    stiff variant: coherences rotate at frequency delta.
    """
    om = rabi_operator(basis, params.omega_max).entries
    k = kinetic_operator(basis).entries
    eye = np.eye(basis.dim, dtype=complex)
    h = (
        np.kron(k, IDENTITY_2)
        + params.delta * np.kron(eye, PROJ_EXCITED)
        + 0.5 * (np.kron(om, SIGMA_PLUS) + np.kron(om.conj().T, SIGMA_MINUS))
    )
    c_spont = np.kron(eye, SIGMA_MINUS)
    matrix = vectorize(
        hamiltonian=h,
        kicked_dissipators=[(params.gamma, c_spont)],
        kick=_combined_kick(basis),
    )
    return Generator(EquationKind.FULL, True, 2 * basis.dim, matrix, params.delta)


def _adiabatic_stiffness(params: SimParams) -> float:
    return params.omega_max**2 / (4.0 * params.delta)


def standard_adiabatic_generator(basis: MomentumBasis, params: SimParams) -> Generator:
    """Internal state eliminated: motion in the light-shift potential.

    rho' = gamma * (B J[Omega/2delta] - A[Omega/2delta]) rho
           - i [p^2/2 - Omega Omega^dag / 4 delta, rho]
    """
    om = rabi_operator(basis, params.omega_max).entries
    h = kinetic_operator(basis).entries - _light_shift(basis, params, om)
    matrix = vectorize(
        hamiltonian=h,
        kicked_dissipators=[(params.gamma, om / (2.0 * params.delta))],
        kick=_com_kick(basis),
    )
    return Generator(
        EquationKind.STANDARD, False, basis.dim, matrix, _adiabatic_stiffness(params)
    )


def sophisticated_adiabatic_generator(basis: MomentumBasis, params: SimParams) -> Generator:
    """Standard elimination plus the quartic potential correction.

    Built literally as the standard generator plus the commutator map of
    Omega^2 Omega^dag^2 / 16 delta^3, so the difference of the two
    matrices is exactly that commutator map.
    """
    base = standard_adiabatic_generator(basis, params)
    extra = (-1j) * commutator_matrix(quartic_potential(basis, params))
    matrix = (base.matrix + extra).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return Generator(
        EquationKind.SOPHISTICATED, False, basis.dim, matrix, base.stiffness_scale
    )


def secular_generator(basis: MomentumBasis, params: SimParams) -> Generator:
    """Internal populations kept, ground-excited coherences dropped.

    H = p^2/2 + (Omega Omega^dag / 4 delta) sigma_z; spontaneous emission
    as in the full equation plus two exchange dissipators that flip the
    internal state without a recoil kick.
    """
    om = rabi_operator(basis, params.omega_max).entries
    k = kinetic_operator(basis).entries
    eye = np.eye(basis.dim, dtype=complex)
    h = np.kron(k, IDENTITY_2) + np.kron(_light_shift(basis, params, om), SIGMA_Z)
    two_delta = 2.0 * params.delta
    c_spont = np.kron(eye, SIGMA_MINUS)
    c_down = np.kron(om.conj().T / two_delta, SIGMA_MINUS)
    c_up = np.kron(om / two_delta, SIGMA_PLUS)
    matrix = vectorize(
        hamiltonian=h,
        dissipators=[(params.gamma, c_down), (params.gamma, c_up)],
        kicked_dissipators=[(params.gamma, c_spont)],
        kick=_combined_kick(basis),
    )
    return Generator(
        EquationKind.SECULAR, True, 2 * basis.dim, matrix, _adiabatic_stiffness(params)
    )


def dressed_generator(basis: MomentumBasis, params: SimParams) -> Generator:
    """Dressed-basis equation with coherences dropped.

    H = p^2/2 + (Omega Omega^dag/4delta - Omega^2 Omega^dag^2/16delta^3)
    sigma_z; spontaneous emission as in the full equation plus a kicked
    dissipator (Omega/2delta) sigma_z that recoils the atom without
    changing its internal state.  On the ground manifold this reduces to
    the sophisticated adiabatic equation.
    """
    om = rabi_operator(basis, params.omega_max).entries
    k = kinetic_operator(basis).entries
    eye = np.eye(basis.dim, dtype=complex)
    v = hermitized(_light_shift(basis, params, om) - quartic_potential(basis, params, om))
    h = np.kron(k, IDENTITY_2) + np.kron(v, SIGMA_Z)
    c_spont = np.kron(eye, SIGMA_MINUS)
    c_kick_z = np.kron(om / (2.0 * params.delta), SIGMA_Z)
    matrix = vectorize(
        hamiltonian=h,
        kicked_dissipators=[(params.gamma, c_spont), (params.gamma, c_kick_z)],
        kick=_combined_kick(basis),
    )
    return Generator(
        EquationKind.DRESSED, True, 2 * basis.dim, matrix, _adiabatic_stiffness(params)
    )


_BUILDERS = {
    EquationKind.FULL: full_generator,
    EquationKind.STANDARD: standard_adiabatic_generator,
    EquationKind.SOPHISTICATED: sophisticated_adiabatic_generator,
    EquationKind.SECULAR: secular_generator,
    EquationKind.DRESSED: dressed_generator,
}


def build_generator(kind: EquationKind | str, basis: MomentumBasis, params: SimParams) -> Generator:
    return _BUILDERS[EquationKind(kind)](basis, params)
