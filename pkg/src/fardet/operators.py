"""Momentum-space building blocks for a laser-driven two-level atom.

Everything is expressed in scaled units with hbar = k = m = 1, so momentum
is counted in integer photon recoils, the kinetic energy of level n is
n^2 / 2, and frequencies (detuning, Rabi frequency, decay rate) share one
unit.  The center-of-mass space is a truncated ladder of momentum
eigenstates |n>, n = -n_max .. n_max; the electronic space is spanned by
the ground and excited states |g>, |e>.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

__all__ = [
    "SimParams",
    "MomentumBasis",
    "OperatorMatrix",
    "KickWeights",
    "DressedFunctions",
    "build_basis",
    "kinetic_operator",
    "raising_operator",
    "rabi_operator",
    "dipole_distribution",
    "kick_weights",
    "kick_superoperator",
    "lindblad_dissipator",
    "dressed_functions",
    "hermitized",
    "IDENTITY_2",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "SIGMA_Z",
    "PROJ_GROUND",
    "PROJ_EXCITED",
]

# Electronic two-level space, basis ordered (|g>, |e>).
IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.conj().T
PROJ_GROUND = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
PROJ_EXCITED = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
SIGMA_Z = PROJ_EXCITED - PROJ_GROUND  # sigma^dag sigma - sigma sigma^dag


def hermitized(matrix: np.ndarray) -> np.ndarray:
    """Exact Hermitian projection (A + A^dag) / 2."""
    return (matrix + matrix.conj().T) / 2.0


@dataclass(frozen=True)
class SimParams:
    """Scaled physical parameters plus integration controls.

    The physically interesting regime is delta > omega_max > gamma > 0
    (far detuning, weak decay).  Construction only enforces the basic
    bounds so that degenerate test instances (gamma = 0, omega_max = 0)
    remain expressible; call :meth:`validate_regime` to insist on the
    strict ordering, as the command line front end does.
    """

    delta: float
    omega_max: float
    gamma: float
    n_max: int
    t_samples: np.ndarray
    rtol: float = 1e-8
    atol: float = 1e-10
    leak_budget: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "t_samples", np.asarray(self.t_samples, dtype=float))
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.omega_max < 0:
            raise ValueError(f"omega_max must be non-negative, got {self.omega_max}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")
        ts = self.t_samples
        if ts.ndim != 1 or ts.size < 1:
            raise ValueError("t_samples must be a non-empty 1-D array")
        if ts[0] != 0.0:
            raise ValueError("t_samples must start at 0")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("t_samples must be strictly increasing")
        for name in ("rtol", "atol", "leak_budget"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")

    def validate_regime(self) -> None:
        """Require the strict far-detuned ordering delta > omega_max > gamma > 0."""
        if not (self.delta > self.omega_max > self.gamma > 0):
            raise ValueError(
                "parameters violate the regime delta > omega_max > gamma > 0: "
                f"delta={self.delta}, omega_max={self.omega_max}, gamma={self.gamma}"
            )


@dataclass(frozen=True)
class MomentumBasis:
    """Truncated ladder of momentum eigenstates n = -n_max .. n_max."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return 2 * self.n_max + 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def index(self, n: int) -> int:
        """Matrix index of momentum level n."""
        if abs(n) > self.n_max:
            raise ValueError(f"level {n} outside basis (n_max={self.n_max})")
        return n + self.n_max


def build_basis(n_max: int) -> MomentumBasis:
    return MomentumBasis(n_max)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix with an exact-Hermiticity tag.

    When ``hermitian`` is set the entries satisfy A == A^dag bitwise;
    constructors achieve that via :func:`hermitized`.
    """

    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if self.hermitian and not np.array_equal(m, m.conj().T):
            raise ValueError("matrix flagged hermitian is not exactly Hermitian")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, OperatorMatrix):
        return op.entries
    return np.asarray(op, dtype=complex)


def kinetic_operator(basis: MomentumBasis) -> OperatorMatrix:
    """Diagonal kinetic energy p^2/2, i.e. <n|K|n> = n^2 / 2."""
    diag = basis.levels.astype(float) ** 2 / 2.0
    return OperatorMatrix(np.diag(diag).astype(complex), hermitian=True)


def raising_operator(basis: MomentumBasis) -> OperatorMatrix:
    """One-recoil raising operator R|n> = |n+1>, clipped at the top level.

    The amplitude that would leave the truncated ladder is dropped, so
    R|n_max> = 0 and R is a partial isometry (R^dag R = 1 - |n_max><n_max|).
    """
    return OperatorMatrix(np.eye(basis.dim, k=-1, dtype=complex), hermitian=False)


def rabi_operator(basis: MomentumBasis, omega_max: float) -> OperatorMatrix:
    """Standing-wave Rabi operator omega_max * sin(kx) in momentum space.

    sin(kx) = (e^{ikx} - e^{-ikx}) / 2i = (R^dag - R) / 2i, which is a
    Hermitian tridiagonal matrix with zero diagonal and off-diagonal
    magnitude omega_max / 2.
    """
    if omega_max < 0:
        raise ValueError(f"omega_max must be non-negative, got {omega_max}")
    r = raising_operator(basis).entries
    return OperatorMatrix(hermitized(omega_max * (r.conj().T - r) / 2j), hermitian=True)


# --------------------------------------------------------------------------
# Spontaneous-emission recoil kicks
# --------------------------------------------------------------------------

def dipole_distribution(u):
    """Dipole radiation distribution along the propagation axis, (3/8)(1 + u^2)."""
    u = np.asarray(u, dtype=float)
    return 0.375 * (1.0 + u * u)


def _dipole_moment(k: int) -> Fraction:
    """Exact k-th moment of the dipole distribution over [-1, 1]."""
    if k % 2:
        return Fraction(0)
    # integral of (3/8)(u^k + u^{k+2}) over [-1, 1]
    return Fraction(3, 8) * (Fraction(2, k + 1) + Fraction(2, k + 3))


@dataclass(frozen=True)
class KickWeights:
    """Three-point recoil distribution on kicks of -1, 0, +1 recoil units."""

    v_minus: float
    v_zero: float
    v_plus: float

    def as_array(self) -> np.ndarray:
        return np.array([self.v_minus, self.v_zero, self.v_plus])


def kick_weights() -> KickWeights:
    """Discretize the dipole distribution to kicks of -1, 0, +1 recoils.

    The three weights are fixed uniquely by matching the zeroth, first and
    second moments of the continuous distribution; the moments are computed
    in exact rational arithmetic (second moment 2/5), giving weights
    1/5, 3/5, 1/5.
    """
    m0, m1, m2 = (_dipole_moment(k) for k in range(3))
    v_minus = (m2 - m1) / 2
    v_plus = (m2 + m1) / 2
    v_zero = m0 - m2
    return KickWeights(float(v_minus), float(v_zero), float(v_plus))


def kick_superoperator(basis: MomentumBasis, weights: KickWeights) -> Callable[[np.ndarray], np.ndarray]:
    """Random-recoil map B acting on center-of-mass operators.

    B rho = v_minus R rho R^dag + v_zero rho + v_plus R^dag rho R, with R
    the clipped raising operator.  The map preserves Hermiticity always and
    the trace whenever rho has no support on the outermost levels.
    """
    r = raising_operator(basis).entries
    r_dag = r.conj().T

    def apply(rho: np.ndarray) -> np.ndarray:
        rho = _as_matrix(rho)
        if rho.shape != r.shape:
            raise ValueError(f"state shape {rho.shape} does not match basis dim {r.shape[0]}")
        return (
            weights.v_minus * (r @ rho @ r_dag)
            + weights.v_zero * rho
            + weights.v_plus * (r_dag @ rho @ r)
        )

    return apply


def lindblad_dissipator(c) -> Callable[[np.ndarray], np.ndarray]:
    """Dissipator of a jump operator c: rho -> c rho c^dag - {c^dag c, rho}/2.

    Trace-annihilating and Hermiticity-preserving for any square c.
    """
    c = _as_matrix(c)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"jump operator must be square, got shape {c.shape}")
    c_dag = c.conj().T
    cdc = c_dag @ c

    def apply(rho: np.ndarray) -> np.ndarray:
        rho = _as_matrix(rho)
        if rho.shape != c.shape:
            raise ValueError(f"state shape {rho.shape} does not match operator shape {c.shape}")
        return c @ rho @ c_dag - 0.5 * (cdc @ rho + rho @ cdc)

    return apply


# --------------------------------------------------------------------------
# Dressed-state machinery
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DressedFunctions:
    """Operator-valued dressed-state quantities for a Hermitian drive.

    ``big_delta`` is the generalized Rabi operator (delta^2 + Omega
    Omega^dag)^(1/2); ``e1``/``e2`` are the dressed eigenenergies
    (delta +/- big_delta)/2; ``sin_theta``/``cos_theta`` the mixing-angle
    functions.  ``a_lowering`` is the dressed lowering operator on the
    combined space, taken in its weak-drive limit |g><e| on the internal
    factor.
    """

    big_delta: OperatorMatrix
    sin_theta: OperatorMatrix
    cos_theta: OperatorMatrix
    e1: OperatorMatrix
    e2: OperatorMatrix
    a_lowering: OperatorMatrix


def dressed_functions(basis: MomentumBasis, params: SimParams, rabi=None) -> DressedFunctions:
    """Evaluate dressed-state operator functions by spectral decomposition.

    The drive must be Hermitian (true for the standing wave); scalar
    formulas are applied to its eigenvalues and reassembled in the
    eigenbasis, so the results are exact up to the eigensolver.
    """
    if rabi is None:
        rabi = rabi_operator(basis, params.omega_max)
    om = _as_matrix(rabi)
    if om.shape != (basis.dim, basis.dim):
        raise ValueError(f"rabi operator shape {om.shape} does not match basis dim {basis.dim}")
    if not np.allclose(om, om.conj().T, rtol=0.0, atol=1e-12):
        raise ValueError("dressed functions require a Hermitian Rabi operator")

    delta = params.delta
    evals, vecs = np.linalg.eigh(om)
    om_sq = evals**2  # spectrum of Omega Omega^dag

    def reassemble(diag: np.ndarray) -> np.ndarray:
        return hermitized((vecs * diag) @ vecs.conj().T)

    big = np.sqrt(delta**2 + om_sq)
    norm = 1.0 / np.sqrt(delta**2 + delta * big + om_sq)
    big_delta = reassemble(big)
    sin_theta = reassemble(evals * norm / np.sqrt(2.0))
    cos_theta = reassemble((big + delta) * norm / np.sqrt(2.0))
    e1 = reassemble((delta + big) / 2.0)
    e2 = reassemble((delta - big) / 2.0)
    a_lowering = np.kron(np.eye(basis.dim, dtype=complex), SIGMA_MINUS)

    return DressedFunctions(
        big_delta=OperatorMatrix(big_delta, hermitian=True),
        sin_theta=OperatorMatrix(sin_theta, hermitian=True),
        cos_theta=OperatorMatrix(cos_theta, hermitian=True),
        e1=OperatorMatrix(e1, hermitian=True),
        e2=OperatorMatrix(e2, hermitian=True),
        a_lowering=OperatorMatrix(a_lowering, hermitian=False),
    )
