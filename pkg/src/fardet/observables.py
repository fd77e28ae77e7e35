"""Measured quantities extracted from propagated states and trajectories."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .integrator import DensityState
from .operators import SimParams

__all__ = [
    "PositivityWarning",
    "ObservableSeries",
    "SeriesComparison",
    "partial_trace_internal",
    "excited_block",
    "ground_block",
    "ratio_from_excited_block",
    "momentum_distribution",
    "validity_ratio",
    "excited_state_estimate",
    "fluorescence_estimate",
    "trace_decay_rate",
    "series_compare",
]


class PositivityWarning(UserWarning):
    """A sampled state developed a diagonal entry below the solver floor."""


@dataclass(frozen=True)
class ObservableSeries:
    """Time-stamped scalar (or vector) observable values."""

    label: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1:
            raise ValueError("times must be 1-D")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if values.shape[0] != times.size:
            raise ValueError(
                f"values length {values.shape[0]} does not match times length {times.size}"
            )


def _square(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _has_internal(matrix: np.ndarray) -> bool:
    # Motional bases have odd dimension 2 n_max + 1; the electronic factor
    # doubles it, so parity identifies the layout.
    return matrix.shape[0] % 2 == 0


def partial_trace_internal(matrix: np.ndarray) -> np.ndarray:
    """Trace out the electronic factor of a combined state."""
    m = _square(matrix)
    d = m.shape[0] // 2
    return m.reshape(d, 2, d, 2).trace(axis1=1, axis2=3)


def excited_block(matrix: np.ndarray) -> np.ndarray:
    """Excited-manifold block rho_ee of a combined state."""
    m = _square(matrix)
    return m[1::2, 1::2]


def ground_block(matrix: np.ndarray) -> np.ndarray:
    """Ground-manifold block rho_gg of a combined state."""
    m = _square(matrix)
    return m[0::2, 0::2]


def momentum_distribution(state: DensityState | np.ndarray, negativity_floor: float = 1e-9) -> np.ndarray:
    """Momentum-level probabilities P(n) of a state.

    For combined states the electronic factor is traced out first.  The
    returned vector sums to the trace of the state.  Entries below
    ``-negativity_floor`` indicate loss of positivity (solver error or
    truncation) and raise a :class:`PositivityWarning`; values are never
    clamped.
    """
    matrix = state.matrix if isinstance(state, DensityState) else np.asarray(state)
    m = _square(matrix)
    if _has_internal(m):
        m = partial_trace_internal(m)
    p = np.real(np.diag(m)).copy()
    worst = p.min()
    if worst < -negativity_floor:
        warnings.warn(
            f"momentum distribution has negative entry {worst:.3e}", PositivityWarning
        )
    return p


def validity_ratio(state: DensityState | np.ndarray, gamma: float, floor: float = 1e-12) -> float:
    """Excited-state kinetic energy over decay rate, Tr[rho_ee p^2/2] / (gamma Tr[rho_ee]).

    Small values justify dropping the kinetic term when eliminating the
    excited state.  Raises if the excited population is below ``floor``.
    """
    matrix = state.matrix if isinstance(state, DensityState) else np.asarray(state)
    m = _square(matrix)
    if not _has_internal(m):
        raise ValueError("validity_ratio requires a state with an internal factor")
    return ratio_from_excited_block(excited_block(m), gamma, floor=floor)


def ratio_from_excited_block(rho_ee: np.ndarray, gamma: float, floor: float = 1e-12) -> float:
    """Validity ratio evaluated directly on an excited-manifold block."""
    rho_ee = _square(rho_ee)
    d = rho_ee.shape[0]
    n = np.arange(d) - (d - 1) // 2
    population = float(np.real(np.trace(rho_ee)))
    if population <= floor:
        raise ValueError(f"excited population {population:.3e} below floor {floor:.0e}")
    kinetic = float(np.real(np.diag(rho_ee)) @ (n.astype(float) ** 2 / 2.0))
    return kinetic / (gamma * population)


def excited_state_estimate(rho_com: np.ndarray, rabi: np.ndarray, delta: float) -> np.ndarray:
    """Adiabatic estimate of the excited block, Omega rho Omega^dag / 4 delta^2.

    This is the excited population implied by a motion-only trajectory,
    consistent with the elimination that produced the sophisticated
    adiabatic equation.
    """
    rho = _square(rho_com)
    om = np.asarray(rabi, dtype=complex)
    return om @ rho @ om.conj().T / (4.0 * delta**2)


def fluorescence_estimate(params: SimParams, omega_sq_bar: float) -> float:
    """Leading-order photon scattering rate gamma * mean(Omega^2) / 4 delta^2.

    ``omega_sq_bar`` is the effective time-averaged squared Rabi frequency,
    somewhere in (0, omega_max^2]; its reciprocal rate is the expected
    time between spontaneous emissions.
    """
    if not 0.0 < omega_sq_bar <= params.omega_max**2:
        raise ValueError(
            f"omega_sq_bar must lie in (0, omega_max^2], got {omega_sq_bar}"
        )
    return params.gamma * omega_sq_bar / (4.0 * params.delta**2)


def trace_decay_rate(times: np.ndarray, traces: np.ndarray, t_min: float = 0.0) -> float:
    """Exponential decay rate of a trace series from a log-linear fit.

    Returns the fitted rate r in trace ~ exp(-r t); positive means decay.
    """
    times = np.asarray(times, dtype=float)
    traces = np.asarray(traces, dtype=float)
    mask = (times >= t_min) & (traces > 0)
    if mask.sum() < 2:
        raise ValueError("need at least two positive samples to fit a decay rate")
    slope = np.polyfit(times[mask], np.log(traces[mask]), 1)[0]
    return -float(slope)


@dataclass(frozen=True)
class SeriesComparison:
    max_abs_diff: float
    lag: float


def series_compare(a: ObservableSeries, b: ObservableSeries, max_shift: float = 0.5) -> SeriesComparison:
    """Largest pointwise gap and phase lead between two scalar series.

    Both series must share one uniform time grid.  The lag is the shift
    maximizing the mean-removed, overlap-normalized cross-correlation over
    shifts within ``max_shift`` time units; a positive lag means ``a``
    leads ``b`` (features of ``a`` happen earlier).  Exact ties break
    toward zero lag, so comparing a constant series with itself gives 0.
    """
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise ValueError("series must share an identical time grid")
    if a.values.ndim != 1 or b.values.ndim != 1:
        raise ValueError("series_compare expects scalar-valued series")

    va = np.asarray(a.values, dtype=float)
    vb = np.asarray(b.values, dtype=float)
    max_abs_diff = float(np.max(np.abs(va - vb))) if va.size else 0.0

    if va.size < 2:
        return SeriesComparison(max_abs_diff, 0.0)
    dt = float(a.times[1] - a.times[0])
    max_steps = min(int(np.floor(max_shift / dt)), va.size - 1)

    a0 = va - va.mean()
    b0 = vb - vb.mean()
    best_corr = -np.inf
    best_steps = 0
    for s in range(-max_steps, max_steps + 1):
        # correlate a(t) with b(t + s dt): positive s probes "a leads b"
        if s >= 0:
            prod = a0[: va.size - s] * b0[s:]
        else:
            prod = a0[-s:] * b0[: va.size + s]
        corr = prod.mean()
        if corr > best_corr or (corr == best_corr and abs(s) < abs(best_steps)):
            best_corr = corr
            best_steps = s
    return SeriesComparison(max_abs_diff, best_steps * dt)
