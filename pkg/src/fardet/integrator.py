"""Adaptive propagation of density matrices under a vectorized generator.

The stepper is an embedded Dormand-Prince 5(4) pair with the standard
quartic dense-output interpolant, so states are delivered exactly on the
requested sample grid without forcing step endpoints onto it.  After each
accepted step the state is re-symmetrized to kill Hermiticity drift and
its trace is checked against the truncation leak budget.

Sparse matrix-vector products go through scipy; the elementwise stage
assembly, error norm and re-symmetrization are fused single-pass numba
kernels, which is what makes the stiff full equation tractable at the
reference scale.  Everything is single-threaded and free of order-varying
reductions, so identical inputs give bitwise-identical trajectories.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numba
import numpy as np

from .equations import EquationKind, Generator, unvec, vec
from .operators import MomentumBasis, SimParams

__all__ = [
    "DensityState",
    "IntegrationStats",
    "Trajectory",
    "StiffnessError",
    "LeakageError",
    "make_initial_state",
    "integrate",
]


class StiffnessError(RuntimeError):
    """Step size collapsed below the representable floor."""

    def __init__(self, kind, time_, step):
        super().__init__(
            f"step size underflow ({step:.3e}) integrating the {kind} equation at t={time_:.6g}"
        )
        self.kind = kind
        self.time = time_


class LeakageError(RuntimeError):
    """Trace left the allowed band, signalling truncation loss."""

    def __init__(self, kind, time_, trace):
        super().__init__(
            f"trace {trace:.12f} outside budget for the {kind} equation at t={time_:.6g}"
        )
        self.kind = kind
        self.time = time_
        self.trace = trace


@dataclass(frozen=True)
class DensityState:
    """Hermitian unit-trace state at a point in time."""

    matrix: np.ndarray
    time: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    wall_seconds: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    """States interpolated onto the requested sample grid."""

    samples: tuple
    stats: IntegrationStats

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])

    @property
    def final(self) -> DensityState:
        return self.samples[-1]


def make_initial_state(basis: MomentumBasis, internal: str | None = None) -> DensityState:
    """Zero-momentum state |0><0|, optionally tensored with |g> or |e>.

    ``internal`` is None for motion-only equations, or one of ``"ground"``
    / ``"excited"`` for the variants that track the electronic state.
    """
    d = basis.dim
    com = np.zeros((d, d), dtype=complex)
    com[basis.index(0), basis.index(0)] = 1.0
    if internal is None:
        return DensityState(com, 0.0)
    if internal == "ground":
        block = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    elif internal == "excited":
        block = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    else:
        raise ValueError(f"internal must be None, 'ground' or 'excited', got {internal!r}")
    return DensityState(np.kron(com, block), 0.0)


# Dormand-Prince 5(4) dense-output coefficients (quartic interpolant).
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ],
    dtype=complex,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@numba.njit(cache=True)
def _stage_input(ys, y, k, h, i):
    """ys = y + h * sum_j a[i, j] k[j] for the Dormand-Prince tableau."""
    n = y.shape[0]
    if i == 1:
        for r in range(n):
            ys[r] = y[r] + h * (0.2 * k[0, r])
    elif i == 2:
        for r in range(n):
            ys[r] = y[r] + h * ((3.0 / 40.0) * k[0, r] + (9.0 / 40.0) * k[1, r])
    elif i == 3:
        for r in range(n):
            ys[r] = y[r] + h * (
                (44.0 / 45.0) * k[0, r] - (56.0 / 15.0) * k[1, r] + (32.0 / 9.0) * k[2, r]
            )
    elif i == 4:
        for r in range(n):
            ys[r] = y[r] + h * (
                (19372.0 / 6561.0) * k[0, r]
                - (25360.0 / 2187.0) * k[1, r]
                + (64448.0 / 6561.0) * k[2, r]
                - (212.0 / 729.0) * k[3, r]
            )
    elif i == 5:
        for r in range(n):
            ys[r] = y[r] + h * (
                (9017.0 / 3168.0) * k[0, r]
                - (355.0 / 33.0) * k[1, r]
                + (46732.0 / 5247.0) * k[2, r]
                + (49.0 / 176.0) * k[3, r]
                - (5103.0 / 18656.0) * k[4, r]
            )
    else:
        for r in range(n):
            ys[r] = y[r] + h * (
                (35.0 / 384.0) * k[0, r]
                + (500.0 / 1113.0) * k[2, r]
                + (125.0 / 192.0) * k[3, r]
                - (2187.0 / 6784.0) * k[4, r]
                + (11.0 / 84.0) * k[5, r]
            )


@numba.njit(cache=True)
def _finish_step(y, k, h, rtol, atol, y_new):
    """Fill y_new from the 5th-order weights; return the scaled max error norm.

    The norm is max_i |err_i| / (atol + rtol * max(|y_i|, |y_new_i|)), so
    components that are exactly zero in both states contribute nothing.
    That keeps equations embedding the same dynamics in spaces of
    different size on identical step sequences.
    """
    n = y.shape[0]
    norm = 0.0
    for r in range(n):
        acc = (
            (35.0 / 384.0) * k[0, r]
            + (500.0 / 1113.0) * k[2, r]
            + (125.0 / 192.0) * k[3, r]
            - (2187.0 / 6784.0) * k[4, r]
            + (11.0 / 84.0) * k[5, r]
        )
        ev = (
            (71.0 / 57600.0) * k[0, r]
            - (71.0 / 16695.0) * k[2, r]
            + (71.0 / 1920.0) * k[3, r]
            - (17253.0 / 339200.0) * k[4, r]
            + (22.0 / 525.0) * k[5, r]
            - (1.0 / 40.0) * k[6, r]
        )
        yn = y[r] + h * acc
        y_new[r] = yn
        sc = atol + rtol * max(abs(y[r]), abs(yn))
        e = abs(h * ev) / sc
        if e > norm:
            norm = e
    return norm


@numba.njit(cache=True)
def _resymmetrize(y, dim):
    """In-place Hermitian projection of a column-stacked matrix; returns its trace."""
    tr = 0.0
    for j in range(dim):
        tr += y[j + j * dim].real
        y[j + j * dim] = complex(y[j + j * dim].real, 0.0)
        for i in range(j + 1, dim):
            a = y[i + j * dim]
            b = y[j + i * dim]
            v = 0.5 * (a + np.conj(b))
            y[i + j * dim] = v
            y[j + i * dim] = np.conj(v)
    return tr


def integrate(gen: Generator, rho0: DensityState, params: SimParams) -> Trajectory:
    """Propagate ``rho0`` under ``gen``, sampling at ``params.t_samples``.

    Local error per step is held to ``rtol`` relative / ``atol`` absolute
    in a scaled max norm.  The trace is monitored after every accepted
    step: no equation may overshoot 1, and every kind except the secular
    one must stay above ``1 - leak_budget`` (secular trace decay is the
    expected physical artifact of that approximation).
    """
    d = gen.dim_state
    if rho0.matrix.shape != (d, d):
        raise ValueError(
            f"initial state dim {rho0.matrix.shape[0]} does not match generator dim {d}"
        )
    if not np.allclose(rho0.matrix, rho0.matrix.conj().T, rtol=0.0, atol=1e-10):
        raise ValueError("initial state must be Hermitian")
    tr0 = float(np.real(np.trace(rho0.matrix)))
    if abs(tr0 - 1.0) > 1e-9:
        raise ValueError(f"initial state must have unit trace, got {tr0}")
    ts = params.t_samples
    if rho0.time != ts[0]:
        raise ValueError(f"initial state time {rho0.time} does not match first sample {ts[0]}")

    started = time.perf_counter()
    stats = IntegrationStats()
    matrix = gen.matrix
    n = d * d

    # Private working copy: the swap buffers below are mutated in place.
    y = vec(rho0.matrix).copy()
    t = float(ts[0])
    t_end = float(ts[-1])
    samples = [DensityState(unvec(y.copy(), d), t)]
    next_sample = 1

    if next_sample >= len(ts):
        stats.wall_seconds = time.perf_counter() - started
        return Trajectory(tuple(samples), stats)

    if gen.stiffness_scale > 0:
        h = min(0.1 / gen.stiffness_scale, t_end - t)
    else:
        h = t_end - t

    k = np.empty((7, n), dtype=complex)
    ys = np.empty(n, dtype=complex)
    y_new = np.empty(n, dtype=complex)
    k[0] = matrix @ y
    rtol, atol = params.rtol, params.atol
    secular = gen.kind == EquationKind.SECULAR
    lower = 1.0 - params.leak_budget
    upper = 1.0 + 1e-9

    while t < t_end:
        clamped = h >= t_end - t
        if clamped:
            h = t_end - t
        if h < 1e-14 * max(abs(t), 1.0):
            raise StiffnessError(gen.kind.value, t, h)

        for i in range(1, 7):
            _stage_input(ys, y, k, h, i)
            k[i] = matrix @ ys
        # FSAL: stage 7 is the derivative at (t + h, y_new).
        err_norm = _finish_step(y, k, h, rtol, atol, y_new)

        if err_norm > 1.0:
            stats.rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err_norm**-0.2)
            continue

        t_new = t_end if clamped else t + h

        # Deliver any samples inside this step via the dense interpolant.
        if next_sample < len(ts) and ts[next_sample] <= t_new:
            q = k.T @ _P
            while next_sample < len(ts) and ts[next_sample] <= t_new:
                ts_i = ts[next_sample]
                if ts_i == t_new:
                    y_s = y_new.copy()
                else:
                    theta = (ts_i - t) / h
                    y_s = y + h * (q @ (theta ** np.arange(1, 5)))
                _resymmetrize(y_s, d)
                samples.append(DensityState(unvec(y_s, d), float(ts_i)))
                next_sample += 1

        y, y_new = y_new, y
        tr = _resymmetrize(y, d)
        t = t_new
        stats.accepted += 1

        if tr > upper or (not secular and tr < lower):
            raise LeakageError(gen.kind.value, t, tr)

        k[0] = k[6]
        if err_norm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err_norm**-0.2))
        h *= factor

    stats.wall_seconds = time.perf_counter() - started
    return Trajectory(tuple(samples), stats)
