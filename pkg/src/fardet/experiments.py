"""Named experiment orchestration: short_time, long_time, benchmark, validity.

Each experiment integrates the selected equations on one sample grid,
distills trajectories into series (momentum distributions, traces,
validity ratios), writes delimited output plus figures, and prints a
summary.  Trajectories are distilled one equation at a time so the
largest runs never hold more than one set of sampled states in memory.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import reports
from .equations import EquationKind, Generator, build_generator
from .integrator import Trajectory, integrate, make_initial_state
from .observables import (
    ObservableSeries,
    excited_block,
    excited_state_estimate,
    momentum_distribution,
    ratio_from_excited_block,
    series_compare,
    trace_decay_rate,
)
from .operators import MomentumBasis, SimParams, rabi_operator

__all__ = [
    "EXPERIMENTS",
    "ALL_KINDS",
    "RunConfig",
    "EquationRun",
    "run_equation",
    "run_experiment",
]

EXPERIMENTS = ("short_time", "long_time", "benchmark", "validity")
ALL_KINDS = tuple(EquationKind)

# Experiments default to the windows the comparisons are defined on.
DEFAULT_T_MAX = {"short_time": 2.0, "long_time": 8.0, "benchmark": 8.0, "validity": 8.0}
DEFAULT_SAMPLES = 401


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one command-line invocation."""

    equations: tuple
    experiment: str
    delta: float
    omega_max: float
    gamma: float
    n_max: int
    t_max: float
    samples: int
    rtol: float
    atol: float
    out: Path
    fmt: str = "csv"
    figures: bool = True

    def sim_params(self) -> SimParams:
        return SimParams(
            delta=self.delta,
            omega_max=self.omega_max,
            gamma=self.gamma,
            n_max=self.n_max,
            t_samples=np.linspace(0.0, self.t_max, self.samples),
            rtol=self.rtol,
            atol=self.atol,
        )

    def header_map(self) -> dict:
        return {
            "equation": "+".join(k.value for k in self.equations),
            "experiment": self.experiment,
            "delta": self.delta,
            "omega-max": self.omega_max,
            "gamma": self.gamma,
            "n-max": self.n_max,
            "t-max": self.t_max,
            "samples": self.samples,
            "rtol": self.rtol,
            "atol": self.atol,
            "out": str(self.out),
            "format": self.fmt,
            "figures": self.figures,
        }

    def header_lines(self) -> list:
        return [f"{key} = {value}" for key, value in self.header_map().items()]


@dataclass
class EquationRun:
    """Distilled result of integrating one equation on the sample grid."""

    kind: EquationKind
    levels: np.ndarray
    times: np.ndarray
    distributions: np.ndarray  # (samples, dim)
    trace: np.ndarray
    trace_ee: np.ndarray | None
    validity: np.ndarray | None
    excited_weight: np.ndarray | None  # trace of the block behind `validity`
    min_eigenvalue: np.ndarray | None
    final_matrix: np.ndarray
    build_seconds: float
    integrate_seconds: float
    accepted: int
    rejected: int

    def level_index(self, n: int) -> int:
        return int(n) + (len(self.levels) - 1) // 2

    def probability_series(self, n: int) -> ObservableSeries:
        return ObservableSeries(
            label=f"{self.kind.value}:p_{n}",
            times=self.times,
            values=self.distributions[:, self.level_index(n)],
        )


def _distill(
    kind: EquationKind,
    traj: Trajectory,
    basis: MomentumBasis,
    params: SimParams,
    gen: Generator,
    build_seconds: float,
    collect_validity: bool,
    collect_min_eig: bool,
) -> EquationRun:
    n_samples = len(traj.samples)
    dim = basis.dim
    dists = np.empty((n_samples, dim))
    trace = np.empty(n_samples)
    trace_ee = np.empty(n_samples) if gen.has_internal else None
    validity = np.empty(n_samples) if collect_validity else None
    excited_weight = np.empty(n_samples) if collect_validity else None
    min_eig = np.empty(n_samples) if collect_min_eig else None
    rabi = rabi_operator(basis, params.omega_max).entries if collect_validity else None

    for i, state in enumerate(traj.samples):
        m = state.matrix
        dists[i] = momentum_distribution(state, negativity_floor=10 * params.atol)
        trace[i] = float(np.real(np.trace(m)))
        if gen.has_internal:
            ee = excited_block(m)
            trace_ee[i] = float(np.real(np.trace(ee)))
        if collect_validity:
            block = ee if gen.has_internal else excited_state_estimate(m, rabi, params.delta)
            excited_weight[i] = float(np.real(np.trace(block)))
            try:
                validity[i] = ratio_from_excited_block(block, params.gamma)
            except ValueError:
                validity[i] = np.nan
        if collect_min_eig:
            min_eig[i] = float(np.linalg.eigvalsh(m)[0])

    return EquationRun(
        kind=kind,
        levels=basis.levels,
        times=traj.times,
        distributions=dists,
        trace=trace,
        trace_ee=trace_ee,
        validity=validity,
        excited_weight=excited_weight,
        min_eigenvalue=min_eig,
        final_matrix=traj.samples[-1].matrix,
        build_seconds=build_seconds,
        integrate_seconds=traj.stats.wall_seconds,
        accepted=traj.stats.accepted,
        rejected=traj.stats.rejected,
    )


def run_equation(
    kind: EquationKind,
    basis: MomentumBasis,
    params: SimParams,
    collect_validity: bool = False,
    collect_min_eig: bool = False,
) -> EquationRun:
    """Build, integrate and distill one equation; the trajectory is dropped."""
    t0 = time.perf_counter()
    gen = build_generator(kind, basis, params)
    build_seconds = time.perf_counter() - t0
    rho0 = make_initial_state(basis, "ground" if gen.has_internal else None)
    traj = integrate(gen, rho0, params)
    return _distill(kind, traj, basis, params, gen, build_seconds, collect_validity, collect_min_eig)


# --------------------------------------------------------------------------
# Experiment drivers
# --------------------------------------------------------------------------

def _emit(config: RunConfig, run: EquationRun, stem: str) -> list:
    files = []
    header = config.header_lines()
    if config.fmt == "json":
        files.append(reports.write_series_json(config.out / f"{stem}.json", run, config.header_map()))
    else:
        files.append(reports.write_series_csv(config.out / f"{stem}.csv", run, header))
    return files


def _log(line: str) -> None:
    print(line, flush=True)


def _run_selected(config: RunConfig, kinds, collect_validity=False) -> dict:
    basis = MomentumBasis(config.n_max)
    params = config.sim_params()
    runs = {}
    for kind in kinds:
        _log(f"[{config.experiment}] integrating {kind.value} ...")
        run = run_equation(kind, basis, params, collect_validity=collect_validity)
        _log(
            f"[{config.experiment}] {kind.value}: build {run.build_seconds:.3f} s, "
            f"integrate {run.integrate_seconds:.3f} s, "
            f"steps {run.accepted} (+{run.rejected} rejected), "
            f"final trace {run.trace[-1]:.9f}"
        )
        runs[kind] = run
    return runs


def _experiment_short_time(config: RunConfig) -> int:
    kinds = list(config.equations)
    # The dressed/sophisticated equivalence is part of the report whenever
    # the dressed equation is selected.
    extra = []
    if EquationKind.DRESSED in kinds and EquationKind.SOPHISTICATED not in kinds:
        extra.append(EquationKind.SOPHISTICATED)
    runs = _run_selected(config, kinds + extra)

    files = []
    for kind in kinds:
        files += _emit(config, runs[kind], f"short_time_{kind.value}")
    if config.figures:
        files.append(reports.render_series_figure(
            config.out / "short_time_p0_p1.png", [runs[k] for k in kinds]))

    _log("")
    _log("summary: short_time")
    full = runs.get(EquationKind.FULL)
    for kind in kinds:
        if full is not None and kind != EquationKind.FULL:
            cmp0 = series_compare(runs[kind].probability_series(0), full.probability_series(0))
            _log(
                f"  {kind.value} vs full on P(0): max |diff| {cmp0.max_abs_diff:.3e}, "
                f"lag {cmp0.lag:+.4f}"
            )
    if EquationKind.DRESSED in runs and EquationKind.SOPHISTICATED in runs:
        diff = np.max(np.abs(
            runs[EquationKind.DRESSED].distributions
            - runs[EquationKind.SOPHISTICATED].distributions
        ))
        _log(f"  dressed vs sophisticated: max |diff| over all P(n, t) = {diff:.3e}")
    _report_files(files)
    return 0


def _experiment_long_time(config: RunConfig) -> int:
    kinds = list(config.equations)
    runs = _run_selected(config, kinds)
    files = []
    header = config.header_lines()
    for kind in kinds:
        run = runs[kind]
        files += _emit(config, run, f"long_time_{kind.value}")
        files.append(reports.write_snapshot_csv(
            config.out / f"long_time_snapshot_{kind.value}.csv",
            run.levels, run.distributions[-1], header))
    if config.figures:
        run_list = [runs[k] for k in kinds]
        files.append(reports.render_snapshot_figure(config.out / "long_time_distribution.png", run_list))
        files.append(reports.render_trace_figure(config.out / "long_time_trace.png", run_list))

    _log("")
    _log("summary: long_time")
    for kind in kinds:
        run = runs[kind]
        try:
            rate = trace_decay_rate(run.times, run.trace, t_min=run.times[-1] / 16)
        except ValueError:
            rate = float("nan")
        top = run.level_index(run.levels[-1])
        _log(
            f"  {kind.value}: trace(t={run.times[-1]:g}) = {run.trace[-1]:.9f}, "
            f"decay rate {rate:.3e} /unit, P({run.levels[-1]}) final {run.distributions[-1, top]:.3e}"
        )
    _report_files(files)
    return 0


def _experiment_benchmark(config: RunConfig) -> int:
    # The benchmark always reruns all five equations, sequentially on a
    # dedicated thread, timing construction and integration separately.
    runs = _run_selected(config, list(ALL_KINDS))
    rows = [
        {
            "equation": kind.value,
            "build_seconds": runs[kind].build_seconds,
            "integrate_seconds": runs[kind].integrate_seconds,
            "accepted": runs[kind].accepted,
            "rejected": runs[kind].rejected,
        }
        for kind in ALL_KINDS
    ]
    files = [reports.write_timings_csv(config.out / "benchmark_timings.csv", rows, config.header_lines())]
    for kind in ALL_KINDS:
        files += _emit(config, runs[kind], f"benchmark_{kind.value}")
    if config.figures:
        files.append(reports.render_timing_figure(config.out / "benchmark_timings.png", rows))

    def total(kind):
        return runs[kind].build_seconds + runs[kind].integrate_seconds

    adiabatic = max(total(EquationKind.STANDARD), total(EquationKind.SOPHISTICATED))
    ordering_ok = adiabatic < total(EquationKind.SECULAR) < total(EquationKind.FULL)
    _log("")
    _log("summary: benchmark (wall-clock seconds, build + integrate)")
    for kind in ALL_KINDS:
        _log(f"  {kind.value:<14s} {total(kind):10.3f}")
    _log(
        "  ordering adiabatic < secular < full: "
        + ("OK" if ordering_ok else "VIOLATED")
    )
    _log(
        f"  secular / adiabatic = {total(EquationKind.SECULAR) / adiabatic:.2f}, "
        f"full / adiabatic = {total(EquationKind.FULL) / adiabatic:.2f}"
    )
    _report_files(files)
    return 0


def _experiment_validity(config: RunConfig) -> int:
    kinds = list(config.equations)
    runs = _run_selected(config, kinds, collect_validity=True)
    files = []
    header = config.header_lines()
    series = {}
    for kind in kinds:
        run = runs[kind]
        files.append(reports.write_validity_csv(
            config.out / f"validity_{kind.value}.csv",
            run.times, run.validity, run.excited_weight, header))
        series[kind.value] = (run.times, run.validity)
    if config.figures:
        files.append(reports.render_validity_figure(config.out / "validity_ratio.png", series))

    _log("")
    _log("summary: validity (time-averaged ratio over the second half of the run)")
    for kind in kinds:
        run = runs[kind]
        mask = (run.times >= 0.5) & ~np.isnan(run.validity)
        mean = float(np.mean(run.validity[mask])) if mask.any() else float("nan")
        _log(f"  {kind.value}: mean ratio t in [0.5, {run.times[-1]:g}] = {mean:.4f}")
    _report_files(files)
    return 0


def _report_files(files) -> None:
    _log("")
    for path in files:
        _log(f"wrote {path}")


_DRIVERS = {
    "short_time": _experiment_short_time,
    "long_time": _experiment_long_time,
    "benchmark": _experiment_benchmark,
    "validity": _experiment_validity,
}


def run_experiment(config: RunConfig) -> int:
    """Run one named experiment; returns the process exit code."""
    config.out.mkdir(parents=True, exist_ok=True)
    for line in config.header_lines():
        _log(f"# {line}")
    return _DRIVERS[config.experiment](config)
