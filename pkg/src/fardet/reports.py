"""Delimited output and figure rendering for experiment results.

CSV files carry a reproducibility header of ``# key = value`` comment
lines, then one header row, then full-precision scientific notation so
the curves can be replotted losslessly.  Figures are rendered straight to
files next to the delimited output.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

__all__ = [
    "write_series_csv",
    "write_series_json",
    "write_snapshot_csv",
    "write_validity_csv",
    "write_timings_csv",
    "render_series_figure",
    "render_snapshot_figure",
    "render_trace_figure",
    "render_timing_figure",
    "render_validity_figure",
]

_FMT = "%.17e"

_STYLES = {
    "full": dict(color="black", lw=1.8),
    "standard": dict(color="tab:orange", lw=1.0, ls="--"),
    "sophisticated": dict(color="tab:blue", lw=1.0),
    "secular": dict(color="tab:green", lw=1.0, ls="-."),
    "dressed": dict(color="tab:red", lw=1.0, ls=":"),
}


def _fmt(x: float) -> str:
    return _FMT % x


def _write_table(path: Path, header_lines, columns, rows) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_series_csv(path, run, header_lines=()) -> Path:
    """Time series of momentum probabilities, trace and excited trace.

    Columns are ``t, p_<-n_max> .. p_<n_max>, trace, trace_ee``; the
    ``trace_ee`` field is left empty for motion-only equations.
    """
    path = Path(path)
    columns = ["t"] + [f"p_{n}" for n in run.levels] + ["trace", "trace_ee"]
    rows = []
    for i, t in enumerate(run.times):
        row = [_fmt(t)] + [_fmt(p) for p in run.distributions[i]] + [_fmt(run.trace[i])]
        row.append(_fmt(run.trace_ee[i]) if run.trace_ee is not None else "")
        rows.append(row)
    _write_table(path, header_lines, columns, rows)
    return path


def write_series_json(path, run, config_map) -> Path:
    path = Path(path)
    payload = {
        "config": config_map,
        "equation": run.kind.value,
        "levels": [int(n) for n in run.levels],
        "times": run.times.tolist(),
        "distributions": run.distributions.tolist(),
        "trace": run.trace.tolist(),
        "trace_ee": run.trace_ee.tolist() if run.trace_ee is not None else None,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path


def write_snapshot_csv(path, levels, probabilities, header_lines=()) -> Path:
    """Momentum distribution at a single time, one level per row."""
    path = Path(path)
    rows = [[str(int(n)), _fmt(p)] for n, p in zip(levels, probabilities)]
    _write_table(path, header_lines, ["n", "p"], rows)
    return path


def write_validity_csv(path, times, ratios, trace_ee, header_lines=()) -> Path:
    path = Path(path)
    rows = [
        [_fmt(t), _fmt(r), _fmt(w)]
        for t, r, w in zip(times, ratios, trace_ee)
    ]
    _write_table(path, header_lines, ["t", "ratio", "trace_ee"], rows)
    return path


def write_timings_csv(path, rows, header_lines=()) -> Path:
    """Benchmark table: build and integration wall-clock per equation."""
    path = Path(path)
    columns = ["equation", "build_seconds", "integrate_seconds", "total_seconds", "accepted_steps", "rejected_steps"]
    table = [
        [
            r["equation"],
            "%.6f" % r["build_seconds"],
            "%.6f" % r["integrate_seconds"],
            "%.6f" % (r["build_seconds"] + r["integrate_seconds"]),
            str(r["accepted"]),
            str(r["rejected"]),
        ]
        for r in rows
    ]
    _write_table(path, header_lines, columns, table)
    return path


# --------------------------------------------------------------------------
# Figures
# --------------------------------------------------------------------------

def _style(kind: str) -> dict:
    return _STYLES.get(kind, dict(lw=1.0))


def render_series_figure(path, runs) -> Path:
    """P(0) and P(1) against time for every equation in the run set."""
    path = Path(path)
    fig = Figure(figsize=(7.0, 6.0))
    axes = fig.subplots(2, 1, sharex=True)
    for run in runs:
        zero = run.level_index(0)
        one = run.level_index(1)
        axes[0].plot(run.times, run.distributions[:, zero], label=run.kind.value, **_style(run.kind.value))
        axes[1].plot(run.times, run.distributions[:, one], **_style(run.kind.value))
    axes[0].set_ylabel("P(0)")
    axes[1].set_ylabel("P(1)")
    axes[1].set_xlabel("time (scaled units)")
    axes[0].legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def render_snapshot_figure(path, runs) -> Path:
    """Final momentum distribution on a log scale."""
    path = Path(path)
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    for run in runs:
        ax.semilogy(run.levels, np.maximum(run.distributions[-1], 1e-16),
                    label=run.kind.value, **_style(run.kind.value))
    ax.set_xlabel("momentum (recoil units)")
    ax.set_ylabel(f"P(n) at t = {runs[0].times[-1]:g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def render_trace_figure(path, runs) -> Path:
    """Trace and edge-level population against time (truncation diagnostics)."""
    path = Path(path)
    fig = Figure(figsize=(7.0, 6.0))
    axes = fig.subplots(2, 1, sharex=True)
    for run in runs:
        axes[0].plot(run.times, run.trace, label=run.kind.value, **_style(run.kind.value))
        top = run.level_index(run.levels[-1])
        axes[1].semilogy(run.times, np.maximum(run.distributions[:, top], 1e-18),
                         **_style(run.kind.value))
    axes[0].set_ylabel("trace")
    axes[1].set_ylabel(f"P({run.levels[-1]})")
    axes[1].set_xlabel("time (scaled units)")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def render_timing_figure(path, rows) -> Path:
    path = Path(path)
    fig = Figure(figsize=(7.0, 4.0))
    ax = fig.subplots()
    names = [r["equation"] for r in rows]
    totals = [r["build_seconds"] + r["integrate_seconds"] for r in rows]
    ax.barh(names, totals, color=[_style(n).get("color", "gray") for n in names])
    ax.set_xlabel("wall-clock seconds (build + integrate)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def render_validity_figure(path, series_by_kind) -> Path:
    path = Path(path)
    fig = Figure(figsize=(7.0, 4.0))
    ax = fig.subplots()
    for kind, (times, ratios) in series_by_kind.items():
        ax.plot(times, ratios, label=kind, **_style(kind))
    ax.set_xlabel("time (scaled units)")
    ax.set_ylabel("excited kinetic / decay rate")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path
