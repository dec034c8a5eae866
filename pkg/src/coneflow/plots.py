"""Two-column plot data derived from a flow trace."""

import os

import numpy as np

from .core.io import dump_plot_data
from .core.types import *
from .monotone import self_similar_residual
from .tracing import FlowTrace

PlotSeries = Tuple[FloatArray, FloatArray, Tuple[str, str]]


def theta_series(trace: FlowTrace) -> PlotSeries:
    """Huisken functional against t, over the rows where it was evaluated."""
    t, theta = trace.column("t"), trace.column("theta")
    keep = np.isfinite(theta)
    return t[keep], theta[keep], ("t", "theta")


def _before(trace: FlowTrace, T: float) -> Tuple[FloatArray, FloatArray]:
    t = trace.column("t")
    keep = t < T
    return t[keep], keep


def scaled_curvature_series(trace: FlowTrace, T: float) -> PlotSeries:
    """sup |II|^2 (T - t) against t; bounded exactly for type I blow-up."""
    t, keep = _before(trace, T)
    return t, trace.column("sup_II2")[keep] * (T - t), ("t", "sup_II2_times_tau")


def radial_ratio_series(trace: FlowTrace, T: float) -> PlotSeries:
    """min r^2 / (T - t) against t; stays in a positive band for type I_c."""
    t, keep = _before(trace, T)
    return t, trace.column("min_r2")[keep] / (T - t), ("t", "min_r2_over_tau")


def self_similar_series(trace: FlowTrace, T: float) -> PlotSeries:
    """Pointwise max of |F^perp / (2(T - t)) + H| at the stored snapshots before T."""
    t, values = [], []
    for index, snapshot in sorted(trace.snapshots.items()):
        row_t = trace.rows[index].t
        if row_t < T:
            t.append(row_t)
            values.append(self_similar_residual(snapshot, row_t, T)[1])
    return np.asarray(t, dtype=float), np.asarray(values, dtype=float), ("t", "selfsim_max_resid")


def residual_series(trace: FlowTrace, column: str = "lemma1_resid") -> PlotSeries:
    """A residual column against t, skipping rows without a value."""
    t, values = trace.column("t"), trace.column(column)
    keep = np.isfinite(values)
    return t[keep], values[keep], ("t", column)


def flow_plots(trace: FlowTrace, T: Optional[float]) -> Dict[str, PlotSeries]:
    """All plot series of a run, keyed by file stem.

    The series normalized by T - t are only produced when a blow-up time is known.
    """
    plots = {
        "theta": theta_series(trace),
        "lemma1_resid": residual_series(trace, "lemma1_resid"),
        "lemma2_resid": residual_series(trace, "lemma2_resid"),
        "area_rate_resid": residual_series(trace, "area_rate_resid"),
    }
    if T is not None:
        plots["scaled_curvature"] = scaled_curvature_series(trace, T)
        plots["radial_ratio"] = radial_ratio_series(trace, T)
        if trace.snapshots:
            plots["selfsim_resid"] = self_similar_series(trace, T)
    return plots


def dump_flow_plots(trace: FlowTrace, T: Optional[float], folder: str) -> List[str]:
    """Write every plot series as `<folder>/plot_<name>.csv` and return the paths."""
    files = []
    for name, (x, y, names) in flow_plots(trace, T).items():
        file = os.path.join(folder, f"plot_{name}.csv")
        dump_plot_data(x, y, names, file)
        files.append(file)
    return files
