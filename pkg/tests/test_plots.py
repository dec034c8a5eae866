import os

import numpy as np
import pytest

from coneflow.core.io import load_csv
from coneflow.exemplars import shrinking_cross_section
from coneflow.flow import FlowSettings, run
from coneflow.geometry import Circle
from coneflow.plots import dump_flow_plots, flow_plots, theta_series


@pytest.fixture(scope="module")
def trace():
    settings = FlowSettings.from_configs(horizon=0.5, t_max=0.2, trace_every=5)
    return run(shrinking_cross_section(Circle(), 1.0, 0.0, 32), settings)


def test_theta_is_flat_on_the_shrinker(trace):
    t, theta, names = theta_series(trace)
    assert names == ("t", "theta")
    assert len(t) > 2
    assert np.ptp(theta) < 1e-2 * theta[0]


def test_normalized_series_need_a_blowup_time(trace):
    assert set(flow_plots(trace, None)) == {
        "theta",
        "lemma1_resid",
        "lemma2_resid",
        "area_rate_resid",
    }
    plots = flow_plots(trace, 0.5)
    _, scaled, _ = plots["scaled_curvature"]
    _, ratio, _ = plots["radial_ratio"]
    np.testing.assert_allclose(scaled, 0.5, rtol=1e-2)
    np.testing.assert_allclose(ratio, 2.0, rtol=1e-2)


def test_self_similar_residual_stays_small_on_the_shrinker(trace):
    t, values, names = flow_plots(trace, 0.5)["selfsim_resid"]
    assert names == ("t", "selfsim_max_resid")
    assert len(t) == len(trace.snapshots)
    assert values[0] < 1e-10
    assert values.max() < 1e-2


def test_dump_flow_plots(trace, tmp_path):
    files = dump_flow_plots(trace, 0.5, str(tmp_path))
    assert sorted(os.path.basename(f) for f in files) == [
        "plot_area_rate_resid.csv",
        "plot_lemma1_resid.csv",
        "plot_lemma2_resid.csv",
        "plot_radial_ratio.csv",
        "plot_scaled_curvature.csv",
        "plot_selfsim_resid.csv",
        "plot_theta.csv",
    ]
    header, values = load_csv(str(tmp_path / "plot_radial_ratio.csv"))
    assert header == ["t", "min_r2_over_tau"]
    assert values.shape[1] == 2
    np.testing.assert_allclose(values[:, 1], 2.0, rtol=1e-2)
