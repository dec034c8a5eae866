import numpy as np
import pytest

from coneflow.exemplars import offcenter_circle, shrinking_cross_section
from coneflow.flow import FlowSettings, FlowState, run
from coneflow.geometry import Circle, FlatTorus
from coneflow.rescale import (
    parabolic_rescale,
    rescaled_trajectory,
    scaled_curvature_series,
    verify_rescale_identities,
)


@pytest.mark.parametrize("lam", [2.0, 3.0, 10.0])
def test_identities_on_shrinking_circle(lam):
    t, T = 0.1, 0.5
    im = shrinking_cross_section(Circle(), 1.0, t, 64)
    report = verify_rescale_identities(FlowState(t=t, immersion=im), parabolic_rescale(im, lam, t, T), lam, T)
    assert report.s == pytest.approx(lam**2 * (t - T))
    assert report.max_deviation() < 1e-10


@pytest.mark.parametrize("lam", [3.0, 10.0])
def test_vanishing_base_curvature_is_not_amplified(lam):
    t, T = 0.1, 0.5
    im = shrinking_cross_section(Circle(), 1.0, t, 32)
    report = verify_rescale_identities(FlowState(t=t, immersion=im), parabolic_rescale(im, lam, t, T), lam, T)
    assert report.H_base < 1e-10
    assert report.H_radial < 1e-10
    assert report.max_deviation() < 1e-10


def test_identities_hold_without_symmetry():
    im = offcenter_circle(3.0, 0.5, nodes=64)
    lam, T = 3.0, 0.125
    report = verify_rescale_identities(FlowState(t=0.0, immersion=im), parabolic_rescale(im, lam, 0.0, T), lam, T)
    assert report.theta is not None
    assert report.max_deviation() < 1e-9


def test_identities_on_torus_cross_section():
    im = shrinking_cross_section(FlatTorus(), 1.0, 0.0, (16, 16))
    lam, T = 2.0, 0.25
    report = verify_rescale_identities(
        FlowState(t=0.0, immersion=im), parabolic_rescale(im, lam, 0.0, T), lam, T, with_theta=False
    )
    assert report.theta is None
    assert report.max_deviation() < 1e-10


def test_rescale_only_scales_radius():
    im = offcenter_circle(3.0, 0.5, nodes=32)
    scaled, s = parabolic_rescale(im, 2.0, 0.05, 0.125)
    np.testing.assert_array_equal(scaled.base, im.base)
    np.testing.assert_allclose(scaled.r, 2.0 * im.r)
    assert s == pytest.approx(4.0 * (0.05 - 0.125))


def test_rescale_rejects_bad_arguments():
    im = shrinking_cross_section(Circle(), 1.0, 0.0, 32)
    with pytest.raises(ValueError):
        parabolic_rescale(im, 0.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        parabolic_rescale(im, 2.0, 0.5, 0.5)


def test_scaled_curvature_is_invariant_along_a_trace():
    settings = FlowSettings.from_configs(t_max=0.2, trace_every=5)
    trace = run(shrinking_cross_section(Circle(), 1.0, 0.0, 32), settings)
    samples = rescaled_trajectory(trace, 3.0, 0.5)
    assert len(samples) == len(trace.snapshots)
    assert all(s < 0 for s, _ in samples)

    original, scaled = scaled_curvature_series(trace, 3.0, 0.5)
    np.testing.assert_allclose(original, scaled, rtol=1e-10)
    # (T - t) / r^2 = 1/2 for the exact shrinker
    np.testing.assert_allclose(original, 0.5, rtol=1e-2)
