import numpy as np
import pytest
from pydantic import ValidationError

from coneflow.core.errors import DomainError, InsufficientSamplesError
from coneflow.exemplars import (
    enclosed_area_horizon,
    perturbed_shrinker,
    shrinker_theta,
    shrinking_cross_section,
)
from coneflow.flow import FlowSettings, run
from coneflow.geometry import Circle, FlatTorus
from coneflow.monotone import (
    MonotoneSample,
    backward_heat_kernel,
    dissipation_check,
    heat_kernel_laplacian_residual,
    huisken_functional,
    monotone_sample,
    monotone_samples,
    monotone_table,
    self_shrinker_residual,
    self_similar_residual,
    theta_sensitivity,
)


def test_heat_kernel_values():
    assert backward_heat_kernel(0.0, 0.0, 1.0, 2) == pytest.approx(1 / (4 * np.pi))
    values = backward_heat_kernel([0.0, 2.0], 0.5, 1.5, 1)
    np.testing.assert_allclose(values, (4 * np.pi) ** -0.5 * np.exp([0.0, -1.0]))


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_heat_kernel_needs_t_before_T(t):
    with pytest.raises(DomainError) as excinfo:
        backward_heat_kernel(1.0, t, 1.0, 1)
    assert excinfo.value.module == "monotone"


@pytest.mark.parametrize("t", [0.0, 0.2, 0.45])
def test_theta_of_the_shrinking_circle(t):
    im = shrinking_cross_section(Circle(), 1.0, t, 64)
    assert huisken_functional(im, t, 0.5) == pytest.approx(shrinker_theta(1, 2 * np.pi), rel=1e-10)


def test_theta_of_the_torus_cross_section():
    im = shrinking_cross_section(FlatTorus(), 1.0, 0.0, (16, 16))
    expected = shrinker_theta(2, 4 * np.pi**2)
    assert huisken_functional(im, 0.0, 0.25) == pytest.approx(expected, rel=1e-10)


def test_cross_section_is_a_self_shrinker():
    t, T = 0.1, 0.5
    im = shrinking_cross_section(Circle(), 1.0, t, 64)
    lam = -1 / (2 * (T - t))
    fit = self_shrinker_residual(im, lam, t, T)
    assert fit.residual < 1e-10
    assert fit.best_lambda == pytest.approx(lam, rel=1e-10)
    assert fit.best_residual < 1e-10
    assert self_shrinker_residual(im, 0.0).residual > 1.0


def test_perturbed_curve_is_not_a_shrinker():
    im = perturbed_shrinker(0.1, 3, 128)
    fit = self_shrinker_residual(im, -1.0, 0.0, 0.5)
    assert fit.residual > 1e-2
    assert fit.best_residual <= fit.residual + 1e-12


def test_heat_kernel_laplacian_vanishes_on_shrinker():
    im = shrinking_cross_section(Circle(), 1.0, 0.0, 64)
    np.testing.assert_allclose(heat_kernel_laplacian_residual(im, 0.0, 0.5), 0.0, atol=1e-10)


def test_heat_kernel_laplacian_on_a_perturbed_graph():
    im = perturbed_shrinker(0.1, 2, 256)
    residual = heat_kernel_laplacian_residual(im, 0.0, 1.0)
    scale = np.max(backward_heat_kernel(im.r, 0.0, 1.0, 1))
    assert np.max(np.abs(residual)) < 1e-3 * scale


def test_theta_sensitivity():
    im = shrinking_cross_section(Circle(), 1.0, 0.0, 64)
    out = theta_sensitivity(im, 0.0, 0.5, rel=0.01)
    assert set(out) == {"minus", "nominal", "plus"}
    assert out["nominal"] == pytest.approx(shrinker_theta(1, 2 * np.pi))
    assert out["minus"] != out["nominal"] != out["plus"]

    late = shrinking_cross_section(Circle(), 1.0, 0.496, 64)
    assert np.isnan(theta_sensitivity(late, 0.496, 0.5, rel=0.01)["minus"])


def test_dissipation_check_on_shrinker():
    samples = [
        monotone_sample(shrinking_cross_section(Circle(), 1.0, t, 64), t, 0.5)
        for t in (0.0, 0.1, 0.2, 0.3)
    ]
    assert all(s.dissipation < 1e-20 for s in samples)
    report = dissipation_check(samples)
    assert report.times == pytest.approx([0.1, 0.2])
    assert report.max_mismatch < 1e-9
    assert report.max_theta_increase < 1e-12

    rows = monotone_table(samples, report)
    assert len(rows) == 4
    assert rows[0][3] is None and rows[1][3] is not None


def test_dissipation_check_needs_three_samples():
    sample = MonotoneSample(t=0.0, theta=1.0, dissipation=0.0, pointwise_max_residual=0.0)
    with pytest.raises(InsufficientSamplesError):
        dissipation_check([sample, sample.model_copy(update={"t": 0.1})])


def test_sample_fields_are_nonnegative():
    with pytest.raises(ValidationError):
        MonotoneSample(t=0.0, theta=-1.0, dissipation=0.0, pointwise_max_residual=0.0)


@pytest.mark.parametrize("nodes", [32, 64, 128])
def test_exact_shrinker_has_no_self_similar_residual(nodes):
    t, T = 0.1, 0.5
    h = 2 * np.pi / nodes
    dissipation, pointwise = self_similar_residual(shrinking_cross_section(Circle(), 1.0, t, nodes), t, T)
    assert pointwise <= h**2
    assert dissipation <= h**4


def test_torus_shrinker_has_no_self_similar_residual():
    im = shrinking_cross_section(FlatTorus(), 1.0, 0.0, (16, 16))
    _, pointwise = self_similar_residual(im, 0.0, 0.25)
    assert pointwise <= (2 * np.pi / 16) ** 2


def test_self_similar_residual_decays_near_blowup():
    initial = perturbed_shrinker(0.05, 2, 256)
    trace = run(initial, FlowSettings.from_configs(trace_every=20))
    T = trace.find_event("blowup").data["T_est"]
    _, start = self_similar_residual(trace.snapshots[0], 0.0, T)
    assert start > 1e-2

    before = [i for i in trace.snapshots if trace.rows[i].t < T]
    late = min(before, key=lambda i: abs(T - trace.rows[i].t - 1e-3))
    t = trace.rows[late].t
    assert T - t == pytest.approx(1e-3, rel=0.05)
    _, end = self_similar_residual(trace.snapshots[late], t, T)
    assert end < 0.1 * start


@pytest.fixture(scope="module")
def fine_perturbed_samples():
    initial = perturbed_shrinker(0.05, 2, 256)
    settings = FlowSettings.from_configs(dt_max=1e-5, t_max=0.05, trace_every=250)
    trace = run(initial, settings)
    return monotone_samples(trace, enclosed_area_horizon(initial))


def test_theta_decreases_along_perturbed_flow(fine_perturbed_samples):
    samples = fine_perturbed_samples
    assert len(samples) >= 3
    report = dissipation_check(samples)
    assert report.max_theta_increase <= 1e-6
    assert samples[-1].theta < samples[0].theta
    assert max(report.dissipation) > 0


def test_theta_rate_matches_dissipation(fine_perturbed_samples):
    report = dissipation_check(fine_perturbed_samples)
    assert report.max_mismatch <= 1e-4
