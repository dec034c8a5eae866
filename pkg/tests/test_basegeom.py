import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coneflow.core.errors import ChartDegeneracyError
from coneflow.geometry import (
    Circle,
    FlatTorus,
    RoundSphere,
    TabulatedMetric,
    finite_difference_christoffel,
    make_base,
)


def test_circle_metric_scale():
    circle = Circle(rho=0.5)
    np.testing.assert_allclose(circle.metric_at([[0.3]]), [[[0.25]]])
    assert circle.volume() == pytest.approx(np.pi)


def test_sphere_metric_and_volume():
    sphere = RoundSphere()
    g = sphere.metric_at([np.pi / 2, 1.0])
    np.testing.assert_allclose(g, np.eye(2))
    assert sphere.volume() == pytest.approx(4 * np.pi)
    assert sphere.volume_density_at([np.pi / 6, 0.0]) == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=0.2, max_value=np.pi - 0.2),
    st.floats(min_value=0.0, max_value=2 * np.pi),
)
def test_sphere_christoffel_matches_finite_differences(theta, phi):
    sphere = RoundSphere()
    y = np.array([theta, phi])
    exact = sphere.christoffel_at(y)
    approx = finite_difference_christoffel(sphere.metric_at, y, 1e-5)
    np.testing.assert_allclose(exact, approx, atol=1e-8)
    np.testing.assert_allclose(exact, np.swapaxes(exact, -1, -2))


def test_sphere_pole_is_excluded():
    sphere = RoundSphere()
    points = np.array([[1.0, 0.0], [0.0, 0.5], [np.pi, 0.0]])
    with pytest.raises(ChartDegeneracyError) as excinfo:
        sphere.metric_at(points)
    assert excinfo.value.index == 1
    assert excinfo.value.module == "basegeom"


def test_torus_is_flat():
    torus = FlatTorus((1.0, 2.0))
    y = torus.grid((4, 4))
    np.testing.assert_array_equal(torus.christoffel_at(y), 0.0)
    assert torus.volume() == pytest.approx(2.0)


def test_tabulated_constant_metric_is_flat():
    x = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    values = np.broadcast_to(np.diag([1.0, 4.0]), (16, 16, 2, 2)).copy()
    table = TabulatedMetric([x, x], values)
    y = np.array([[0.3, 1.7], [5.9, 6.1]])
    np.testing.assert_allclose(table.metric_at(y), np.broadcast_to(np.diag([1.0, 4.0]), (2, 2, 2)), atol=1e-12)
    np.testing.assert_allclose(table.christoffel_at(y), 0.0, atol=1e-10)


def test_tabulated_circle_matches_spline_derivative():
    x = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    values = (1.5 + 0.5 * np.cos(x))[:, None, None]
    table = TabulatedMetric([x], values)
    y = np.array([[0.7]])
    # Gamma^x_xx = g' / (2 g)
    expected = -0.5 * np.sin(0.7) / (2 * (1.5 + 0.5 * np.cos(0.7)))
    assert table.christoffel_at(y)[0, 0, 0, 0] == pytest.approx(expected, rel=1e-4)


def test_tabulated_from_file(tmp_path):
    x = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    path = tmp_path / "metric.txt"
    np.savetxt(path, np.column_stack([x, np.full_like(x, 2.0)]))
    base = make_base(str(path))
    assert base.dim == 1
    assert base.metric_at([[1.0]])[0, 0, 0] == pytest.approx(2.0)


def test_make_base_rejects_unknown():
    with pytest.raises(ValueError) as excinfo:
        make_base("klein-bottle")
    assert "klein-bottle" in str(excinfo.value)
