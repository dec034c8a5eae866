import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from coneflow.core.config import using_settings
from coneflow.core.errors import DomainError, EmptyLevelSetError, FrameDegeneracyError
from coneflow.slag import (
    CalabiYauFrame,
    SLagSample,
    ToricDiagram,
    angle_function,
    certify_special_lagrangian,
    constraint_gradients,
    contact_form,
    dump_samples,
    great_circle_samples,
    hopf_circle_samples,
    lagrangian_angle,
    legendrian_cone_check,
    level_set_residual,
    max_residuals,
    moment_map,
    omega,
    pfaffian,
    sample_level_set,
    tangent_frame,
    to_complex,
    to_real,
    torus_action,
)
from coneflow.slag.levelset import constraints
from coneflow.utils import make_rng

coordinate = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def _control() -> SLagSample:
    return SLagSample(index=0, point=np.array([1.0, 1.0], dtype=complex), frame=np.array([[1j, 1.0], [-1j, 1.0]]))


def test_real_complex_identification():
    w = np.array([1 + 2j, 3 - 1j])
    np.testing.assert_array_equal(to_real(w), [1.0, 3.0, 2.0, -1.0])
    np.testing.assert_array_equal(to_complex(to_real(w)), w)
    assert omega([1.0, 0.0], [1j, 0.0]) == pytest.approx(1.0)


def test_pfaffian():
    assert pfaffian(np.array([[0.0, 3.0], [-3.0, 0.0]])) == pytest.approx(3.0)
    assert pfaffian(np.zeros((3, 3))) == 0.0
    a = np.random.default_rng(0).standard_normal((6, 6))
    skew = a - a.T
    assert pfaffian(skew) ** 2 == pytest.approx(np.linalg.det(skew), rel=1e-10)
    b = np.zeros((4, 4))
    b[0, 1], b[2, 3], b[0, 2], b[1, 3], b[0, 3], b[1, 2] = 1.0, 2.0, 3.0, 4.0, 5.0, 6.0
    b = b - b.T
    assert pfaffian(b) == pytest.approx(1.0 * 2.0 - 3.0 * 4.0 + 5.0 * 6.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_volume_normalization_on_standard_basis(n):
    assert CalabiYauFrame(n).normalization_residual() <= 1e-12


def test_volume_normalization_on_random_vectors():
    rng = np.random.default_rng(1)
    V = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
    scale = abs(np.linalg.det(np.concatenate([V, V.conj()])))
    assert CalabiYauFrame(3).normalization_residual(V) <= 1e-10 * max(scale, 1.0)
    with pytest.raises(ValueError):
        CalabiYauFrame(3).normalization_residual(V[:, :4])
    with pytest.raises(ValueError):
        CalabiYauFrame(0)


def test_holomorphic_volume_accepts_real_frames():
    frame = CalabiYauFrame(2)
    real = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]).T
    assert frame.holomorphic_volume(real) == pytest.approx(1.0)


def test_toric_diagrams():
    flat = ToricDiagram.flat(3)
    assert flat.dim == 3 and flat.height == 1
    diagram = ToricDiagram(lambdas=[[1, 1], [3, -1], [-1, 3]], gamma=[-0.5, -0.5])
    assert diagram.height == 2
    with pytest.raises(ValidationError, match="primitive"):
        ToricDiagram(lambdas=[[2, 0], [0, 2]], gamma=[-0.5, -0.5])
    with pytest.raises(ValidationError, match="expected -1"):
        ToricDiagram(lambdas=[[1, 0], [0, 1]], gamma=[-1.0, 1.0])
    with pytest.raises(ValidationError, match="at least"):
        ToricDiagram(lambdas=[[1, 0]], gamma=[-1.0, -1.0])


def test_moment_map():
    np.testing.assert_allclose(moment_map([1.0, 2.0, 1j]), [3.0, 0.0])
    with pytest.raises(DomainError):
        moment_map(np.zeros(3))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(coordinate, min_size=6, max_size=6),
    st.lists(st.floats(min_value=0.0, max_value=2 * np.pi), min_size=2, max_size=2),
)
def test_torus_action_preserves_the_level_set(parts, phases):
    w = np.array(parts[:3]) + 1j * np.array(parts[3:])
    moved = torus_action(w, phases)
    np.testing.assert_allclose(np.abs(moved), np.abs(w), atol=1e-12)
    np.testing.assert_allclose(np.prod(moved), np.prod(w), atol=1e-10)


def test_torus_action_needs_n_minus_one_phases():
    with pytest.raises(ValueError):
        torus_action(np.ones(3), [0.1])


def test_angle_function_parity():
    w = np.array([1j, 1.0])
    assert angle_function(w) == 0.0
    assert angle_function(w, part="im") == 1.0
    assert angle_function(np.array([1j, 1.0, 1.0])) == 1.0
    with pytest.raises(DomainError) as excinfo:
        angle_function(np.array([1.0, 0.0, 1.0]))
    assert excinfo.value.index == 1
    with pytest.raises(ValueError):
        angle_function(w, part="abs")


def test_constraint_gradients_match_finite_differences():
    w = np.array([0.7 + 0.2j, -0.3 + 1.1j, 0.5 - 0.4j])
    J = constraint_gradients(w)
    v, h = to_real(w), 1e-6
    c = np.zeros(2)
    for k in range(6):
        e = np.zeros(6)
        e[k] = h
        fd = (constraints(to_complex(v + e), c, 0.0) - constraints(to_complex(v - e), c, 0.0)) / (2 * h)
        np.testing.assert_allclose(J[:, k], fd, atol=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sampled_points_are_certified(n):
    samples = sample_level_set(n, 0.5, 1.0, 20, rng=make_rng(f"test-slag-{n}"))
    assert len(samples) == 20
    assert [s.index for s in samples] == list(range(20))
    res_omega, res_im = max_residuals(samples)
    assert res_omega <= 1e-10 and res_im <= 1e-10
    for s in samples:
        assert level_set_residual(s.point, np.full(n - 1, 0.5), 1.0) <= 1e-10
        gram = np.real(s.frame.conj().T @ s.frame)
        np.testing.assert_allclose(gram, np.eye(n), atol=1e-10)


def test_sampling_is_reproducible():
    first = sample_level_set(3, [0.5, -0.5], 1.0, 15, rng=make_rng("slag", seed=7))
    second = sample_level_set(3, [0.5, -0.5], 1.0, 15, rng=make_rng("slag", seed=7))
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.point, b.point)
    third = sample_level_set(3, [0.5, -0.5], 1.0, 15, rng=make_rng("slag", seed=8))
    assert not np.array_equal(first[0].point, third[0].point)


def test_wrong_part_fails_certification():
    # Im(w1 w2) = c' for n = 2 is Lagrangian but of phase pi/2
    samples = sample_level_set(2, 0.0, 1.0, 10, rng=make_rng("test-slag-im"), part="im")
    res_omega, res_im = max_residuals(samples)
    assert res_omega <= 1e-10
    assert res_im > 0.5
    rotated = sample_level_set(2, 0.0, 1.0, 10, rng=make_rng("test-slag-im"), part="im", phase=np.pi / 2)
    assert max_residuals(rotated)[1] <= 1e-10


def test_sampling_argument_checks():
    with pytest.raises(ValueError):
        sample_level_set(1, 0.0, 1.0, 5)
    with pytest.raises(ValueError):
        sample_level_set(3, [0.0, 0.0, 0.0], 1.0, 5)


def test_no_seed_converges():
    with using_settings({"slag": {"max_attempts": 0}}):
        with pytest.raises(EmptyLevelSetError) as excinfo:
            sample_level_set(2, 0.0, 1.0, 5)
    assert excinfo.value.module == "slag"


def test_parity_negative_control():
    res_omega, res_im = certify_special_lagrangian(_control())
    assert res_omega == pytest.approx(0.0, abs=1e-15)
    assert res_im == pytest.approx(1.0)
    _, rotated = certify_special_lagrangian(_control(), phase=np.pi / 2)
    assert rotated == pytest.approx(0.0, abs=1e-15)


def test_degenerate_frames_are_rejected():
    sample = SLagSample(index=4, point=np.ones(2, dtype=complex), frame=np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex))
    with pytest.raises(FrameDegeneracyError) as excinfo:
        certify_special_lagrangian(sample)
    assert excinfo.value.index == 4
    with pytest.raises(FrameDegeneracyError):
        tangent_frame(np.zeros(2, dtype=complex))


def test_lagrangian_angle():
    assert lagrangian_angle(np.eye(2, dtype=complex)) == pytest.approx(0.0)
    frame = np.diag([np.exp(0.3j), 1.0])
    assert lagrangian_angle(frame) == pytest.approx(0.3)
    # flipping one vector shifts the phase by pi
    assert lagrangian_angle(frame @ np.diag([-1.0, 1.0])) == pytest.approx(0.3)


def test_dump_samples(tmp_path):
    samples = sample_level_set(2, 0.0, 1.0, 3, rng=make_rng("test-slag-dump"))
    file = tmp_path / "samples.csv"
    dump_samples(samples, str(file))
    lines = file.read_text().splitlines()
    assert lines[0] == "re_w1,re_w2,im_w1,im_w2,residual_omega,residual_imOmega"
    assert len(lines) == 4
    with pytest.raises(ValueError):
        dump_samples([], str(file))


def test_great_circle_is_legendrian():
    report = legendrian_cone_check(great_circle_samples(32))
    assert report.count == 32
    assert report.is_legendrian()
    assert report.consistency <= 1e-12


def test_hopf_fibre_is_not_legendrian():
    report = legendrian_cone_check(hopf_circle_samples(16))
    assert not report.is_legendrian()
    assert report.max_eta == pytest.approx(1.0)
    z = np.array([1.0, 0.0], dtype=complex)
    assert contact_form(z, 1j * z) == pytest.approx(1.0)


def test_link_points_must_be_on_the_sphere():
    with pytest.raises(ValueError):
        legendrian_cone_check([(np.array([2.0, 0.0]), np.array([[1j], [0.0]]))])
