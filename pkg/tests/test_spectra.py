import numpy as np
import pytest
from pydantic import ValidationError

from coneflow.core.errors import MeshValidationError
from coneflow.spectra import (
    CircleMesh,
    SpectralResult,
    TriangleMesh,
    closedness_predicates,
    cluster_eigenvalues,
    deformation_dimension,
    exterior_closedness,
    icosphere,
    laplacian_operator,
    load_off,
    parse_sigma,
    reeb_exclusion_check,
)

TETRAHEDRON_OFF = """OFF
# regular tetrahedron
4 4 6
1 1 1
1 -1 -1
-1 1 -1
-1 -1 1
3 0 1 2
3 0 3 1
3 0 2 3
3 1 3 2
"""


@pytest.mark.parametrize(
    "length, expected",
    [(2 * np.pi, 2), (4 * np.pi, 2), (3 * np.pi, 2), (2.5 * np.pi, 0)],
)
def test_circle_deformation_dimension(length, expected):
    result = deformation_dimension(CircleMesh(length, 512), 2)
    assert result.deformation_dim == expected
    assert result.ohnita_count == expected + 1
    assert result.kernel_dim == 1
    assert result.target == 4.0
    assert result.warnings == []


def test_borderline_eigenvalue_is_reported():
    length = 2 * np.pi / np.sqrt(1.0015)
    result = deformation_dimension(CircleMesh(length, 512), 2, tol=1e-3)
    assert result.deformation_dim == 0
    assert len(result.warnings) == 1


def test_round_sphere_spectrum():
    mesh = icosphere(3)
    assert mesh.size == 642
    result = deformation_dimension(mesh, 3)
    assert result.deformation_dim == 5
    assert result.kernel_dim == 1
    assert [len(c) for c in result.clusters[:3]] == [1, 3, 5]
    assert np.mean(result.clusters[1]) == pytest.approx(2.0, rel=0.02)
    summary = result.to_summary()
    assert summary["ohnita_count"] == 6
    assert summary["eigen_clusters"][2]["multiplicity"] == 5


def test_fine_round_sphere_spectrum():
    result = deformation_dimension(icosphere(5), 3, tol=0.02)
    assert result.deformation_dim == 5
    assert result.to_summary()["ohnita_count"] == 6


def test_round_sphere_with_lumped_mass():
    assert deformation_dimension(icosphere(3), 3, lumped=True).deformation_dim == 5


def test_sphere_has_no_deformations_for_n2():
    assert deformation_dimension(icosphere(2), 2).deformation_dim == 0


def test_deformation_dimension_needs_n_at_least_two():
    with pytest.raises(ValueError):
        deformation_dimension(CircleMesh(2 * np.pi, 64), 1)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_icosphere_topology(k):
    mesh = icosphere(k)
    assert mesh.size == 10 * 4**k + 2
    assert len(mesh.faces) == 20 * 4**k
    assert mesh.euler_characteristic() == 2
    assert mesh.components() == 1
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0)
    with pytest.raises(ValueError):
        icosphere(-1)


def test_refine_keeps_topology():
    coarse = icosphere(0)
    fine = coarse.refine()
    assert fine.size == 42
    assert fine.euler_characteristic() == 2
    assert fine.face_areas().sum() == pytest.approx(coarse.face_areas().sum())


def test_mesh_validation():
    mesh = icosphere(0)
    verts, faces = mesh.vertices, mesh.faces
    with pytest.raises(MeshValidationError, match="boundary"):
        TriangleMesh(verts, faces[1:])
    flipped = faces.copy()
    flipped[0] = flipped[0, ::-1]
    with pytest.raises(MeshValidationError, match="oriented"):
        TriangleMesh(verts, flipped)
    degenerate = faces.copy()
    degenerate[3, 1] = degenerate[3, 0]
    with pytest.raises(MeshValidationError) as excinfo:
        TriangleMesh(verts, degenerate)
    assert excinfo.value.index == 3
    with pytest.raises(MeshValidationError, match="out of range"):
        TriangleMesh(verts, faces + 1)
    with pytest.raises(MeshValidationError, match="not used"):
        TriangleMesh(np.vstack([verts, [[0.0, 0.0, 0.0]]]), faces)
    with pytest.raises(MeshValidationError):
        TriangleMesh(verts[:, :2], faces)


def test_circle_mesh_validation():
    with pytest.raises(MeshValidationError):
        CircleMesh(-1.0, 64)
    with pytest.raises(MeshValidationError):
        CircleMesh(1.0, 2)


def test_load_off(tmp_path):
    file = tmp_path / "tetra.off"
    file.write_text(TETRAHEDRON_OFF)
    mesh = load_off(str(file))
    assert mesh.size == 4
    assert mesh.edge_count == 6
    assert mesh.euler_characteristic() == 2
    assert parse_sigma(str(file)).size == 4


def test_load_off_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.off"
    bad.write_text("PLY\n")
    with pytest.raises(MeshValidationError):
        load_off(str(bad))
    truncated = tmp_path / "truncated.off"
    truncated.write_text(TETRAHEDRON_OFF.rsplit("\n", 2)[0] + "\n")
    with pytest.raises(MeshValidationError):
        load_off(str(truncated))
    quads = tmp_path / "quads.off"
    quads.write_text("OFF\n4 1 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(MeshValidationError, match="triangle"):
        load_off(str(quads))


def test_parse_sigma():
    circle = parse_sigma("circle:L=6.2831853:nodes=128")
    assert isinstance(circle, CircleMesh)
    assert circle.nodes == 128 and circle.length == pytest.approx(6.2831853)
    assert parse_sigma("icosphere:1").size == 42
    for selector in ["torus:3", "circle:L=abc:nodes=5", "circle:L=-1:nodes=16", "circle:nodes=16"]:
        with pytest.raises(MeshValidationError):
            parse_sigma(selector)


def test_spectral_result_validation():
    common = dict(clusters=[], target=4.0, tolerance=1e-3, deformation_dim=0)
    with pytest.raises(ValidationError, match="negative"):
        SpectralResult(eigenvalues=[-1.0, 0.0], **common)
    with pytest.raises(ValidationError, match="ascending"):
        SpectralResult(eigenvalues=[1.0, 0.0], **common)
    assert SpectralResult(eigenvalues=[-1e-12, 1.0], **common).kernel_dim == 0


def test_cluster_eigenvalues():
    clusters = cluster_eigenvalues([4.0, 0.0, 1.0005, 1.0], 1e-3)
    assert clusters == [[0.0], [1.0, 1.0005], [4.0]]
    assert cluster_eigenvalues([], 1e-3) == []


@pytest.mark.parametrize("lumped", [False, True])
def test_triangle_operator(lumped):
    mesh = icosphere(2)
    op = laplacian_operator(mesh, lumped=lumped)
    assert op.asymmetry() < 1e-12
    np.testing.assert_allclose(op.stiffness @ np.ones(mesh.size), 0.0, atol=1e-10)
    assert op.mass.sum() == pytest.approx(mesh.face_areas().sum())
    # linear functions are l = 1 eigenfunctions with eigenvalue about 2
    z = mesh.vertices[:, 2]
    ratio = (z @ (op.stiffness @ z)) / (z @ (op.mass @ z))
    assert ratio == pytest.approx(2.0, rel=0.05)


def test_circle_operator():
    mesh = CircleMesh(2 * np.pi, 256)
    op = laplacian_operator(mesh)
    x = np.arange(256) * mesh.spacing
    np.testing.assert_allclose(op.apply(np.cos(3 * x)), 9 * np.cos(3 * x), rtol=1e-3, atol=1e-3)
    with pytest.raises(TypeError):
        laplacian_operator(object())


def test_reeb_direction_is_excluded():
    mesh = CircleMesh(2 * np.pi, 512)
    assert reeb_exclusion_check(mesh, 2) == pytest.approx(4.0)
    assert reeb_exclusion_check(icosphere(1), 3) == pytest.approx(6.0)
    x = np.arange(512) * mesh.spacing
    assert reeb_exclusion_check(mesh, 2, np.cos(2 * x)) < 1e-3
    with pytest.raises(ValueError):
        reeb_exclusion_check(mesh, 2, np.ones(3))


def test_closedness_on_a_deformation():
    nodes, length = 256, 2 * np.pi
    x = np.arange(nodes) * length / nodes
    phi, gamma = np.cos(2 * x), -np.sin(2 * x)
    predicates = closedness_predicates(phi, gamma, 2, length)
    assert predicates.max_closed() < 5e-3
    assert predicates.max_coclosed() < 5e-3
    exterior = exterior_closedness(phi, gamma, length)
    np.testing.assert_allclose(exterior.closed, predicates.closed, atol=1e-9)
    np.testing.assert_allclose(exterior.coclosed, predicates.coclosed, atol=1e-9)


def test_closedness_detects_non_deformations():
    nodes, length = 256, 2 * np.pi
    x = np.arange(nodes) * length / nodes
    phi = np.cos(3 * x)
    assert closedness_predicates(phi, np.zeros(nodes), 2, length).max_closed() > 1.0
    # closed but with eigenvalue 9 instead of 4
    residuals = exterior_closedness(phi, -1.5 * np.sin(3 * x), length)
    assert residuals.max_closed() < 5e-3
    assert residuals.max_coclosed() == pytest.approx(5.0, rel=1e-2)
