"""Laplace-Beltrami spectra on Sigma and the deformation space Ker(Lap - 2n)."""

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import eigsh, spsolve

from ..core.config import configs
from ..core.types import *
from .mesh import CircleMesh, SigmaMesh, TriangleMesh

# shift-invert target just below the kernel, so that eigsh returns the low end
_SHIFT = -1e-8


@dataclass(frozen=True, eq=False)
class LaplacianOperator:
    """The generalized eigenproblem K u = lambda M u for Lap = d* d >= 0."""

    stiffness: sparse.csr_matrix
    """Symmetric positive semidefinite stiffness matrix K."""
    mass: sparse.csr_matrix
    """Symmetric positive definite mass matrix M."""

    @property
    def size(self) -> int:
        """Number of degrees of freedom."""
        return self.stiffness.shape[0]

    def apply(self, f: ArrayLike) -> FloatArray:
        """Lap f = M^-1 K f."""
        return np.asarray(spsolve(self.mass.tocsc(), self.stiffness @ np.asarray(f, dtype=float)))

    def asymmetry(self) -> float:
        """Largest entry of |K - K^T| and |M - M^T|."""
        values = [abs(self.stiffness - self.stiffness.T), abs(self.mass - self.mass.T)]
        return float(max(v.max() if v.nnz else 0.0 for v in values))


class SpectralResult(BaseModel):
    """Clustered low spectrum of Sigma and the size of the 2n cluster."""

    eigenvalues: List[float]
    """Computed eigenvalues, ascending."""
    clusters: List[List[float]]
    """Eigenvalues grouped within the relative tolerance."""
    target: float
    """The eigenvalue 2n."""
    tolerance: float
    """Relative cluster tolerance."""
    deformation_dim: int
    """Multiplicity of the cluster containing 2n, 0 if there is none."""
    warnings: List[str] = Field(default_factory=list)
    """Borderline cluster diagnostics."""

    @model_validator(mode="after")
    def _check_spectrum(self) -> "SpectralResult":
        scale = max(1.0, max(self.eigenvalues, default=1.0))
        if self.eigenvalues and min(self.eigenvalues) < -1e-8 * scale:
            raise ValueError(f"negative eigenvalue {min(self.eigenvalues)}")
        if list(self.eigenvalues) != sorted(self.eigenvalues):
            raise ValueError("eigenvalues must be ascending")
        return self

    @property
    def ohnita_count(self) -> int:
        """1 + deformation_dim, counting the Reeb direction as well."""
        return 1 + self.deformation_dim

    @property
    def kernel_dim(self) -> int:
        """Multiplicity of the eigenvalue 0."""
        if not self.clusters or abs(np.mean(self.clusters[0])) > self.tolerance:
            return 0
        return len(self.clusters[0])

    def to_summary(self) -> Dict[str, Any]:
        """The JSON report: eigen_clusters, deformation_dim, ohnita_count, warnings."""
        return {
            "eigen_clusters": [
                {"mean": float(np.mean(c)), "multiplicity": len(c)} for c in self.clusters
            ],
            "deformation_dim": self.deformation_dim,
            "ohnita_count": self.ohnita_count,
            "target": self.target,
            "warnings": list(self.warnings),
        }


def _circle_operator(mesh: CircleMesh) -> LaplacianOperator:
    n, h = mesh.nodes, mesh.spacing
    shift = sparse.eye(n, k=1, format="csr") + sparse.eye(n, k=1 - n, format="csr")
    stiffness = (2 * sparse.eye(n, format="csr") - shift - shift.T) / h**2
    return LaplacianOperator(stiffness.tocsr(), sparse.eye(n, format="csr"))


def _triangle_operator(mesh: TriangleMesh, lumped: bool) -> LaplacianOperator:
    verts, tris = mesh.vertices, mesh.faces
    n = len(verts)
    corners = verts[tris]
    # edges opposite to each corner
    edges = np.roll(corners, 1, axis=-2) - np.roll(corners, 2, axis=-2)
    areas = mesh.face_areas()
    rows, cols, weights = [], [], []
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        rows.append(tris[:, i1])
        cols.append(tris[:, i2])
        # half the cotangent of the angle at corner i
        weights.append(-0.5 * np.sum(edges[:, i1] * edges[:, i2], axis=-1) / (2 * areas))
    off = sparse.csr_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    off = off + off.T
    stiffness = sparse.diags(np.asarray(off.sum(axis=1)).ravel()) - off
    if lumped:
        vertex_areas = np.bincount(tris.ravel(), weights=np.repeat(areas, 3), minlength=n) / 3
        mass = sparse.diags(vertex_areas)
    else:
        ind = tris.T.ravel()
        mass = sparse.csr_matrix((np.tile(areas, 3) / 6, (ind, ind)), shape=(n, n))
        for a, b in ((1, 2), (2, 0), (0, 1)):
            pair = sparse.csr_matrix((areas / 12, (tris[:, a], tris[:, b])), shape=(n, n))
            mass = mass + pair + pair.T
    return LaplacianOperator(sparse.csr_matrix(stiffness), sparse.csr_matrix(mass))


def laplacian_operator(mesh: SigmaMesh, lumped: Optional[bool] = None) -> LaplacianOperator:
    """Assemble the positive Laplacian d* d of Sigma.

    Circles use the periodic second difference with identity mass;
    triangulations use cotangent stiffness with the linear finite-element
    mass matrix, or its row-lumped diagonal.
    """
    if isinstance(mesh, CircleMesh):
        return _circle_operator(mesh)
    if isinstance(mesh, TriangleMesh):
        if lumped is None:
            lumped = configs.getattrs("spectra.lumped_mass")
        return _triangle_operator(mesh, lumped)
    raise TypeError(f"unsupported mesh type {type(mesh).__name__}")


def low_spectrum(op: LaplacianOperator, count: int) -> FloatArray:
    """The `count` smallest eigenvalues, ascending."""
    size = op.size
    if count >= size - 1 or size <= 200:
        values = scipy.linalg.eigh(op.stiffness.toarray(), op.mass.toarray(), eigvals_only=True)
        return np.sort(values)[: min(count, size)]
    values = eigsh(op.stiffness.tocsc(), k=count, M=op.mass.tocsc(), sigma=_SHIFT, which="LM", return_eigenvectors=False)
    return np.sort(values)


def cluster_eigenvalues(values: ArrayLike, tol: float) -> List[List[float]]:
    """Group ascending eigenvalues whose consecutive relative gaps stay within tol."""
    clusters: List[List[float]] = []
    for value in np.sort(np.asarray(values, dtype=float)):
        if clusters and value - clusters[-1][-1] <= tol * max(abs(value), 1.0):
            clusters[-1].append(float(value))
        else:
            clusters.append([float(value)])
    return clusters


def default_tolerance(mesh: SigmaMesh) -> float:
    """Cluster tolerance for the mesh kind from `spectra.tolerance`."""
    key = "circle" if isinstance(mesh, CircleMesh) else "mesh"
    return configs.getattrs(f"spectra.tolerance.{key}")


def deformation_dimension(
    mesh: SigmaMesh,
    n: int,
    tol: Optional[float] = None,
    num_eigenvalues: Optional[int] = None,
    lumped: Optional[bool] = None,
) -> SpectralResult:
    """Dimension of Ker(Lap_Sigma - 2n), the infinitesimal deformations of C(Sigma).

    The low spectrum is computed until it passes 2n, clustered, and the
    cluster whose mean is within tol * 2n of 2n gives the dimension.
    Borderline clusters are logged and listed in the result's warnings.
    """
    if n < 2:
        raise ValueError(f"complex dimension must be at least 2, got {n}")
    target = 2.0 * n
    tol = default_tolerance(mesh) if tol is None else tol
    count = num_eigenvalues or configs.getattrs("spectra.num_eigenvalues")
    op = laplacian_operator(mesh, lumped)
    values = low_spectrum(op, count)
    while values[-1] < target * (1 + 2 * tol) and len(values) < op.size:
        count = min(2 * count, op.size)
        values = low_spectrum(op, count)
    if values.min() > -1e-8 * max(1.0, values.max()):
        values = np.maximum(values, 0.0)
    clusters = cluster_eigenvalues(values, tol)

    warnings: List[str] = []
    dim = 0
    hit = None
    for k, cluster in enumerate(clusters):
        if abs(np.mean(cluster) - target) <= tol * target:
            hit, dim = k, len(cluster)
            break
    if hit is not None:
        inside = clusters[hit]
        outside = [v for j, c in enumerate(clusters) if j != hit for v in c]
        if outside:
            gap = min(min(abs(v - inside[0]), abs(v - inside[-1])) for v in outside)
            if gap < 2 * tol * target:
                warnings.append(f"cluster at {np.mean(inside):.6g} is within {gap:.3g} of eigenvalue outside it")
    else:
        near = [v for v in values if abs(v - target) <= 2 * tol * target]
        if near:
            warnings.append(f"eigenvalue {near[0]:.6g} misses {target:g} by less than twice the tolerance")
    for message in warnings:
        logger.warning(message)

    return SpectralResult(
        eigenvalues=[float(v) for v in values],
        clusters=clusters,
        target=target,
        tolerance=tol,
        deformation_dim=dim,
        warnings=warnings,
    )


def reeb_exclusion_check(mesh: SigmaMesh, n: int, phi: Optional[ArrayLike] = None) -> float:
    """Violation of the deformation equations by beta = r phi dr + r^2 gamma.

    With gamma = d phi / 2 the closedness condition holds, and the returned
    value is max |Lap phi - 2n phi|. The default phi = -1 is the Reeb
    direction beta = -r dr, which violates coclosedness by exactly 2n.
    """
    f = np.full(mesh.size, -1.0) if phi is None else np.asarray(phi, dtype=float)
    if f.shape != (mesh.size,):
        raise ValueError(f"phi must have one value per node, got shape {f.shape}")
    if np.ptp(f) == 0:
        # d phi = 0 exactly for constants
        return float(2 * n * abs(f[0]))
    op = laplacian_operator(mesh)
    return float(np.max(np.abs(op.apply(f) - 2 * n * f)))
