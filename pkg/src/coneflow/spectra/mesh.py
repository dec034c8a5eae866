"""Meshes of a Legendrian link Sigma: periodic 1-D grids and closed triangulations."""

import re

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from ..core.errors import MeshValidationError
from ..core.types import *


class SigmaMesh(ABC):
    """A discretization of a closed Riemannian manifold Sigma."""

    @property
    @abstractmethod
    def size(self) -> int:
        """Number of nodes (degrees of freedom)."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Dimension of Sigma."""

    @abstractmethod
    def components(self) -> int:
        """Number of connected components."""


@dataclass(frozen=True, eq=False)
class CircleMesh(SigmaMesh):
    """A circle of circumference `length`, sampled at `nodes` equispaced points."""

    length: float
    nodes: int

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise MeshValidationError(f"circumference must be positive, got {self.length}", module="spectra")
        if self.nodes < 3:
            raise MeshValidationError(f"a circle needs at least 3 nodes, got {self.nodes}", module="spectra")

    @property
    def size(self) -> int:
        return self.nodes

    @property
    def dim(self) -> int:
        return 1

    @property
    def spacing(self) -> float:
        """Arc length between neighbouring nodes."""
        return self.length / self.nodes

    def components(self) -> int:
        return 1


@dataclass(frozen=True, eq=False)
class TriangleMesh(SigmaMesh):
    """A closed, oriented, manifold triangle mesh.

    Validation builds the undirected and directed edge adjacency: every
    undirected edge must border exactly two triangles and every directed edge
    must occur once.
    """

    vertices: FloatArray
    faces: np.ndarray

    def __post_init__(self) -> None:
        vertices = np.asarray(self.vertices, dtype=float)
        faces = np.asarray(self.faces, dtype=np.int64)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshValidationError(f"vertices must have shape (V, 3), got {vertices.shape}", module="spectra")
        if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
            raise MeshValidationError(f"faces must have shape (F, 3), got {faces.shape}", module="spectra")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise MeshValidationError("face indices out of range", module="spectra")
        repeated = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 2] == faces[:, 0])
        if repeated.any():
            raise MeshValidationError("degenerate face", module="spectra", index=int(np.flatnonzero(repeated)[0]))
        if len(np.unique(faces)) != len(vertices):
            raise MeshValidationError("mesh has vertices not used by any face", module="spectra")
        undirected = self._adjacency(directed=False)
        if undirected.data.max() > 2:
            raise MeshValidationError("an edge borders more than two triangles", module="spectra")
        if undirected.data.min() < 2:
            raise MeshValidationError("mesh has boundary edges", module="spectra")
        if self._adjacency(directed=True).data.max() != 1:
            raise MeshValidationError("faces are not consistently oriented", module="spectra")
        areas = self.face_areas()
        if not np.all(areas > 0):
            raise MeshValidationError("zero-area face", module="spectra", index=int(np.flatnonzero(areas <= 0)[0]))

    def _adjacency(self, directed: bool) -> sparse.csc_matrix:
        f0, f1, f2 = self.faces.T
        if directed:
            i = np.column_stack((f0, f1, f2)).reshape(-1)
            j = np.column_stack((f1, f2, f0)).reshape(-1)
        else:
            i = np.column_stack((f0, f1, f1, f2, f2, f0)).reshape(-1)
            j = np.column_stack((f1, f0, f2, f1, f0, f2)).reshape(-1)
        n = len(self.vertices)
        return sparse.csc_matrix((np.ones(i.shape), (i, j)), shape=(n, n))

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def dim(self) -> int:
        return 2

    @property
    def edge_count(self) -> int:
        """Number of undirected edges."""
        return int(self._adjacency(directed=False).nnz // 2)

    def euler_characteristic(self) -> int:
        """V - E + F."""
        return self.size - self.edge_count + len(self.faces)

    def components(self) -> int:
        count, _ = connected_components(self._adjacency(directed=False), directed=False)
        return int(count)

    def face_areas(self) -> FloatArray:
        """Area of every triangle."""
        tri = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=-1)

    def refine(self) -> "TriangleMesh":
        """Split every triangle into four at the edge midpoints."""
        vertices, faces = _subdivide(self.vertices, self.faces, project=False)
        return TriangleMesh(vertices, faces)


_PHI = (1 + np.sqrt(5)) / 2
_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
        [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
        [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
    ]
)
_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
)


def _subdivide(vertices: FloatArray, faces: np.ndarray, project: bool) -> Tuple[FloatArray, np.ndarray]:
    edges = np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1)
    unique, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    midpoints = 0.5 * (vertices[unique[:, 0]] + vertices[unique[:, 1]])
    if project:
        midpoints /= np.linalg.norm(midpoints, axis=1, keepdims=True)
    offset = len(vertices)
    nf = len(faces)
    ab, bc, ca = (offset + inverse[k * nf : (k + 1) * nf] for k in range(3))
    a, b, c = faces.T
    new_faces = np.concatenate(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([b, bc, ab]),
            np.column_stack([c, ca, bc]),
            np.column_stack([ab, bc, ca]),
        ]
    )
    return np.vstack([vertices, midpoints]), new_faces


def icosphere(subdivisions: int = 0) -> TriangleMesh:
    """The unit sphere as a subdivided icosahedron with 10 * 4^k + 2 vertices."""
    if subdivisions < 0:
        raise ValueError(f"subdivisions must be nonnegative, got {subdivisions}")
    vertices = _ICOSAHEDRON_VERTICES / np.linalg.norm(_ICOSAHEDRON_VERTICES, axis=1, keepdims=True)
    faces = _ICOSAHEDRON_FACES
    for _ in range(subdivisions):
        vertices, faces = _subdivide(vertices, faces, project=True)
    return TriangleMesh(vertices, faces)


def load_off(path: str) -> TriangleMesh:
    """Read a triangle mesh from an OFF file.

    Raises:
        MeshValidationError: If the file is malformed or not a closed triangulation.
    """
    with open(path) as f:
        tokens = [line.split("#", 1)[0].split() for line in f]
    tokens = [t for t in tokens if t]
    if not tokens or tokens[0][0] != "OFF":
        raise MeshValidationError(f"{path} is not an OFF file", module="spectra")
    header = tokens[0][1:] or tokens[1]
    start = 1 if tokens[0][1:] else 2
    try:
        nv, nf = int(header[0]), int(header[1])
        vertices = np.array([[float(x) for x in row[:3]] for row in tokens[start : start + nv]])
        faces = []
        for index, row in enumerate(tokens[start + nv : start + nv + nf]):
            if int(row[0]) != 3:
                raise MeshValidationError("only triangle faces are supported", module="spectra", index=index)
            faces.append([int(x) for x in row[1:4]])
    except (IndexError, ValueError) as e:
        if isinstance(e, MeshValidationError):
            raise
        raise MeshValidationError(f"malformed OFF file {path}: {e}", module="spectra") from e
    if len(vertices) != nv or len(faces) != nf:
        raise MeshValidationError(f"{path} is truncated", module="spectra")
    return TriangleMesh(vertices, np.array(faces))


_CIRCLE_SELECTOR = re.compile(r"^circle:L=(?P<L>[^:]+):nodes=(?P<nodes>\d+)$")
_ICOSPHERE_SELECTOR = re.compile(r"^icosphere:(?P<k>\d+)$")


def parse_sigma(selector: str) -> SigmaMesh:
    """Build a mesh from `circle:L=<value>:nodes=<count>`, `icosphere:<k>` or an OFF path."""
    if match := _CIRCLE_SELECTOR.match(selector):
        try:
            length = float(match["L"])
        except ValueError as e:
            raise MeshValidationError(f"bad circumference in {selector!r}", module="spectra") from e
        return CircleMesh(length, int(match["nodes"]))
    if match := _ICOSPHERE_SELECTOR.match(selector):
        return icosphere(int(match["k"]))
    if selector.lower().endswith(".off"):
        return load_off(selector)
    raise MeshValidationError(f"unknown Sigma selector {selector!r}", module="spectra")
