"""Discrete immersions of a structured mesh into a Riemannian cone.

Geometry is evaluated node-wise with finite differences in the mesh
parameters. The second fundamental form is the normal part of the ambient
covariant Hessian of F, and the mean curvature is its trace.
"""

from functools import cached_property

import numpy as np

from ..core.errors import DegenerateMetricError
from ..core.io import dump_csv
from ..core.types import *
from .conegeom import RiemannianCone
from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class GeometryCache:
    """Per-node geometry of an immersion. Immutable once built.

    Index layout: mesh axes first, then `i, j, k` for parameter directions and
    `a, b` for cone coordinates.
    """

    tangents: FloatArray
    """First derivatives dF^a/dx^i, shape (*mesh, m, N)."""
    ambient_metric: FloatArray
    """Cone metric at the nodes, shape (*mesh, N, N)."""
    ambient_christoffel: FloatArray
    """Cone Christoffel symbols at the nodes, shape (*mesh, N, N, N)."""
    metric: FloatArray
    """Induced metric g_ij."""
    metric_inv: FloatArray
    """Inverse induced metric g^ij."""
    sqrt_det: FloatArray
    """Volume density sqrt(det g_ij)."""
    christoffel: FloatArray
    """Christoffel symbols Gamma^k_ij of the induced metric, stored [k, i, j]."""
    second_fundamental: FloatArray
    """II^a_ij, shape (*mesh, m, m, N)."""
    mean_curvature: FloatArray
    """H^a, shape (*mesh, N)."""
    II2: FloatArray
    """|II|^2 per node."""
    H2: FloatArray
    """|H|^2 per node."""


@dataclass(frozen=True, eq=False)
class DiscreteImmersion:
    """An immersion F: M -> C(N) sampled on a structured mesh.

    Base coordinates may be lifted (e.g. an angle increasing past 2*pi along a
    closed curve); `windings[i]` is the jump of the base coordinates across
    one period of mesh axis i.
    """

    cone: RiemannianCone
    """The ambient cone."""
    mesh: Mesh
    """The parameter mesh."""
    base: FloatArray
    """Base chart coordinates, shape (*mesh, n)."""
    r: FloatArray
    """Radial coordinate, shape (*mesh)."""
    mode: Literal["generic", "graphical"] = "generic"
    """`graphical` immersions are F(p) = (p, r(p)) over a base grid."""
    windings: Optional[FloatArray] = None
    """Base coordinate jump per mesh axis, shape (m, n)."""

    def __post_init__(self) -> None:
        base = np.asarray(self.base, dtype=float)
        r = np.asarray(self.r, dtype=float)
        n = self.cone.base.dim
        if base.ndim == len(self.mesh.shape):
            base = base[..., None]
        if base.shape != self.mesh.shape + (n,) or r.shape != self.mesh.shape:
            raise ValueError(
                f"node arrays {base.shape}, {r.shape} do not match mesh {self.mesh.shape} "
                f"and base dimension {n}"
            )
        windings = self.windings
        if windings is None:
            windings = np.zeros((self.mesh.dim, n))
        windings = np.asarray(windings, dtype=float).reshape(self.mesh.dim, n)
        if self.mode == "graphical" and (self.mesh.topology != "base-copy" or self.mesh.dim != n):
            raise ValueError("graphical immersions need a base-copy mesh of the base dimension")
        self.cone.check_radius(r)
        self.cone.base.check_admissible(base)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "windings", windings)

    @classmethod
    def graphical(cls, cone: RiemannianCone, r: ArrayLike, shape: Union[int, Sequence[int], None] = None) -> "DiscreteImmersion":
        """The graph p -> (p, r(p)) over a periodic base grid.

        Args:
            cone: The ambient cone; its base must be periodic.
            r: Radial values on the grid, or a scalar for a cross-section.
            shape: Grid shape; inferred from `r` when it is an array.
        """
        r = np.asarray(r, dtype=float)
        if shape is None:
            if r.ndim == 0:
                raise ValueError("a grid shape is required for constant radii")
            shape = r.shape
        mesh = Mesh.base_copy(cone.base, shape)
        r = np.broadcast_to(r, mesh.shape).copy()
        return cls(
            cone=cone,
            mesh=mesh,
            base=mesh.nodes(),
            r=r,
            mode="graphical",
            windings=np.diag(mesh.lengths),
        )

    @property
    def m(self) -> int:
        """Dimension of M."""
        return self.mesh.dim

    @property
    def position(self) -> FloatArray:
        """Node coordinates (y, r), shape (*mesh, N)."""
        return np.concatenate([self.base, self.r[..., None]], axis=-1)

    @property
    def offsets(self) -> FloatArray:
        """Per-axis jumps of the full coordinate vector, shape (m, N)."""
        return np.concatenate([self.windings, np.zeros((self.m, 1))], axis=-1)

    def position_field(self) -> FloatArray:
        """The position vector r d/dr at every node."""
        field = np.zeros(self.mesh.shape + (self.cone.dim,))
        field[..., -1] = self.r
        return field

    def with_values(self, base: Optional[FloatArray] = None, r: Optional[FloatArray] = None) -> "DiscreteImmersion":
        """A copy with new node values and the same mesh and windings."""
        return replace(
            self,
            base=self.base if base is None else base,
            r=self.r if r is None else r,
        )

    def _first_bad(self, mask: np.ndarray) -> int:
        return int(np.flatnonzero(np.asarray(mask).ravel())[0])

    @cached_property
    def geometry(self) -> GeometryCache:
        """The geometry cache, built once per immersion.

        Raises:
            DegenerateMetricError: If the induced metric is not positive
                definite; the first failing node is reported.
        """
        mesh, X, offsets = self.mesh, self.position, self.offsets
        m = self.m
        dF = np.stack([mesh.d1(X, i, offsets[i]) for i in range(m)], axis=-2)
        ddF = np.empty(mesh.shape + (m, m, self.cone.dim))
        for i in range(m):
            ddF[..., i, i, :] = mesh.d2(X, i, offsets[i])
            for j in range(i + 1, m):
                mixed = 0.5 * (mesh.d1(dF[..., j, :], i) + mesh.d1(dF[..., i, :], j))
                ddF[..., i, j, :] = ddF[..., j, i, :] = mixed

        G = self.cone.metric(self.base, self.r)
        Gamma = self.cone.christoffel(self.base, self.r)
        g = np.einsum("...ia,...ab,...jb->...ij", dF, G, dF)
        det = np.linalg.det(g)
        bad = ~(det > 0)
        if bad.any():
            index = self._first_bad(bad)
            raise DegenerateMetricError(
                f"induced metric has det = {det.ravel()[index]:.3e} at node "
                f"{mesh.unravel(index)}",
                module="immersion",
                index=index,
            )
        g_inv = np.linalg.inv(g)
        # ambient covariant Hessian of F
        hessian = ddF + np.einsum("...abc,...ib,...jc->...ija", Gamma, dF, dF)
        projected = np.einsum("...la,...ab,...ijb->...lij", dF, G, hessian)
        christoffel = np.einsum("...kl,...lij->...kij", g_inv, projected)
        II = hessian - np.einsum("...kij,...ka->...ija", christoffel, dF)
        H = np.einsum("...ij,...ija->...a", g_inv, II)
        II2 = np.einsum("...ik,...jl,...ija,...ab,...klb->...", g_inv, g_inv, II, G, II)
        H2 = np.einsum("...a,...ab,...b->...", H, G, H)
        return GeometryCache(
            tangents=dF,
            ambient_metric=G,
            ambient_christoffel=Gamma,
            metric=g,
            metric_inv=g_inv,
            sqrt_det=np.sqrt(det),
            christoffel=christoffel,
            second_fundamental=II,
            mean_curvature=H,
            II2=II2,
            H2=H2,
        )

    def gradient(self, f: FloatArray) -> FloatArray:
        """Parameter gradient df/dx^i of a scalar node field, shape (*mesh, m)."""
        return np.stack([self.mesh.d1(f, i) for i in range(self.m)], axis=-1)

    def gradient_norm2(self, f: FloatArray) -> FloatArray:
        """|grad f|^2 = g^ij df_i df_j."""
        df = self.gradient(f)
        return np.einsum("...ij,...i,...j->...", self.geometry.metric_inv, df, df)

    def cone_norm2(self, v: FloatArray) -> FloatArray:
        """Node-wise squared cone norm of a vector field."""
        return np.einsum("...a,...ab,...b->...", v, self.geometry.ambient_metric, v)

    def to_csv(self, file: str) -> None:
        """Write the snapshot CSV `node_index, x_params..., y_coords..., r`."""
        n, m = self.cone.base.dim, self.m
        header = (
            ["node_index"]
            + [f"x_{i + 1}" for i in range(m)]
            + [f"y_{a + 1}" for a in range(n)]
            + ["r"]
        )
        x = self.mesh.nodes().reshape(-1, m)
        y = self.base.reshape(-1, n)
        r = self.r.reshape(-1)
        rows = ([k, *x[k], *y[k], r[k]] for k in range(self.mesh.size))
        dump_csv(header, rows, file)


def induced_metric(im: DiscreteImmersion) -> FloatArray:
    """Induced metric g_ij = dF^a/dx^i dF^b/dx^j g_ab at every node."""
    return im.geometry.metric


def mean_curvature(im: DiscreteImmersion) -> FloatArray:
    """Mean curvature vector H^a = g^ij II^a_ij in cone coordinates."""
    return im.geometry.mean_curvature


def laplace_beltrami(im: DiscreteImmersion, f: ArrayLike) -> FloatArray:
    """Laplace-Beltrami operator of the induced metric on a scalar node field."""
    f = np.broadcast_to(np.asarray(f, dtype=float), im.mesh.shape)
    cache, mesh = im.geometry, im.mesh
    df = im.gradient(f)
    ddf = np.empty(mesh.shape + (im.m, im.m))
    for i in range(im.m):
        ddf[..., i, i] = mesh.d2(f, i)
        for j in range(i + 1, im.m):
            mixed = 0.5 * (mesh.d1(df[..., j], i) + mesh.d1(df[..., i], j))
            ddf[..., i, j] = ddf[..., j, i] = mixed
    hessian = ddf - np.einsum("...kij,...k->...ij", cache.christoffel, df)
    return np.einsum("...ij,...ij->...", cache.metric_inv, hessian)


def _base_trace(im: DiscreteImmersion) -> FloatArray:
    """g^ij dF^a/dx^i dF^b/dx^j g_ab with the base metric g."""
    cache, n = im.geometry, im.cone.base.dim
    base_tangents = cache.tangents[..., :n]
    base_metric = cache.ambient_metric[..., :n, :n] / im.r[..., None, None] ** 2
    return np.einsum(
        "...ij,...ia,...ab,...jb->...", cache.metric_inv, base_tangents, base_metric, base_tangents
    )


def radial_mean_curvature(im: DiscreteImmersion) -> FloatArray:
    """Radial mean curvature from the coordinate-invariant recombination.

    H^{n+1} = Lap r - r g^ij dF^a/dx^i dF^b/dx^j g_ab, an independent code
    path from `mean_curvature`.
    """
    return laplace_beltrami(im, im.r) - im.r * _base_trace(im)


def decompose_normal(im: DiscreteImmersion, v: ArrayLike) -> Tuple[FloatArray, FloatArray]:
    """Split a vector field along F into tangential and normal parts."""
    cache = im.geometry
    v = np.broadcast_to(np.asarray(v, dtype=float), im.mesh.shape + (im.cone.dim,))
    coeff = np.einsum("...ja,...ab,...b->...j", cache.tangents, cache.ambient_metric, v)
    tangential = np.einsum("...ij,...j,...ia->...a", cache.metric_inv, coeff, cache.tangents)
    return tangential, v - tangential


def volume(im: DiscreteImmersion) -> float:
    """Volume of M by the node-wise product rule."""
    return float(np.sum(im.geometry.sqrt_det * im.mesh.weights()))


def sup_second_fundamental(im: DiscreteImmersion) -> float:
    """Maximum of |II|^2 over the nodes."""
    return float(np.max(im.geometry.II2))


def lemma_one_residual(im: DiscreteImmersion) -> FloatArray:
    """Lap r^2 - 2 (g(H, F) + m) per node; zero for a smooth immersion."""
    g_H_F = im.r * im.geometry.mean_curvature[..., -1]
    return laplace_beltrami(im, im.r**2) - 2 * (g_H_F + im.m)


def fundamental_trace_residual(im: DiscreteImmersion) -> FloatArray:
    """r^2 g^ij dF^a dF^b g_ab + |grad r|^2 - m per node."""
    return im.r**2 * _base_trace(im) + im.gradient_norm2(im.r) - im.m


def tangential_position_norm(im: DiscreteImmersion) -> FloatArray:
    """|F^T|^2 = r^2 |grad r|^2 per node."""
    return im.r**2 * im.gradient_norm2(im.r)


def first_variation_rate(old: DiscreteImmersion, new: DiscreteImmersion, dt: float) -> float:
    """Relative residual of dVol/dt = -int |H|^2 between two flow snapshots.

    The dissipation is taken at the older snapshot, matching an explicit step.
    """
    dissipation = float(np.sum(old.geometry.H2 * old.geometry.sqrt_det * old.mesh.weights()))
    change = (volume(new) - volume(old)) / dt
    return abs(change + dissipation) / max(1.0, dissipation)
