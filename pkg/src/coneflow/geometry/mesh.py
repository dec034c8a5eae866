"""Structured parameter meshes and their finite-difference operators."""

import numpy as np

from ..core.config import configs
from ..core.types import *
from .basegeom import BaseManifold

TWO_PI = 2.0 * np.pi

# centered stencils (offsets, weights) for the first and second derivative
_STENCILS: Dict[int, Tuple[Dict[int, float], Dict[int, float]]] = {
    2: ({-1: -0.5, 1: 0.5}, {-1: 1.0, 0: -2.0, 1: 1.0}),
    4: (
        {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12},
        {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12},
    ),
}


class Mesh(BaseModel):
    """A uniform structured mesh of the parameter manifold M.

    `circle` and `torus` meshes are periodic, `base-copy` meshes reuse a
    periodic base grid for graphical immersions, and `interval` meshes are
    open segments whose end nodes sit on the boundary.
    """

    model_config = ConfigDict(frozen=True)

    topology: Literal["circle", "torus", "base-copy", "interval"]
    """The mesh topology."""
    shape: Tuple[int, ...]
    """Number of nodes per parameter axis."""
    lower: Tuple[float, ...]
    """Parameter value of the first node per axis."""
    lengths: Tuple[float, ...]
    """Parameter period per axis, or interval length for `interval`."""

    @model_validator(mode="after")
    def _check_shape(self) -> "Mesh":
        if not (len(self.shape) == len(self.lower) == len(self.lengths)):
            raise ValueError("shape, lower and lengths must have the same length")
        if self.topology in ("circle", "interval") and len(self.shape) != 1:
            raise ValueError(f"{self.topology} meshes are one-dimensional")
        if self.topology == "torus" and len(self.shape) != 2:
            raise ValueError("torus meshes are two-dimensional")
        if min(self.shape) < 4:
            raise ValueError(f"meshes need at least 4 nodes per axis, got {self.shape}")
        return self

    @classmethod
    def circle(cls, nodes: int, period: float = TWO_PI) -> "Mesh":
        """Periodic 1-D mesh."""
        return cls(topology="circle", shape=(nodes,), lower=(0.0,), lengths=(period,))

    @classmethod
    def torus(cls, shape: Tuple[int, int], periods: Tuple[float, float] = (TWO_PI, TWO_PI)) -> "Mesh":
        """Periodic 2-D mesh."""
        return cls(topology="torus", shape=tuple(shape), lower=(0.0, 0.0), lengths=tuple(periods))

    @classmethod
    def interval(cls, nodes: int, start: float, stop: float) -> "Mesh":
        """Open 1-D mesh with end nodes at `start` and `stop`."""
        return cls(topology="interval", shape=(nodes,), lower=(start,), lengths=(stop - start,))

    @classmethod
    def base_copy(cls, base: BaseManifold, shape: Union[int, Sequence[int]]) -> "Mesh":
        """One node per node of a periodic base grid."""
        if not base.periodic:
            raise ValueError(f"graphical meshes need a periodic base chart, {base.name} is not")
        shape = (shape,) * base.dim if isinstance(shape, int) else tuple(shape)
        return cls(
            topology="base-copy",
            shape=shape,
            lower=tuple(axis.lower for axis in base.axes),
            lengths=tuple(axis.period for axis in base.axes),
        )

    @property
    def dim(self) -> int:
        """Dimension m of the parameter manifold."""
        return len(self.shape)

    @property
    def periodic(self) -> bool:
        """Whether the mesh wraps around in every axis."""
        return self.topology != "interval"

    @property
    def size(self) -> int:
        """Total number of nodes."""
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> Tuple[float, ...]:
        """Parameter step h per axis."""
        if self.periodic:
            return tuple(L / P for L, P in zip(self.lengths, self.shape))
        return tuple(L / (P - 1) for L, P in zip(self.lengths, self.shape))

    def axis_nodes(self, axis: int) -> FloatArray:
        """Parameter values along one axis."""
        return self.lower[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def nodes(self) -> FloatArray:
        """Parameter values of all nodes, shape (*shape, m)."""
        axes = [self.axis_nodes(k) for k in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def weights(self) -> FloatArray:
        """Quadrature weights: h^m per node, halved at interval ends."""
        w = np.full(self.shape, float(np.prod(self.spacing)))
        if not self.periodic:
            w[0] *= 0.5
            w[-1] *= 0.5
        return w

    def unravel(self, index: int) -> Tuple[int, ...]:
        """Mesh multi-index of a flat node index."""
        return tuple(int(i) for i in np.unravel_index(index, self.shape))

    def _shift(self, f: FloatArray, k: int, axis: int, offset: Optional[FloatArray]) -> FloatArray:
        """Values at node i + k along `axis`, lifting across the period by `offset`."""
        shifted = np.roll(f, -k, axis=axis)
        if offset is None or k == 0:
            return shifted
        count = self.shape[axis]
        wraps = np.floor_divide(np.arange(count) + k, count).astype(float)
        expand = [1] * f.ndim
        expand[axis] = count
        return shifted + wraps.reshape(expand) * np.asarray(offset)

    def _stencil(self, f: FloatArray, axis: int, offset: Optional[FloatArray], weights: Dict[int, float]) -> FloatArray:
        return sum(w * self._shift(f, k, axis, offset) for k, w in weights.items())

    def d1(self, f: FloatArray, axis: int, offset: Optional[FloatArray] = None, order: Optional[int] = None) -> FloatArray:
        """First derivative of a node field along a parameter axis.

        Args:
            f: Field with the mesh shape as leading axes.
            axis: Parameter axis.
            offset: Jump of the field across one period (lifted coordinates),
                broadcast against the trailing axes of `f`.
            order: Finite-difference order, 2 or 4; defaults to
                `geometry.fd_order`. Interval meshes always use order 2.
        """
        h = self.spacing[axis]
        if not self.periodic:
            return np.gradient(f, h, axis=axis, edge_order=2)
        order = order or configs.getattrs("geometry.fd_order")
        return self._stencil(f, axis, offset, _STENCILS[order][0]) / h

    def d2(self, f: FloatArray, axis: int, offset: Optional[FloatArray] = None, order: Optional[int] = None) -> FloatArray:
        """Second derivative of a node field along a parameter axis."""
        h = self.spacing[axis]
        if not self.periodic:
            out = np.empty_like(f, dtype=float)
            inner = [slice(None)] * f.ndim
            inner[axis] = slice(1, -1)
            out[tuple(inner)] = np.diff(f, n=2, axis=axis) / h**2

            def take(i: int) -> FloatArray:
                return np.take(f, i, axis=axis)

            head = (2 * take(0) - 5 * take(1) + 4 * take(2) - take(3)) / h**2
            tail = (2 * take(-1) - 5 * take(-2) + 4 * take(-3) - take(-4)) / h**2
            idx = [slice(None)] * f.ndim
            idx[axis] = 0
            out[tuple(idx)] = head
            idx[axis] = -1
            out[tuple(idx)] = tail
            return out
        order = order or configs.getattrs("geometry.fd_order")
        return self._stencil(f, axis, offset, _STENCILS[order][1]) / h**2
