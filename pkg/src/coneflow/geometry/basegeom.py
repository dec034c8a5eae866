"""Base manifolds (N, g) described by a single global chart."""

import os

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from ..core.config import configs
from ..core.errors import ChartDegeneracyError, DegenerateMetricError
from ..core.types import *

TWO_PI = 2.0 * np.pi


def levi_civita(metric_inv: FloatArray, metric_grad: FloatArray) -> FloatArray:
    """Christoffel symbols of the second kind from a metric and its gradient.

    Args:
        metric_inv: Inverse metric g^{ad}, shape (..., n, n).
        metric_grad: Derivatives d_k g_ab stored as [..., k, a, b].

    Returns:
        Gamma^a_bc with shape (..., n, n, n).
    """
    # T_dbc = d_b g_dc + d_c g_db - d_d g_bc
    first = np.swapaxes(metric_grad, -3, -2)
    second = np.einsum("...cdb->...dbc", metric_grad)
    lowered = first + second - metric_grad
    return 0.5 * np.einsum("...ad,...dbc->...abc", metric_inv, lowered)


def finite_difference_christoffel(
    metric: Callable[[FloatArray], FloatArray], y: ArrayLike, step: float
) -> FloatArray:
    """Christoffel symbols from centered differences of a metric function.

    Used as an independent oracle for the closed-form and spline symbols.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    g = metric(y)
    grad = np.empty(y.shape[:-1] + (n, n, n))
    for k in range(n):
        shift = np.zeros(n)
        shift[k] = step
        grad[..., k, :, :] = (metric(y + shift) - metric(y - shift)) / (2 * step)
    return levi_civita(np.linalg.inv(g), grad)


class ChartAxis(BaseModel):
    """One coordinate axis of a global chart."""

    lower: float = Field(0.0, description="Lower end of the coordinate range")
    """Lower end of the coordinate range."""
    upper: float = Field(TWO_PI, description="Upper end of the coordinate range")
    """Upper end of the coordinate range."""
    periodic: bool = Field(True, description="Whether the axis wraps around")
    """Whether the axis wraps around."""

    @property
    def period(self) -> float:
        """Length of the coordinate range."""
        return self.upper - self.lower

    def nodes(self, count: int) -> FloatArray:
        """Uniform nodes along the axis.

        Periodic axes omit the upper end. Open intervals use cell midpoints so
        that no node sits on a chart boundary.
        """
        if self.periodic:
            return self.lower + self.period * np.arange(count) / count
        return self.lower + self.period * (np.arange(count) + 0.5) / count


class BaseManifold(ABC):
    """A Riemannian manifold (N, g) given on one global chart.

    Points are arrays whose last axis has length `dim`. Every evaluation is
    vectorized over leading axes, so a whole mesh can be queried at once.
    """

    name: str = "base"

    def __init__(self, axes: Sequence[ChartAxis]) -> None:
        """Initialize the manifold with its chart axes."""
        self.axes = tuple(axes)

    @property
    def dim(self) -> int:
        """The dimension n of N."""
        return len(self.axes)

    @property
    def periodic(self) -> bool:
        """Whether every chart axis is periodic."""
        return all(axis.periodic for axis in self.axes)

    def as_points(self, y: ArrayLike) -> FloatArray:
        """Convert input to an array of chart points with trailing axis `dim`."""
        pts = np.asarray(y, dtype=float)
        if self.dim == 1 and pts.ndim == 0:
            pts = pts.reshape(1)
        if pts.shape[-1] != self.dim:
            raise ValueError(
                f"Chart points of {self.name} need a trailing axis of length "
                f"{self.dim}, got shape {pts.shape}"
            )
        return pts

    def excluded(self, y: FloatArray) -> np.ndarray:
        """Mask of points inside an exclusion zone. None by default."""
        return np.zeros(y.shape[:-1], dtype=bool)

    def check_admissible(self, y: ArrayLike) -> FloatArray:
        """Validate chart points and return them as an array.

        Raises:
            ChartDegeneracyError: If a point lies in an exclusion zone. The
                first offending point in C order is reported.
        """
        pts = self.as_points(y)
        mask = np.atleast_1d(self.excluded(pts))
        if mask.any():
            index = int(np.flatnonzero(mask.ravel())[0])
            raise ChartDegeneracyError(
                f"chart point {pts.reshape(-1, self.dim)[index]} of {self.name} "
                "is inside the exclusion zone",
                module="basegeom",
                index=index,
            )
        return pts

    @abstractmethod
    def _metric(self, y: FloatArray) -> FloatArray:
        """Metric components at admissible points."""
        raise NotImplementedError

    @abstractmethod
    def _metric_grad(self, y: FloatArray) -> FloatArray:
        """Metric derivatives d_k g_ab at admissible points."""
        raise NotImplementedError

    def _christoffel(self, y: FloatArray) -> FloatArray:
        return levi_civita(np.linalg.inv(self._metric(y)), self._metric_grad(y))

    def metric_at(self, y: ArrayLike) -> FloatArray:
        """The metric g_ab(y), symmetric positive definite.

        Raises:
            ChartDegeneracyError: Inside an exclusion zone.
            DegenerateMetricError: If the Cholesky factorization fails.
        """
        pts = self.check_admissible(y)
        g = self._metric(pts)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            smallest = np.linalg.eigvalsh(g.reshape(-1, self.dim, self.dim))[:, 0]
            index = int(np.flatnonzero(smallest <= 0)[0]) if (smallest <= 0).any() else 0
            raise DegenerateMetricError(
                f"metric of {self.name} is not positive definite",
                module="basegeom",
                index=index,
            )
        return g

    def christoffel_at(self, y: ArrayLike) -> FloatArray:
        """Christoffel symbols Gamma^a_bc(y), symmetric in b and c."""
        return self._christoffel(self.check_admissible(y))

    def volume_density_at(self, y: ArrayLike) -> FloatArray:
        """The volume density sqrt(det g(y))."""
        return np.sqrt(np.linalg.det(self.metric_at(y)))

    def grid(self, shape: Union[int, Sequence[int]]) -> FloatArray:
        """Uniform chart grid of the given shape, as points (*shape, dim)."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        if len(shape) != self.dim:
            raise ValueError(f"{self.name} needs a grid shape of length {self.dim}")
        axes = [axis.nodes(count) for axis, count in zip(self.axes, shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def volume(self, shape: Union[int, Sequence[int], None] = None) -> float:
        """Total volume of N by the product midpoint/trapezoidal rule."""
        shape = shape or (256,) * self.dim
        pts = self.grid(shape)
        shape = pts.shape[:-1]
        cell = np.prod([axis.period / count for axis, count in zip(self.axes, shape)])
        return float(self.volume_density_at(pts).sum() * cell)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, dim={self.dim})"


class Circle(BaseManifold):
    """The circle of circumference 2*pi*rho in the angle chart [0, 2*pi)."""

    def __init__(self, rho: float = 1.0) -> None:
        """Initialize the circle.

        Args:
            rho: Scale of the circle. The cone over it has cone angle 2*pi*rho.
        """
        if rho <= 0:
            raise ValueError(f"Circle scale must be positive, got {rho}")
        super().__init__([ChartAxis()])
        self.rho = float(rho)
        self.name = "circle" if rho == 1.0 else f"circle(rho={rho:g})"

    def _metric(self, y: FloatArray) -> FloatArray:
        return np.full(y.shape[:-1] + (1, 1), self.rho**2)

    def _metric_grad(self, y: FloatArray) -> FloatArray:
        return np.zeros(y.shape[:-1] + (1, 1, 1))

    def _christoffel(self, y: FloatArray) -> FloatArray:
        return np.zeros(y.shape[:-1] + (1, 1, 1))

    def volume(self, shape: Any = None) -> float:
        """Circumference 2*pi*rho."""
        return TWO_PI * self.rho


class FlatTorus(BaseManifold):
    """The flat torus with the given periods."""

    name = "torus"

    def __init__(self, periods: Sequence[float] = (TWO_PI, TWO_PI)) -> None:
        """Initialize the torus; the dimension is the number of periods."""
        super().__init__([ChartAxis(upper=p) for p in periods])

    def _metric(self, y: FloatArray) -> FloatArray:
        return np.broadcast_to(np.eye(self.dim), y.shape[:-1] + (self.dim,) * 2).copy()

    def _metric_grad(self, y: FloatArray) -> FloatArray:
        return np.zeros(y.shape[:-1] + (self.dim,) * 3)

    def _christoffel(self, y: FloatArray) -> FloatArray:
        return np.zeros(y.shape[:-1] + (self.dim,) * 3)

    def volume(self, shape: Any = None) -> float:
        """Product of the periods."""
        return float(np.prod([axis.period for axis in self.axes]))


class RoundSphere(BaseManifold):
    """The unit round 2-sphere in the polar chart (theta, phi).

    The metric is diag(1, sin^2 theta). Points with |sin theta| below
    `geometry.pole_exclusion` are rejected.
    """

    name = "sphere"

    def __init__(self, pole_exclusion: Optional[float] = None) -> None:
        """Initialize the sphere chart."""
        super().__init__([ChartAxis(upper=np.pi, periodic=False), ChartAxis()])
        if pole_exclusion is None:
            pole_exclusion = configs.getattrs("geometry.pole_exclusion")
        self.pole_exclusion = float(pole_exclusion)

    def excluded(self, y: FloatArray) -> np.ndarray:
        theta = y[..., 0]
        outside = (theta <= 0) | (theta >= np.pi)
        return outside | (np.abs(np.sin(theta)) < self.pole_exclusion)

    def _metric(self, y: FloatArray) -> FloatArray:
        g = np.zeros(y.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = np.sin(y[..., 0]) ** 2
        return g

    def _metric_grad(self, y: FloatArray) -> FloatArray:
        grad = np.zeros(y.shape[:-1] + (2, 2, 2))
        grad[..., 0, 1, 1] = 2 * np.sin(y[..., 0]) * np.cos(y[..., 0])
        return grad

    def _christoffel(self, y: FloatArray) -> FloatArray:
        theta = y[..., 0]
        gamma = np.zeros(y.shape[:-1] + (2, 2, 2))
        gamma[..., 0, 1, 1] = -np.sin(theta) * np.cos(theta)
        gamma[..., 1, 0, 1] = gamma[..., 1, 1, 0] = np.cos(theta) / np.sin(theta)
        return gamma

    def volume(self, shape: Any = None) -> float:
        """Area 4*pi."""
        return 4 * np.pi


class TabulatedMetric(BaseManifold):
    """A periodic metric interpolated from a table on a regular grid.

    One-dimensional tables use periodic cubic splines; two-dimensional tables
    use bicubic splines on a periodically padded grid. Christoffel symbols come
    from the spline derivatives.
    """

    name = "tabulated"
    _PAD = 4

    def __init__(
        self,
        coords: Sequence[FloatArray],
        values: FloatArray,
        periods: Optional[Sequence[float]] = None,
    ) -> None:
        """Initialize from grid coordinates and metric values.

        Args:
            coords: Per-axis node coordinates, uniformly spaced, upper end
                excluded.
            values: Metric components with shape (*grid, n, n).
            periods: Per-axis periods. Inferred as count times spacing if
                omitted.
        """
        coords = [np.asarray(c, dtype=float) for c in coords]
        dim = len(coords)
        if dim not in (1, 2):
            raise ValueError(f"Tabulated metrics support n = 1 or 2, got {dim}")
        if periods is None:
            periods = [len(c) * (c[1] - c[0]) for c in coords]
        super().__init__(
            [ChartAxis(lower=c[0], upper=c[0] + p) for c, p in zip(coords, periods)]
        )
        values = np.asarray(values, dtype=float)
        values = 0.5 * (values + np.swapaxes(values, -1, -2))
        self._splines: Dict[Tuple[int, int], Any] = {}
        for a in range(dim):
            for b in range(a, dim):
                self._splines[(a, b)] = self._fit(coords, values[..., a, b])

    def _fit(self, coords: List[FloatArray], table: FloatArray) -> Any:
        if len(coords) == 1:
            (x,) = coords
            period = self.axes[0].period
            return CubicSpline(
                np.append(x, x[0] + period), np.append(table, table[0]), bc_type="periodic"
            )
        pad = self._PAD
        padded = np.pad(table, pad, mode="wrap")
        axes = []
        for c, axis in zip(coords, self.axes):
            h = c[1] - c[0]
            axes.append(c[0] + h * np.arange(-pad, len(c) + pad))
        return RectBivariateSpline(axes[0], axes[1], padded, kx=3, ky=3, s=0)

    @classmethod
    def from_file(cls, path: str, periods: Optional[Sequence[float]] = None) -> "TabulatedMetric":
        """Load a whitespace table `y_1 .. y_n g_11 g_12 .. g_nn`.

        Rows may come in any order; the grid must be regular and periodic with
        the upper end omitted.
        """
        if not os.path.isfile(path):
            raise FileNotFoundError(f"Metric table {path} not found")
        table = np.loadtxt(path, ndmin=2)
        dim = {2: 1, 6: 2}.get(table.shape[1])
        if dim is None:
            raise ValueError(
                f"Metric table {path} has {table.shape[1]} columns, expected 2 or 6"
            )
        order = np.lexsort(table[:, :dim][:, ::-1].T)
        table = table[order]
        coords = [np.unique(table[:, k]) for k in range(dim)]
        shape = tuple(len(c) for c in coords)
        if int(np.prod(shape)) != table.shape[0]:
            raise ValueError(f"Metric table {path} is not a full regular grid")
        values = table[:, dim:].reshape(shape + (dim, dim))
        logger.debug(f"Loaded {dim}-D metric table {path} on grid {shape}")
        return cls(coords, values, periods=periods)

    def _wrap(self, y: FloatArray) -> FloatArray:
        lower = np.array([axis.lower for axis in self.axes])
        period = np.array([axis.period for axis in self.axes])
        return lower + np.mod(y - lower, period)

    def _eval(self, key: Tuple[int, int], y: FloatArray, deriv: Tuple[int, ...]) -> FloatArray:
        spline = self._splines[key]
        if self.dim == 1:
            return spline(y[..., 0], sum(deriv))
        return spline.ev(y[..., 0], y[..., 1], dx=deriv[0], dy=deriv[1])

    def _assemble(self, y: FloatArray, deriv: Tuple[int, ...]) -> FloatArray:
        y = self._wrap(y)
        out = np.empty(y.shape[:-1] + (self.dim, self.dim))
        for (a, b) in self._splines:
            out[..., a, b] = out[..., b, a] = self._eval((a, b), y, deriv)
        return out

    def _metric(self, y: FloatArray) -> FloatArray:
        return self._assemble(y, (0,) * self.dim)

    def _metric_grad(self, y: FloatArray) -> FloatArray:
        grad = np.empty(y.shape[:-1] + (self.dim,) * 3)
        for k in range(self.dim):
            deriv = tuple(int(j == k) for j in range(self.dim))
            grad[..., k, :, :] = self._assemble(y, deriv)
        return grad


BUILTIN_BASES: Dict[str, Callable[..., BaseManifold]] = {
    "circle": Circle,
    "torus": FlatTorus,
    "sphere": RoundSphere,
}
"""Selector names for the built-in base manifolds."""


def make_base(name: str, **kwargs: Any) -> BaseManifold:
    """Build a base manifold from a selector name or a metric-table path."""
    if name in BUILTIN_BASES:
        return BUILTIN_BASES[name](**kwargs)
    if os.path.isfile(name):
        return TabulatedMetric.from_file(name, **kwargs)
    raise ValueError(
        f"Unknown base manifold {name!r}, choose from {sorted(BUILTIN_BASES)} "
        "or give a metric table path"
    )
