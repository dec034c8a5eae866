"""The Riemannian cone C(N) = N x R+ with metric dr^2 + r^2 g.

Coordinates are ordered (y^1, ..., y^n, r), so the radial coordinate is the
last component of every cone vector.
"""

import numpy as np

from ..core.config import configs
from ..core.errors import ApexError
from ..core.types import *
from .basegeom import BaseManifold


@dataclass(frozen=True, eq=False)
class ConePoint:
    """A point (y, r) of the cone; the apex r = 0 is not a point."""

    base: FloatArray
    """Chart coordinates y of the base point."""
    r: float
    """Radial coordinate, strictly positive."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", np.atleast_1d(np.asarray(self.base, float)))
        if not self.r > 0:
            raise ApexError(f"cone points need r > 0, got r = {self.r}", module="conegeom")


@dataclass(frozen=True, eq=False)
class ConeTangent:
    """A tangent vector in cone coordinates (y^1, ..., y^n, r)."""

    components: FloatArray
    """The (n+1) components."""


class RiemannianCone:
    """The cone over a base manifold.

    Methods accept either a `ConePoint` or arrays of base points and radii,
    broadcasting over leading axes.
    """

    def __init__(self, base: BaseManifold, r_min: Optional[float] = None) -> None:
        """Initialize the cone.

        Args:
            base: The base manifold N.
            r_min: Apex cutoff; defaults to `geometry.r_min`.
        """
        self.base = base
        if r_min is None:
            r_min = configs.getattrs("geometry.r_min")
        self.r_min = float(r_min)

    @property
    def dim(self) -> int:
        """Ambient dimension n + 1."""
        return self.base.dim + 1

    def check_radius(self, r: ArrayLike) -> FloatArray:
        """Reject radii at or below the apex cutoff.

        Raises:
            ApexError: Naming the first offending node in C order.
        """
        r = np.asarray(r, dtype=float)
        bad = np.atleast_1d(~(r > self.r_min))
        if bad.any():
            index = int(np.flatnonzero(bad.ravel())[0])
            value = np.atleast_1d(r).ravel()[index]
            raise ApexError(
                f"radius {value:.3e} is below r_min = {self.r_min:.1e}",
                module="conegeom",
                index=index,
            )
        return r

    def _split(self, p: Union[ConePoint, FloatArray], r: Optional[ArrayLike]) -> Tuple[FloatArray, FloatArray]:
        if isinstance(p, ConePoint):
            return p.base, self.check_radius(p.r)
        if r is None:
            raise ValueError("radius is required when passing base coordinates")
        return self.base.as_points(p), self.check_radius(r)

    def metric(self, y: ArrayLike, r: ArrayLike) -> FloatArray:
        """Cone metric diag(r^2 g(y), 1) for arrays of points."""
        y, r = self._split(y, r)
        n = self.base.dim
        g = self.base.metric_at(y)
        out = np.zeros(g.shape[:-2] + (n + 1, n + 1))
        out[..., :n, :n] = np.asarray(r)[..., None, None] ** 2 * g
        out[..., n, n] = 1.0
        return out

    def christoffel(self, y: ArrayLike, r: ArrayLike) -> FloatArray:
        """Cone Christoffel symbols for arrays of points.

        The base block is the base Christoffel, Gamma^r_ab = -r g_ab,
        Gamma^a_rb = Gamma^a_br = delta^a_b / r, and all symbols with two or
        more radial indices vanish.
        """
        y, r = self._split(y, r)
        n = self.base.dim
        r = np.asarray(r)[..., None, None]
        g = self.base.metric_at(y)
        out = np.zeros(g.shape[:-2] + (n + 1,) * 3)
        out[..., :n, :n, :n] = self.base.christoffel_at(y)
        out[..., n, :n, :n] = -r * g
        eye = np.broadcast_to(np.eye(n), g.shape) / r
        out[..., :n, n, :n] = eye
        out[..., :n, :n, n] = eye
        return out

    def cone_metric_at(self, p: ConePoint) -> FloatArray:
        """Cone metric at a single point."""
        return self.metric(p.base, p.r)

    def cone_christoffel_at(self, p: ConePoint) -> FloatArray:
        """Cone Christoffel symbols at a single point."""
        return self.christoffel(p.base, p.r)

    def position_vector(self, p: ConePoint) -> ConeTangent:
        """The position vector r d/dr at a point."""
        self.check_radius(p.r)
        components = np.zeros(self.dim)
        components[-1] = p.r
        return ConeTangent(components)

    def inner(self, p: ConePoint, u: ConeTangent, v: ConeTangent) -> float:
        """Cone inner product of two tangent vectors at a point."""
        return float(u.components @ self.cone_metric_at(p) @ v.components)

    def norm(self, p: ConePoint, v: ConeTangent) -> float:
        """Cone norm of a tangent vector."""
        return float(np.sqrt(max(self.inner(p, v, v), 0.0)))

    def __repr__(self) -> str:
        return f"RiemannianCone(base={self.base!r}, r_min={self.r_min:g})"
