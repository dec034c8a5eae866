"""Closed-form flows and self-shrinkers used as oracles."""

import numpy as np

from .core.errors import ConfigValidationError, DomainError
from .core.types import *
from .geometry.basegeom import BaseManifold, Circle, RoundSphere, make_base
from .geometry.conegeom import RiemannianCone
from .geometry.immersion import DiscreteImmersion
from .geometry.mesh import Mesh

TWO_PI = 2.0 * np.pi


def shrinker_horizon(r0: float, m: int) -> float:
    """Blow-up time r0^2 / (2m) of the cross-section {r = r0}."""
    return r0**2 / (2 * m)


def shrinker_radius(r0: float, m: int, t: ArrayLike) -> FloatArray:
    """Radius sqrt(r0^2 - 2 m t) of the shrinking cross-section."""
    t = np.asarray(t, dtype=float)
    T = shrinker_horizon(r0, m)
    if np.any(t >= T):
        raise DomainError(f"cross-section has vanished for t >= T = {T}", module="exemplars")
    return np.sqrt(r0**2 - 2 * m * t)


def shrinker_theta(m: int, base_volume: float) -> float:
    """Huisken functional of the cross-section flow, (m/2pi)^(m/2) e^(-m/2) Vol(N)."""
    return (m / TWO_PI) ** (m / 2) * np.exp(-m / 2) * base_volume


def shrinking_cross_section(
    base: BaseManifold,
    r0: float,
    t: float = 0.0,
    shape: Union[int, Sequence[int]] = 256,
    cone: Optional[RiemannianCone] = None,
) -> DiscreteImmersion:
    """The graphical cross-section r = sqrt(r0^2 - 2 m t) over a base grid.

    Raises:
        DomainError: If t >= r0^2 / (2m).
    """
    cone = cone or RiemannianCone(base)
    m = base.dim
    radius = float(shrinker_radius(r0, m, t))
    return DiscreteImmersion.graphical(cone, radius, shape)


def perturbed_shrinker(
    eps: float = 0.05,
    mode: int = 2,
    nodes: int = 256,
    base: Optional[BaseManifold] = None,
) -> DiscreteImmersion:
    """The graph r = 1 + eps cos(mode theta) over the unit circle."""
    base = base or Circle()
    cone = RiemannianCone(base)
    mesh = Mesh.base_copy(base, nodes)
    theta = mesh.nodes()[..., 0]
    return DiscreteImmersion.graphical(cone, 1.0 + eps * np.cos(mode * theta))


def enclosed_area_horizon(im: DiscreteImmersion) -> float:
    """Blow-up time A / (2 pi) of a closed embedded curve in C(S^1) = R^2 \\ {0}.

    The area is computed from the polar graph, so the curve must be graphical
    over the unit circle and enclose the apex.
    """
    if im.mode != "graphical" or im.cone.base.dim != 1:
        raise ValueError("enclosed area needs a graphical curve over a circle")
    rho = getattr(im.cone.base, "rho", 1.0)
    area = 0.5 * np.sum(im.r**2) * im.mesh.spacing[0] * rho
    return float(area / (TWO_PI * rho))


class SampledBaseFlow:
    """A mean curvature flow Phi(., s) on N given by samples in s.

    Nodes are interpolated linearly in s. A single sample is a static
    minimal submanifold.
    """

    def __init__(
        self,
        mesh: Mesh,
        times: Sequence[float],
        points: FloatArray,
        windings: Optional[FloatArray] = None,
        sup_II_base: float = 0.0,
    ) -> None:
        """Initialize from samples.

        Args:
            mesh: Parameter mesh of M.
            times: Increasing sample times s_k.
            points: Base coordinates with shape (len(times), *mesh.shape, n).
            windings: Base coordinate jump per mesh axis.
            sup_II_base: sup |II^N| of the base flow, for the type I bound.
        """
        self.mesh = mesh
        self.times = np.asarray(times, dtype=float)
        self.points = np.asarray(points, dtype=float)
        if self.points.shape[0] != len(self.times):
            raise ValueError("one sample of points is needed per time")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must increase")
        self.windings = windings
        self.sup_II_base = float(sup_II_base)

    def __call__(self, s: float) -> FloatArray:
        """Base coordinates at time s."""
        if len(self.times) == 1:
            return self.points[0]
        if not self.times[0] <= s <= self.times[-1]:
            raise DomainError(
                f"base flow sampled on [{self.times[0]}, {self.times[-1]}], asked for s = {s}",
                module="exemplars",
            )
        k = int(np.clip(np.searchsorted(self.times, s) - 1, 0, len(self.times) - 2))
        w = (s - self.times[k]) / (self.times[k + 1] - self.times[k])
        return (1 - w) * self.points[k] + w * self.points[k + 1]


def equator(nodes: int = 256) -> SampledBaseFlow:
    """The great-circle equator theta = pi/2 of the round S^2, a static flow."""
    mesh = Mesh.circle(nodes)
    phi = mesh.nodes()[..., 0]
    points = np.stack([np.full_like(phi, np.pi / 2), phi], axis=-1)
    return SampledBaseFlow(mesh, [0.0], points[None], windings=np.array([[0.0, TWO_PI]]))


def drifting_alpha(a: float, T: float, m: int, t: float) -> float:
    """Base time alpha(t) = a - log(1 - t/T) / (2m)."""
    return a - np.log(1 - t / T) / (2 * m)


def drifting_example(
    base_flow: SampledBaseFlow,
    a: float,
    T: float,
    m: int,
    t: float = 0.0,
    base: Optional[BaseManifold] = None,
) -> DiscreteImmersion:
    """The flow F(p, t) = (Phi(p, alpha(t)), sqrt(2m(T - t))).

    Raises:
        DomainError: If t >= T.
    """
    if not t < T:
        raise DomainError(f"need t < T, got t = {t}, T = {T}", module="exemplars")
    base = base or RoundSphere()
    cone = RiemannianCone(base)
    radius = np.sqrt(2 * m * (T - t))
    points = base_flow(drifting_alpha(a, T, m, t))
    return DiscreteImmersion(
        cone=cone,
        mesh=base_flow.mesh,
        base=points,
        r=np.full(base_flow.mesh.shape, radius),
        windings=base_flow.windings,
    )


def drifting_type_one_bound(m: int, T: float, t: float, sup_II_base: float = 0.0) -> float:
    """Type I bound m/(2(T-t)) (1 + sup|II^N|^2 / m^2) for the drifting flow."""
    return m / (2 * (T - t)) * (1 + sup_II_base**2 / m**2)


def euclidean_circle(center_distance: float, radius: float, nodes: int = 256) -> DiscreteImmersion:
    """A Euclidean circle in C(S^1) = R^2 \\ {0} in polar cone coordinates.

    The circle is centered at (center_distance, 0). Its polar angle winds once
    when it encloses the apex and not at all otherwise.
    """
    d, a = center_distance, radius
    if not a > 0 or np.isclose(d, a):
        raise DomainError(f"circle must miss the apex, got d = {d}, a = {a}", module="exemplars")
    mesh = Mesh.circle(nodes)
    x = mesh.nodes()[..., 0]
    px, py = d + a * np.cos(x), a * np.sin(x)
    encloses = d < a
    theta = np.unwrap(np.arctan2(py, px))
    return DiscreteImmersion(
        cone=RiemannianCone(Circle()),
        mesh=mesh,
        base=theta[..., None],
        r=np.hypot(px, py),
        windings=np.array([[TWO_PI if encloses else 0.0]]),
    )


def offcenter_circle(center_distance: float, radius: float, t: float = 0.0, nodes: int = 256) -> DiscreteImmersion:
    """The shrinking circle of radius sqrt(a^2 - 2t) about an off-apex center.

    Raises:
        DomainError: Unless d > a > 0 and t < a^2 / 2.
    """
    d, a = center_distance, radius
    if not d > a > 0:
        raise DomainError(f"need d > a > 0, got d = {d}, a = {a}", module="exemplars")
    if not t < a**2 / 2:
        raise DomainError(f"circle has vanished for t >= {a**2 / 2}", module="exemplars")
    return euclidean_circle(d, np.sqrt(a**2 - 2 * t), nodes)


def radial_ray(theta0: float = 0.0, start: float = 1.0, stop: float = 2.0, nodes: int = 65) -> DiscreteImmersion:
    """The radial segment x -> (theta0, x) in C(S^1) with fixed end points."""
    mesh = Mesh.interval(nodes, start, stop)
    x = mesh.nodes()[..., 0]
    return DiscreteImmersion(
        cone=RiemannianCone(Circle()),
        mesh=mesh,
        base=np.full((nodes, 1), theta0),
        r=x,
    )


def log_spiral(rate: float = 0.2, start: float = 0.0, stop: float = TWO_PI, nodes: int = 257) -> DiscreteImmersion:
    """The logarithmic spiral x -> (theta = x, r = exp(rate x)) in C(S^1)."""
    mesh = Mesh.interval(nodes, start, stop)
    x = mesh.nodes()[..., 0]
    return DiscreteImmersion(
        cone=RiemannianCone(Circle()),
        mesh=mesh,
        base=x[..., None],
        r=np.exp(rate * x),
    )


EXEMPLARS: Dict[str, str] = {
    "shrinking-cross-section": "graphical cross-section r = sqrt(r0^2 - 2mt) over a base",
    "drifting-example": "static equator of S^2 carried along by the cross-section radius",
    "offcenter-circle": "Euclidean shrinking circle off the apex of C(S^1)",
    "radial-ray": "stationary radial segment with fixed end points",
    "perturbed-shrinker": "graph r = 1 + eps cos(k theta) over the unit circle",
}
"""Selector strings and one-line descriptions of the shipped exemplars."""


def build_exemplar(name: str, **params: Any) -> DiscreteImmersion:
    """Build an exemplar immersion from its selector and parameters.

    Raises:
        ConfigValidationError: For an unknown selector or parameter.
    """
    if name not in EXEMPLARS:
        raise ConfigValidationError(
            f"Unknown exemplar {name!r}, choose from {sorted(EXEMPLARS)}", module="exemplars"
        )
    take = params.pop
    if name == "shrinking-cross-section":
        base = make_base(take("base", "circle"), **take("base_params", {}))
        im = shrinking_cross_section(base, take("r0", 1.0), take("t", 0.0), take("shape", 256))
    elif name == "drifting-example":
        nodes = take("nodes", 256)
        im = drifting_example(equator(nodes), take("a", 0.0), take("T", 0.5), 1, take("t", 0.0))
    elif name == "offcenter-circle":
        im = offcenter_circle(
            take("center_distance", 3.0), take("radius", 0.5), take("t", 0.0), take("nodes", 256)
        )
    elif name == "radial-ray":
        im = radial_ray(take("theta0", 0.0), take("start", 1.0), take("stop", 2.0), take("nodes", 65))
    else:
        im = perturbed_shrinker(take("eps", 0.05), take("mode", 2), take("nodes", 256))
    if params:
        raise ConfigValidationError(
            f"Unknown parameters {sorted(params)} for exemplar {name!r}", module="exemplars"
        )
    return im


def exemplar_horizon(name: str, **params: Any) -> Optional[float]:
    """The exact blow-up time of an exemplar, when it has one in closed form."""
    if name == "shrinking-cross-section":
        base = make_base(params.get("base", "circle"), **params.get("base_params", {}))
        return shrinker_horizon(params.get("r0", 1.0), base.dim) - params.get("t", 0.0)
    if name == "offcenter-circle":
        return params.get("radius", 0.5) ** 2 / 2 - params.get("t", 0.0)
    if name == "drifting-example":
        return params.get("T", 0.5) - params.get("t", 0.0)
    return None
