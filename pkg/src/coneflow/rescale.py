"""Parabolic rescaling (y, r) -> (y, lambda r) at s = lambda^2 (t - T)."""

import numpy as np

from .core.types import *
from .flow import FlowState
from .geometry.immersion import DiscreteImmersion
from .monotone import huisken_functional
from .tracing import FlowTrace


class RescaleReport(BaseModel):
    """Maximum relative deviations of the scaling identities."""

    lam: float
    """Scale factor."""
    s: float
    """Rescaled time."""
    metric: float
    """g^lambda against lambda^2 g."""
    II2: float
    """|II^lambda|^2 against |II|^2 / lambda^2."""
    scaled_II2: float
    """(T - t)|II|^2 against -s |II^lambda|^2."""
    H_base: float
    """H^{lambda, a} against H^a / lambda^2 for base components."""
    H_radial: float
    """H^{lambda, n+1} against H^{n+1} / lambda."""
    theta: Optional[float] = None
    """Theta(original; t, T) against Theta(rescaled; s, 0)."""

    def max_deviation(self) -> float:
        """Largest deviation over all identities."""
        values = [self.metric, self.II2, self.scaled_II2, self.H_base, self.H_radial]
        if self.theta is not None:
            values.append(self.theta)
        return max(values)


def parabolic_rescale(im: DiscreteImmersion, lam: float, t: float, T: float) -> Tuple[DiscreteImmersion, float]:
    """Rescale a snapshot at time t < T by lam.

    Returns:
        The rescaled immersion and its time s = lam^2 (t - T).
    """
    if not lam > 0:
        raise ValueError(f"scale must be positive, got {lam}")
    if not t < T:
        raise ValueError(f"rescaling needs t < T, got t = {t}, T = {T}")
    return im.with_values(r=lam * im.r), lam**2 * (t - T)


def _relative(actual: FloatArray, expected: FloatArray, floor: float = 0.0) -> float:
    scale = max(float(np.max(np.abs(expected))), floor)
    diff = np.max(np.abs(actual - expected))
    return float(diff / scale) if scale > 0 else float(diff)


def verify_rescale_identities(
    original: FlowState,
    rescaled: Tuple[DiscreteImmersion, float],
    lam: float,
    T: float,
    with_theta: bool = True,
) -> RescaleReport:
    """Compare the geometry of a snapshot and its rescaling."""
    im, t = original.immersion, original.t
    im_lam, s = rescaled
    g, g_lam = im.geometry, im_lam.geometry
    n = im.cone.base.dim
    # components that vanish by symmetry are measured against the whole vector
    H_scale = float(np.max(np.abs(g.mean_curvature)))
    theta = None
    if with_theta:
        theta = _relative(
            np.array(huisken_functional(im_lam, s, 0.0)),
            np.array(huisken_functional(im, t, T)),
        )
    return RescaleReport(
        lam=lam,
        s=s,
        metric=_relative(g_lam.metric, lam**2 * g.metric),
        II2=_relative(g_lam.II2, g.II2 / lam**2),
        scaled_II2=_relative(-s * g_lam.II2, (T - t) * g.II2),
        H_base=_relative(
            g_lam.mean_curvature[..., :n], g.mean_curvature[..., :n] / lam**2, H_scale / lam**2
        ),
        H_radial=_relative(g_lam.mean_curvature[..., n], g.mean_curvature[..., n] / lam, H_scale / lam),
        theta=theta,
    )


def rescaled_trajectory(trace: FlowTrace, lam: float, T: float) -> List[Tuple[float, DiscreteImmersion]]:
    """Sample the rescaled flow from the stored snapshots with t < T.

    The rescaled flow at s is the snapshot at t = T + s / lam^2 scaled by lam.
    """
    samples = []
    for index, snapshot in sorted(trace.snapshots.items()):
        t = trace.rows[index].t
        if t < T:
            im_lam, s = parabolic_rescale(snapshot, lam, t, T)
            samples.append((s, im_lam))
    return samples


def scaled_curvature_series(trace: FlowTrace, lam: float, T: float) -> Tuple[FloatArray, FloatArray]:
    """Series of (T - t) sup|II|^2 and -s sup|II^lambda|^2 along a trace.

    Both series agree node-wise for every lambda, so a type I bound with
    constant C carries over to the rescaled flow with the same C.
    """
    original, scaled = [], []
    for (index, snapshot), (s, im_lam) in zip(
        sorted((i, sn) for i, sn in trace.snapshots.items() if trace.rows[i].t < T),
        rescaled_trajectory(trace, lam, T),
    ):
        original.append((T - trace.rows[index].t) * snapshot.geometry.II2.max())
        scaled.append(-s * im_lam.geometry.II2.max())
    return np.asarray(original), np.asarray(scaled)
