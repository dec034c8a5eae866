"""Backward heat kernel, Huisken functional and self-similarity residuals.

All integrals use the same node-wise quadrature, sqrt(det g) times the mesh
weights, so identities compared across snapshots share discretization error.
"""

import numpy as np

from .core.config import configs
from .core.errors import DomainError, InsufficientSamplesError
from .core.types import *
from .geometry.immersion import (
    DiscreteImmersion,
    decompose_normal,
    laplace_beltrami,
    tangential_position_norm,
)


class MonotoneSample(BaseModel):
    """The Huisken functional and its dissipation at one time."""

    t: float
    """Flow time."""
    theta: float = Field(..., ge=0.0)
    """Huisken functional."""
    dissipation: float = Field(..., ge=0.0)
    """Weighted integral of |F^perp / (2(T - t)) + H|^2."""
    pointwise_max_residual: float = Field(..., ge=0.0)
    """Maximum node value of |F^perp / (2(T - t)) + H|."""


class ShrinkerFit(BaseModel):
    """Result of a self-shrinker test H = lambda F^perp."""

    residual: float
    """Maximum node value of |H - lambda F^perp| at the requested lambda."""
    best_lambda: float
    """The lambda minimizing the weighted L2 residual."""
    best_residual: float
    """Maximum node residual at the best lambda."""


class DissipationReport(BaseModel):
    """Comparison of dTheta/dt with minus the dissipation."""

    times: List[float]
    """Sample times where the centered difference exists."""
    dtheta_dt: List[float]
    """Centered differences of Theta."""
    dissipation: List[float]
    """Dissipation at the same times."""
    mismatch: List[float]
    """|dTheta/dt + dissipation| per time."""
    max_mismatch: float
    """Largest mismatch."""
    max_theta_increase: float
    """Largest increase Theta(t2) - Theta(t1) over t1 < t2; 0 when monotone."""


MONOTONE_COLUMNS = ["t", "theta", "dissipation", "dtheta_dt", "mismatch"]
"""Columns of the monotonicity CSV."""


def _tau(t: float, T: float) -> float:
    if not t < T:
        raise DomainError(f"need t < T, got t = {t}, T = {T}", module="monotone")
    return T - t


def backward_heat_kernel(y: ArrayLike, t: float, T: float, m: int) -> FloatArray:
    """rho_T(y, t) = (4 pi (T - t))^(-m/2) exp(-y^2 / (4 (T - t))).

    Raises:
        DomainError: If t >= T.
    """
    tau = _tau(t, T)
    y = np.asarray(y, dtype=float)
    return (4 * np.pi * tau) ** (-m / 2) * np.exp(-(y**2) / (4 * tau))


def _weights(im: DiscreteImmersion) -> FloatArray:
    return im.geometry.sqrt_det * im.mesh.weights()


def huisken_functional(im: DiscreteImmersion, t: float, T: float) -> float:
    """Integral of rho_T(r(F), t) against the induced volume."""
    rho = backward_heat_kernel(im.r, t, T, im.m)
    return float(np.sum(rho * _weights(im)))


def self_similar_field(im: DiscreteImmersion, t: float, T: float) -> FloatArray:
    """The vector field F^perp / (2(T - t)) + H at every node."""
    tau = _tau(t, T)
    _, normal = decompose_normal(im, im.position_field())
    return normal / (2 * tau) + im.geometry.mean_curvature


def self_similar_residual(im: DiscreteImmersion, t: float, T: float) -> Tuple[float, float]:
    """Weighted integral and pointwise maximum of |F^perp/(2(T-t)) + H|."""
    norm2 = np.maximum(im.cone_norm2(self_similar_field(im, t, T)), 0.0)
    rho = backward_heat_kernel(im.r, t, T, im.m)
    return float(np.sum(rho * norm2 * _weights(im))), float(np.sqrt(norm2.max()))


def self_shrinker_residual(
    im: DiscreteImmersion,
    lam: float,
    t: Optional[float] = None,
    T: Optional[float] = None,
) -> ShrinkerFit:
    """Test the self-similar equation H = lambda F^perp.

    The best-fit lambda minimizes the residual in L2(rho) where rho is the
    backward heat kernel at (t, T); without a time the kernel at T - t = 1 is
    used.
    """
    H = im.geometry.mean_curvature
    _, normal = decompose_normal(im, im.position_field())
    G = im.geometry.ambient_metric

    def _max_residual(value: float) -> float:
        diff = H - value * normal
        return float(np.sqrt(np.maximum(im.cone_norm2(diff), 0.0).max()))

    t0, T0 = (0.0, 1.0) if t is None or T is None else (t, T)
    w = backward_heat_kernel(im.r, t0, T0, im.m) * _weights(im)
    numerator = np.sum(w * np.einsum("...a,...ab,...b->...", H, G, normal))
    denominator = np.sum(w * im.cone_norm2(normal))
    best = float(numerator / denominator) if denominator > 0 else 0.0
    return ShrinkerFit(
        residual=_max_residual(lam), best_lambda=best, best_residual=_max_residual(best)
    )


def heat_kernel_laplacian_residual(im: DiscreteImmersion, t: float, T: float) -> FloatArray:
    """Residual of Lap rho = rho(|F^T|^2/(4 tau^2) - m/(2 tau) - g(H,F)/(2 tau)).

    Here tau = T - t and rho is the backward heat kernel along F.
    """
    tau = _tau(t, T)
    rho = backward_heat_kernel(im.r, t, T, im.m)
    g_H_F = im.r * im.geometry.mean_curvature[..., -1]
    rhs = rho * (
        tangential_position_norm(im) / (4 * tau**2) - im.m / (2 * tau) - g_H_F / (2 * tau)
    )
    return laplace_beltrami(im, rho) - rhs


def theta_sensitivity(
    im: DiscreteImmersion, t: float, T: float, rel: Optional[float] = None
) -> Dict[str, float]:
    """Theta at T(1 - rel), T and T(1 + rel).

    Perturbations that would put T at or before t are reported as NaN.
    """
    if rel is None:
        rel = configs.getattrs("monotone.sensitivity")
    out = {}
    for key, horizon in (("minus", T * (1 - rel)), ("nominal", T), ("plus", T * (1 + rel))):
        out[key] = huisken_functional(im, t, horizon) if t < horizon else float("nan")
    return out


def monotone_sample(im: DiscreteImmersion, t: float, T: float) -> MonotoneSample:
    """Theta, dissipation and pointwise residual at one snapshot."""
    dissipation, pointwise = self_similar_residual(im, t, T)
    return MonotoneSample(
        t=t,
        theta=huisken_functional(im, t, T),
        dissipation=dissipation,
        pointwise_max_residual=pointwise,
    )


def monotone_samples(trace: Any, T: float) -> List[MonotoneSample]:
    """Samples at every stored snapshot of a flow trace with t < T."""
    samples = []
    for index, snapshot in sorted(trace.snapshots.items()):
        t = trace.rows[index].t
        if t < T:
            samples.append(monotone_sample(snapshot, t, T))
    return samples


def dissipation_check(samples: Sequence[MonotoneSample]) -> DissipationReport:
    """Compare centered differences of Theta with minus the dissipation.

    Raises:
        InsufficientSamplesError: With fewer than three samples.
    """
    if len(samples) < 3:
        raise InsufficientSamplesError(
            f"need at least 3 Theta samples, got {len(samples)}", module="monotone"
        )
    ordered = sorted(samples, key=lambda s: s.t)
    t = np.array([s.t for s in ordered])
    theta = np.array([s.theta for s in ordered])
    dissipation = np.array([s.dissipation for s in ordered])
    rate = np.gradient(theta, t)[1:-1]
    mismatch = np.abs(rate + dissipation[1:-1])
    running_min = np.minimum.accumulate(theta)
    increase = float(np.max(theta - running_min))
    return DissipationReport(
        times=t[1:-1].tolist(),
        dtheta_dt=rate.tolist(),
        dissipation=dissipation[1:-1].tolist(),
        mismatch=mismatch.tolist(),
        max_mismatch=float(mismatch.max()),
        max_theta_increase=increase,
    )


def monotone_table(
    samples: Sequence[MonotoneSample], report: DissipationReport
) -> List[List[float]]:
    """Rows of the monotonicity CSV; edge samples carry no difference."""
    by_time = dict(zip(report.times, zip(report.dtheta_dt, report.mismatch)))
    rows = []
    for s in sorted(samples, key=lambda s: s.t):
        rate, mismatch = by_time.get(s.t, (None, None))
        rows.append([s.t, s.theta, s.dissipation, rate, mismatch])
    return rows
