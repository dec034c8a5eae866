"""Closedness of beta = r phi dr + r^2 gamma on the cone over a circle.

On C(Sigma) with metric dr^2 + r^2 g_Sigma, beta is closed iff 2 gamma = d phi,
and then coclosed iff Lap_Sigma phi = 2n phi. For a circle Sigma the
cone is two-dimensional and both conditions can also be checked directly.
"""

import numpy as np

from ..core.types import *
from ..geometry.mesh import Mesh


class ClosednessResiduals(BaseModel):
    """Node residuals of the closedness and coclosedness conditions at r = 1."""

    closed: List[float]
    """2 gamma - d phi, or the d beta coefficient of dr ^ dx."""
    coclosed: List[float]
    """The coclosedness residual, equal to Lap phi - 2n phi once closed."""

    def max_closed(self) -> float:
        """Largest |closed| value."""
        return float(np.max(np.abs(self.closed)))

    def max_coclosed(self) -> float:
        """Largest |coclosed| value."""
        return float(np.max(np.abs(self.coclosed)))


def closedness_predicates(phi: ArrayLike, gamma: ArrayLike, n: int, length: float) -> ClosednessResiduals:
    """The predicate pair 2 gamma = d phi and d*_Sigma gamma + n phi = 0 on a circle.

    `gamma` holds the arc-length component of the 1-form. The coclosed
    residual is scaled by -2, so it reads Lap phi - 2n phi when gamma = d phi / 2.
    """
    phi = np.asarray(phi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    mesh = Mesh.circle(len(phi), period=length)
    closed = 2 * gamma - mesh.d1(phi, 0)
    coclosed = -2 * (mesh.d1(gamma, 0) + n * phi)
    return ClosednessResiduals(closed=closed.tolist(), coclosed=coclosed.tolist())


def exterior_closedness(phi: ArrayLike, gamma: ArrayLike, length: float, dr: float = 1e-3) -> ClosednessResiduals:
    """Evaluate d beta and d* beta directly on the 2-D cone over a circle.

    beta has components beta_r = r phi and beta_x = r^2 gamma on an (x, r)
    grid around r = 1. d beta is the dr ^ dx coefficient d_r beta_x - d_x beta_r,
    divided by r, and the codifferential is -div beta with
    div beta = r^-1 d_mu(r g^{mu nu} beta_nu). Both are taken at r = 1.
    The cone over a circle is the n = 2 case.
    """
    phi = np.asarray(phi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    mesh = Mesh.circle(len(phi), period=length)
    r = np.array([1.0 - dr, 1.0, 1.0 + dr])[None, :]
    beta_r = r * phi[:, None]
    beta_x = r**2 * gamma[:, None]
    d_beta = (np.gradient(beta_x, dr, axis=1) - mesh.d1(beta_r, 0)) / r
    # sqrt(det) = r, g^{rr} = 1, g^{xx} = r^-2
    flux_r = r * beta_r
    flux_x = r * beta_x / r**2
    div = (np.gradient(flux_r, dr, axis=1) + mesh.d1(flux_x, 0)) / r
    return ClosednessResiduals(closed=d_beta[:, 1].tolist(), coclosed=(-2 * div[:, 1]).tolist())
