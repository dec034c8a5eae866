"""Legendrian links and Lagrangian cones in C^n = C(S^{2n-1})."""

import numpy as np

from ..core.types import *
from .forms import ambient_inner, omega

LinkSample = Tuple[ArrayLike, ArrayLike]
"""A point of the link on the unit sphere and its tangent frame (columns)."""


class LegendrianReport(BaseModel):
    """Contact and symplectic residuals over samples of a link."""

    max_eta: float
    """Largest |eta(v)| over normalized link tangent vectors."""
    max_omega: float
    """Largest normalized |omega| over pairs of cone frame vectors."""
    consistency: float
    """Largest |omega(d/dr, v) - eta(v)| over link tangent vectors."""
    count: int
    """Number of samples."""

    def is_legendrian(self, tol: float = 1e-10) -> bool:
        """Whether both residuals vanish to tolerance."""
        return self.max_eta <= tol and self.max_omega <= tol


def reeb_field(z: ArrayLike) -> ComplexArray:
    """The Reeb field xi = J(r d/dr) = i z."""
    return 1j * np.asarray(z, dtype=complex)


def contact_form(z: ArrayLike, v: ArrayLike) -> float:
    """eta(v) = g(xi, v) at a point z of the unit sphere."""
    return ambient_inner(reeb_field(z), v)


def legendrian_cone_check(samples: Sequence[LinkSample]) -> LegendrianReport:
    """Evaluate eta on link frames and omega on the cone frames frame + {d/dr}.

    A link is Legendrian exactly when its cone is Lagrangian, so both maxima
    vanish together.
    """
    max_eta = max_omega = consistency = 0.0
    for z, frame in samples:
        z = np.asarray(z, dtype=complex)
        radius = np.linalg.norm(z)
        if not np.isclose(radius, 1.0):
            raise ValueError(f"link points must lie on the unit sphere, got |z| = {radius}")
        frame = np.asarray(frame, dtype=complex).reshape(len(z), -1)
        radial = z / radius
        vectors = [frame[:, k] / np.linalg.norm(frame[:, k]) for k in range(frame.shape[1])]
        for v in vectors:
            eta = contact_form(z, v)
            max_eta = max(max_eta, abs(eta))
            consistency = max(consistency, abs(omega(radial, v) - eta))
        cone = vectors + [radial]
        for i in range(len(cone)):
            for j in range(i + 1, len(cone)):
                max_omega = max(max_omega, abs(omega(cone[i], cone[j])))
    return LegendrianReport(
        max_eta=max_eta, max_omega=max_omega, consistency=consistency, count=len(samples)
    )


def great_circle_samples(count: int) -> List[LinkSample]:
    """The Legendrian great circle (e^{it}, e^{-it}) / sqrt(2) in S^3."""
    t = np.linspace(0, 2 * np.pi, count, endpoint=False)
    return [
        (np.array([np.exp(1j * s), np.exp(-1j * s)]) / np.sqrt(2),
         np.array([[1j * np.exp(1j * s)], [-1j * np.exp(-1j * s)]]) / np.sqrt(2))
        for s in t
    ]


def hopf_circle_samples(count: int) -> List[LinkSample]:
    """The Hopf fibre (e^{it}, 0) in S^3, an orbit of the Reeb flow."""
    t = np.linspace(0, 2 * np.pi, count, endpoint=False)
    return [(np.array([np.exp(1j * s), 0.0]), np.array([[1j * np.exp(1j * s)], [0.0]])) for s in t]
