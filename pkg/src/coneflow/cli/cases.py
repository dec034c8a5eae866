"""Self-contained verification cases behind `coneflow verify`."""

import numpy as np

from ..core.errors import ConfigValidationError
from ..core.types import *
from ..exemplars import shrinker_theta, shrinking_cross_section
from ..flow import FlowState
from ..geometry import Circle, lemma_one_residual
from ..monotone import huisken_functional
from ..rescale import parabolic_rescale, verify_rescale_identities
from ..slag import (
    CalabiYauFrame,
    SLagSample,
    certify_special_lagrangian,
    great_circle_samples,
    hopf_circle_samples,
    legendrian_cone_check,
    max_residuals,
    sample_level_set,
)
from ..spectra import CircleMesh, deformation_dimension, reeb_exclusion_check
from ..utils import make_rng


class CaseResult(BaseModel):
    """Outcome of one verification case."""

    name: str
    """Case selector."""
    passed: bool
    """Whether every checked value is within tolerance."""
    values: Dict[str, Any] = Field(default_factory=dict)
    """The checked quantities."""
    tolerance: Optional[float] = None
    """Tolerance the values were held to, if a single one applies."""


def rescale_identities(lam: float = 3.0) -> CaseResult:
    """Scaling identities of a shrinking circle snapshot at t = 0.1, T = 0.5."""
    tol = 1e-10
    T, t = 0.5, 0.1
    im = shrinking_cross_section(Circle(), 1.0, t, 64)
    state = FlowState(t=t, immersion=im)
    report = verify_rescale_identities(state, parabolic_rescale(im, lam, t, T), lam, T)
    values = report.model_dump()
    return CaseResult(
        name="rescale-identities", passed=report.max_deviation() <= tol, values=values, tolerance=tol
    )


def shrinker_entropy() -> CaseResult:
    """Theta of the shrinking circle equals its closed form at every time."""
    tol = 1e-10
    errors = []
    for t in (0.0, 0.25, 0.45):
        im = shrinking_cross_section(Circle(), 1.0, t, 64)
        theta = huisken_functional(im, t, 0.5)
        errors.append(abs(theta - shrinker_theta(1, 2 * np.pi)))
    return CaseResult(
        name="shrinker-entropy",
        passed=max(errors) <= tol,
        values={"expected": shrinker_theta(1, 2 * np.pi), "max_error": max(errors)},
        tolerance=tol,
    )


def radius_laplacian() -> CaseResult:
    """Lap r^2 = 2(g(H, F) + m) on a perturbed graph over the circle."""
    tol = 1e-3
    im = shrinking_cross_section(Circle(), 1.0, 0.0, 256)
    x = im.mesh.nodes()[..., 0]
    perturbed = im.with_values(r=1.0 + 0.1 * np.cos(2 * x))
    residual = float(np.max(np.abs(lemma_one_residual(perturbed))))
    return CaseResult(
        name="radius-laplacian", passed=residual <= tol, values={"max_residual": residual}, tolerance=tol
    )


def slag_parity() -> CaseResult:
    """Certified level sets for n = 2, 3 and the parity negative control."""
    tol = 1e-10
    values: Dict[str, Any] = {}
    for n in (2, 3):
        samples = sample_level_set(n, 0.0, 1.0, 20, rng=make_rng(f"verify-slag-{n}"))
        values[f"n{n}_residual_omega"], values[f"n{n}_residual_imOmega"] = max_residuals(samples)
    control = SLagSample(
        index=0, point=np.array([1.0, 1.0], dtype=complex), frame=np.array([[1j, 1.0], [-1j, 1.0]])
    )
    control_omega, control_im = certify_special_lagrangian(control)
    values["control_residual_omega"] = control_omega
    values["control_residual_imOmega"] = control_im
    passed = all(v <= tol for k, v in values.items() if not k.startswith("control"))
    passed = passed and control_omega <= tol and control_im > 0.5
    return CaseResult(name="slag-parity", passed=passed, values=values, tolerance=tol)


def legendrian_links() -> CaseResult:
    """The great circle link is Legendrian, the Hopf fibre is not."""
    good = legendrian_cone_check(great_circle_samples(32))
    bad = legendrian_cone_check(hopf_circle_samples(32))
    return CaseResult(
        name="legendrian",
        passed=good.is_legendrian() and not bad.is_legendrian() and good.consistency <= 1e-12,
        values={"great_circle": good.model_dump(), "hopf_circle": bad.model_dump()},
        tolerance=1e-10,
    )


def volume_normalization() -> CaseResult:
    """omega^n / n! against the Omega wedge Omega-bar term for n = 2, 3, 4."""
    tol = 1e-12
    values = {f"n{n}": CalabiYauFrame(n).normalization_residual() for n in (2, 3, 4)}
    return CaseResult(
        name="volume-normalization", passed=max(values.values()) <= tol, values=values, tolerance=tol
    )


def circle_spectrum() -> CaseResult:
    """Ker(Lap - 4) on the circle of length 2 pi is two-dimensional; Reeb is excluded."""
    mesh = CircleMesh(2 * np.pi, 512)
    result = deformation_dimension(mesh, 2)
    reeb = reeb_exclusion_check(mesh, 2)
    return CaseResult(
        name="circle-spectrum",
        passed=result.deformation_dim == 2 and abs(reeb - 4.0) <= 1e-12,
        values={"deformation_dim": result.deformation_dim, "ohnita_count": result.ohnita_count, "reeb_violation": reeb},
    )


VERIFY_CASES: Dict[str, Tuple[str, Callable[..., CaseResult]]] = {
    "rescale-identities": ("parabolic rescaling identities of a snapshot", rescale_identities),
    "shrinker-entropy": ("Theta of the shrinking circle against its closed form", shrinker_entropy),
    "radius-laplacian": ("Lap r^2 = 2(g(H, F) + m) on a perturbed graph", radius_laplacian),
    "slag-parity": ("special Lagrangian certification and the parity control", slag_parity),
    "legendrian": ("Legendrian link against the Hopf fibre", legendrian_links),
    "volume-normalization": ("omega^n / n! against Omega wedge Omega-bar", volume_normalization),
    "circle-spectrum": ("deformation dimension of the round circle link", circle_spectrum),
}
"""Verification case selectors with descriptions and runners."""

SCALED_CASES = frozenset({"rescale-identities"})
"""Cases that take the rescaling factor lambda."""


def run_case(name: str, lam: float = 3.0) -> CaseResult:
    """Run one case by selector."""
    if name not in VERIFY_CASES:
        raise ConfigValidationError(f"Unknown case {name!r}, choose from {sorted(VERIFY_CASES)}", module="cli")
    runner = VERIFY_CASES[name][1]
    result = runner(lam) if name in SCALED_CASES else runner()
    logger.info(f"case {name}: {'PASS' if result.passed else 'FAIL'}")
    return result
