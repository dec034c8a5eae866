"""Torus-invariant special Lagrangian level sets in C^n.

The level sets are cut out by the moment map of the T^{n-1} action and by
one real part of w^1 ... w^n: the real part for even n, the imaginary part
for odd n. Samples are Newton-corrected seeds spread along torus orbits,
each with the tangent frame given by the kernel of the constraint Jacobian.
"""

import numpy as np
from scipy.linalg import lstsq, null_space

from ..core.config import configs
from ..core.errors import DomainError, EmptyLevelSetError, FrameDegeneracyError
from ..core.io import dump_csv
from ..core.types import *
from ..utils import make_rng
from .forms import ambient_inner, holomorphic_volume, omega, to_complex, to_real

AnglePart = Literal["auto", "re", "im"]


@dataclass(frozen=True, eq=False)
class SLagSample:
    """A point of a candidate special Lagrangian with its tangent frame."""

    index: int
    """Sample index in generation order."""
    point: ComplexArray
    """The point w in C^n."""
    frame: ComplexArray
    """n real tangent vectors, stored as the complex columns of an n x n array."""
    residual_omega: float = float("nan")
    """Largest normalized |omega(e_i, e_j)| over frame pairs."""
    residual_imOmega: float = float("nan")
    """Normalized |Im(e^{i chi} Omega(e_1, ..., e_n))|."""

    @property
    def n(self) -> int:
        """Complex dimension."""
        return len(self.point)


def moment_map(w: ArrayLike) -> FloatArray:
    """Moment map (|w^2|^2 - |w^1|^2, ..., |w^n|^2 - |w^1|^2)."""
    w = np.asarray(w, dtype=complex)
    if not np.any(w):
        raise DomainError("the moment map is not defined at the origin", module="slag")
    moduli = np.abs(w) ** 2
    return moduli[1:] - moduli[0]


def torus_action(w: ArrayLike, phases: ArrayLike) -> ComplexArray:
    """Act by (phi_2, ..., phi_n) in T^{n-1}.

    w^j -> e^{i phi_j} w^j for j >= 2 and w^1 -> e^{-i(phi_2 + ... + phi_n)} w^1,
    which keeps both the moduli differences and the product w^1 ... w^n.
    """
    w = np.asarray(w, dtype=complex)
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (len(w) - 1,):
        raise ValueError(f"need {len(w) - 1} phases, got shape {phases.shape}")
    factors = np.exp(1j * np.concatenate([[-phases.sum()], phases]))
    return w * factors


def _resolve_part(n: int, part: AnglePart) -> str:
    if part == "auto":
        return "re" if n % 2 == 0 else "im"
    if part not in ("re", "im"):
        raise ValueError(f"part must be 'auto', 're' or 'im', got {part!r}")
    return part


def angle_function(w: ArrayLike, part: AnglePart = "auto") -> float:
    """Re(w^1 ... w^n) for even n and Im(w^1 ... w^n) for odd n.

    Raises:
        DomainError: If a component vanishes, so no logarithmic coordinate exists.
    """
    w = np.asarray(w, dtype=complex)
    floor = configs.getattrs("slag.component_floor")
    small = np.abs(w) <= floor
    if small.any():
        raise DomainError(
            f"component w^{int(np.flatnonzero(small)[0]) + 1} vanishes",
            module="slag",
            index=int(np.flatnonzero(small)[0]),
        )
    product = np.prod(w)
    return float(product.real if _resolve_part(len(w), part) == "re" else product.imag)


def constraints(w: ArrayLike, c: ArrayLike, c_prime: float, part: AnglePart = "auto") -> FloatArray:
    """The n constraint values whose common zero set is the level set."""
    w = np.asarray(w, dtype=complex)
    product = np.prod(w)
    angle = product.real if _resolve_part(len(w), part) == "re" else product.imag
    moduli = np.abs(w) ** 2
    return np.concatenate([moduli[1:] - moduli[0] - np.asarray(c, dtype=float), [angle - c_prime]])


def constraint_gradients(w: ArrayLike, part: AnglePart = "auto") -> FloatArray:
    """Gradients of the n constraints in R^2n, one per row.

    d|w^j|^2 = 2(x_j, y_j); with c_k the product of all components but w^k,
    d Re P = (Re c, -Im c) and d Im P = (Im c, Re c).
    """
    w = np.asarray(w, dtype=complex)
    n = len(w)
    rows = np.zeros((n, 2 * n))
    for j in range(1, n):
        rows[j - 1, [j, n + j]] = 2 * w[j].real, 2 * w[j].imag
        rows[j - 1, [0, n]] -= 2 * w[0].real, 2 * w[0].imag
    cofactors = np.array([np.prod(np.delete(w, k)) for k in range(n)])
    if _resolve_part(n, part) == "re":
        rows[-1] = np.concatenate([cofactors.real, -cofactors.imag])
    else:
        rows[-1] = np.concatenate([cofactors.imag, cofactors.real])
    return rows


def level_set_residual(w: ArrayLike, c: ArrayLike, c_prime: float, part: AnglePart = "auto") -> float:
    """Largest absolute constraint value at w."""
    return float(np.max(np.abs(constraints(w, c, c_prime, part))))


def _newton(
    w: ComplexArray, c: FloatArray, c_prime: float, part: AnglePart, tol: float, max_iter: int
) -> Optional[ComplexArray]:
    v = to_real(w)
    for _ in range(max_iter):
        phi = constraints(to_complex(v), c, c_prime, part)
        if np.max(np.abs(phi)) <= tol:
            return to_complex(v)
        step, *_ = lstsq(constraint_gradients(to_complex(v), part), phi)
        v = v - step
        if not np.all(np.isfinite(v)):
            return None
    phi = constraints(to_complex(v), c, c_prime, part)
    return to_complex(v) if np.max(np.abs(phi)) <= tol else None


def tangent_frame(w: ArrayLike, part: AnglePart = "auto", index: Optional[int] = None) -> ComplexArray:
    """Orthonormal basis of the kernel of the constraint differentials at w.

    Raises:
        FrameDegeneracyError: If the constraint Jacobian loses rank.
    """
    w = np.asarray(w, dtype=complex)
    n = len(w)
    J = constraint_gradients(w, part)
    singular = np.linalg.svd(J, compute_uv=False)
    rcond = configs.getattrs("slag.min_singular")
    if singular[0] == 0 or singular[-1] / singular[0] < rcond:
        raise FrameDegeneracyError(
            f"constraint Jacobian is rank deficient (singular values {singular})",
            module="slag",
            index=index,
        )
    kernel = null_space(J, rcond=rcond)
    if kernel.shape[1] != n:
        raise FrameDegeneracyError(
            f"tangent space has dimension {kernel.shape[1]}, expected {n}", module="slag", index=index
        )
    return to_complex(kernel.T).T


def _frame_gram(frame: ComplexArray) -> FloatArray:
    k = frame.shape[1]
    return np.array([[ambient_inner(frame[:, i], frame[:, j]) for j in range(k)] for i in range(k)])


def certify_special_lagrangian(sample: SLagSample, phase: float = 0.0) -> Tuple[float, float]:
    """Residuals of omega|_L = 0 and Im(e^{i phase} Omega)|_L = 0 on the frame.

    Pairs are normalized by the product of the vector norms and Omega by the
    frame volume sqrt(det Gram), so both residuals are invariant under
    rescaling and relabeling the frame.

    Raises:
        FrameDegeneracyError: If the frame Gram determinant is at most 1e-8.
    """
    frame = np.asarray(sample.frame, dtype=complex)
    gram = _frame_gram(frame)
    det = float(np.linalg.det(gram))
    if not det > 1e-8:
        raise FrameDegeneracyError(f"frame Gram determinant {det:.3e}", module="slag", index=sample.index)
    norms = np.sqrt(np.diag(gram))
    k = frame.shape[1]
    res_omega = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            res_omega = max(res_omega, abs(omega(frame[:, i], frame[:, j])) / (norms[i] * norms[j]))
    volume = np.exp(1j * phase) * holomorphic_volume(frame)
    return float(res_omega), float(abs(volume.imag) / np.sqrt(det))


def lagrangian_angle(frame: ArrayLike) -> float:
    """Phase of Omega on a Lagrangian frame, in [-pi/2, pi/2).

    The frame orientation is not fixed, so the angle is taken modulo pi.
    """
    theta = np.angle(holomorphic_volume(frame))
    return float((theta + np.pi / 2) % np.pi - np.pi / 2)


def _certified(sample: SLagSample, phase: float) -> SLagSample:
    res_omega, res_im = certify_special_lagrangian(sample, phase)
    return replace(sample, residual_omega=res_omega, residual_imOmega=res_im)


def sample_level_set(
    n: int,
    c: ArrayLike,
    c_prime: float,
    count: int,
    rng: Optional[np.random.Generator] = None,
    part: AnglePart = "auto",
    phase: float = 0.0,
) -> List[SLagSample]:
    """Sample points of the level set {moment_map = c, angle_function = c'}.

    Seeds are complex Gaussians corrected by minimum-norm Newton steps. Each
    converged seed is spread along its torus orbit with random phases, and
    every sample is certified on the kernel frame of the constraints.

    Raises:
        EmptyLevelSetError: If no seed converges within `slag.max_attempts`.
        FrameDegeneracyError: If a converged point is a singular point of the set.
    """
    if n < 2:
        raise ValueError(f"complex dimension must be at least 2, got {n}")
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 1 and n > 2:
        c = np.full(n - 1, c.item())
    if c.shape != (n - 1,):
        raise ValueError(f"need {n - 1} moment values, got {c.shape}")
    rng = rng if rng is not None else make_rng("slag")
    tol = configs.getattrs("slag.tolerance")
    max_newton = configs.getattrs("slag.max_newton")
    max_attempts = configs.getattrs("slag.max_attempts")
    orbit_size = configs.getattrs("slag.orbit_size")
    scale = configs.getattrs("slag.seed_scale")
    min_norm = configs.getattrs("slag.min_norm")
    rcond = configs.getattrs("slag.min_singular")

    def _seed() -> ComplexArray:
        for _ in range(max_attempts):
            w0 = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
            w = _newton(w0, c, c_prime, part, tol, max_newton)
            if w is None or np.linalg.norm(w) < min_norm:
                continue
            singular = np.linalg.svd(constraint_gradients(w, part), compute_uv=False)
            if singular[-1] / singular[0] >= rcond:
                return w
        raise EmptyLevelSetError(
            f"no point with moment {c.tolist()} and angle {c_prime} after {max_attempts} seeds",
            module="slag",
        )

    samples: List[SLagSample] = []
    base = None
    for i in range(count):
        if i % orbit_size == 0:
            base = _seed()
            w = base
        else:
            w = torus_action(base, rng.uniform(0, 2 * np.pi, n - 1))
        frame = tangent_frame(w, part, index=i)
        samples.append(_certified(SLagSample(index=i, point=w, frame=frame), phase))
    logger.debug(f"sampled {len(samples)} points on the level set moment = {c.tolist()}, angle = {c_prime}")
    return samples


def max_residuals(samples: Sequence[SLagSample]) -> Tuple[float, float]:
    """Largest omega and Im Omega residuals over samples."""
    if not samples:
        return 0.0, 0.0
    return (
        max(s.residual_omega for s in samples),
        max(s.residual_imOmega for s in samples),
    )


def dump_samples(samples: Sequence[SLagSample], file: str, float_format: Optional[str] = None) -> None:
    """Write samples as CSV: real and imaginary parts of w, then both residuals."""
    if not samples:
        raise ValueError("no samples to write")
    n = samples[0].n
    header = [f"re_w{k + 1}" for k in range(n)] + [f"im_w{k + 1}" for k in range(n)]
    header += ["residual_omega", "residual_imOmega"]
    rows = [list(to_real(s.point)) + [s.residual_omega, s.residual_imOmega] for s in samples]
    dump_csv(header, rows, file, float_format or configs.getattrs("settings.output.float_format"))
