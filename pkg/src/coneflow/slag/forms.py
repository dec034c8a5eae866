"""The flat Calabi-Yau structure of C^n and toric diagram data.

Vectors of C^n are stored as complex arrays. Real tangent vectors use the
identification C^n = R^2n with the real parts first, then the imaginary parts.
"""

import math
from fractions import Fraction

import numpy as np

from ..core.errors import DomainError
from ..core.types import *


def to_complex(v: ArrayLike) -> ComplexArray:
    """Map R^2n vectors (real parts, then imaginary parts) to C^n."""
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return v.astype(complex)
    n = v.shape[-1] // 2
    return v[..., :n] + 1j * v[..., n:]


def to_real(w: ArrayLike) -> FloatArray:
    """Map C^n vectors to R^2n."""
    w = np.asarray(w, dtype=complex)
    return np.concatenate([w.real, w.imag], axis=-1)


def hermitian(u: ArrayLike, v: ArrayLike) -> complex:
    """The Hermitian product sum conj(u_k) v_k."""
    return complex(np.vdot(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)))


def ambient_inner(u: ArrayLike, v: ArrayLike) -> float:
    """The flat metric g = Re <u, v>."""
    return hermitian(u, v).real


def omega(u: ArrayLike, v: ArrayLike) -> float:
    """The Kahler form (i/2) sum dw^k ^ dw^k-bar, equal to Im <u, v>."""
    return hermitian(u, v).imag


def holomorphic_volume(frame: ArrayLike) -> complex:
    """Omega = dw^1 ^ ... ^ dw^n evaluated on n vectors (the columns of frame)."""
    frame = np.asarray(frame, dtype=complex)
    if frame.shape[0] != frame.shape[1]:
        raise ValueError(f"Omega needs n vectors in C^n, got shape {frame.shape}")
    return complex(np.linalg.det(frame))


def pfaffian(A: FloatArray) -> float:
    """Pfaffian of a real skew-symmetric matrix by pivoted elimination."""
    A = np.array(A, dtype=float)
    size = A.shape[0]
    if size % 2:
        return 0.0
    pf = 1.0
    for k in range(0, size - 1, 2):
        kp = k + 1 + int(np.abs(A[k + 1 :, k]).argmax())
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < size:
            tau = A[k, k + 2 :] / A[k, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, A[k + 2 :, k + 1])
            A[k + 2 :, k + 2 :] -= np.outer(A[k + 2 :, k + 1], tau)
    return float(pf)


class CalabiYauFrame:
    """The flat cone C^n \\ {0} = C(S^{2n-1}).

    Omega = dw^1 ^ ... ^ dw^n, which in logarithmic coordinates w^k = e^{v^k}
    with z^1 = v^1 + ... + v^n reads e^{z^1} dz^1 ^ ... ^ dz^n.
    """

    def __init__(self, n: int) -> None:
        """Initialize the frame of complex dimension n >= 1."""
        if n < 1:
            raise ValueError(f"complex dimension must be positive, got {n}")
        self.n = n

    def omega(self, u: ArrayLike, v: ArrayLike) -> float:
        """The Kahler form on two vectors."""
        return omega(to_complex(u), to_complex(v))

    def holomorphic_volume(self, frame: ArrayLike) -> complex:
        """Omega on n vectors, given as the columns of frame."""
        frame = np.asarray(frame)
        if not np.iscomplexobj(frame):
            frame = to_complex(frame.T).T
        return holomorphic_volume(frame)

    def standard_basis(self) -> ComplexArray:
        """The real basis (e_1, i e_1, ..., e_n, i e_n) as columns."""
        eye = np.eye(self.n, dtype=complex)
        return np.stack([v for k in range(self.n) for v in (eye[:, k], 1j * eye[:, k])], axis=1)

    def normalization_residual(self, vectors: Optional[ArrayLike] = None) -> float:
        """Difference of both sides of w^n/n! = (-1)^(n(n-1)/2) (i/2)^n Omega ^ Omega-bar.

        Both 2n-forms are evaluated on 2n real vectors, the standard basis by
        default. The left side is the Pfaffian of the omega matrix, the right
        side the determinant of the dw^k, dw-bar^k values.
        """
        n = self.n
        V = self.standard_basis() if vectors is None else np.asarray(vectors, dtype=complex)
        if V.shape != (n, 2 * n):
            raise ValueError(f"need 2n = {2 * n} vectors in C^{n}, got shape {V.shape}")
        gram = np.array([[omega(V[:, a], V[:, b]) for b in range(2 * n)] for a in range(2 * n)])
        lhs = pfaffian(gram)
        values = np.concatenate([V, V.conj()], axis=0)
        rhs = (-1) ** (n * (n - 1) // 2) * (0.5j) ** n * np.linalg.det(values)
        return float(abs(lhs - rhs))


class ToricDiagram(BaseModel):
    """A toric diagram (lambda_i, gamma) of some height.

    Only the data and its conditions are modelled; no quotient is built.
    """

    lambdas: List[List[int]]
    """Primitive integral normals lambda_i of the moment cone."""
    gamma: List[float]
    """Rational vector with <gamma, lambda_i> = -1 for every i."""

    @model_validator(mode="after")
    def _check_diagram(self) -> "ToricDiagram":
        n = len(self.gamma)
        if len(self.lambdas) < n:
            raise ValueError(f"need at least {n} normals, got {len(self.lambdas)}")
        for i, lam in enumerate(self.lambdas):
            if len(lam) != n:
                raise ValueError(f"lambda_{i + 1} has length {len(lam)}, expected {n}")
            if math.gcd(*lam) != 1:
                raise ValueError(f"lambda_{i + 1} = {lam} is not primitive")
            pairing = float(np.dot(self.gamma, lam))
            if abs(pairing + 1) > 1e-12:
                raise ValueError(f"<gamma, lambda_{i + 1}> = {pairing}, expected -1")
        return self

    @property
    def dim(self) -> int:
        """Complex dimension n of the cone."""
        return len(self.gamma)

    @property
    def height(self) -> int:
        """The smallest positive l such that l gamma is integral and primitive."""
        fractions = [Fraction(g).limit_denominator(10**6) for g in self.gamma]
        ell = math.lcm(*(f.denominator for f in fractions))
        scaled = [int(f * ell) for f in fractions]
        if math.gcd(*scaled) != 1:
            raise DomainError(f"no multiple of gamma = {self.gamma} is primitive", module="slag")
        return ell

    @classmethod
    def flat(cls, n: int) -> "ToricDiagram":
        """The diagram of C^n: lambda_i = e_i and gamma = -(1, ..., 1)."""
        eye = np.eye(n, dtype=int)
        return cls(lambdas=eye.tolist(), gamma=[-1.0] * n)
