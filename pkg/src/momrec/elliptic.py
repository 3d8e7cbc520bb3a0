"""Recover y**2 = a x**3 + b x**2 + c x + d from seven moments of its oval."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotElliptic, SingularSystem
from .moments2d import EllipticMoments, cubic_oval
from .polycore import Polynomial


@dataclass(frozen=True)
class EllipticCurveDomain:
    a: float
    b: float
    c: float
    d: float
    x1: float
    x2: float
    determinant: float = float("nan")
    condition: float = float("nan")

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def f(self) -> Polynomial:
        return Polynomial([self.d, self.c, self.b, self.a])


def system_matrix(e: EllipticMoments) -> np.ndarray:
    """Rows of the linear system in (a, b, c) from the two integration-by-parts
    identities (alpha = 1, 0) and the vanishing of int f' sqrt(f)."""
    M = e.M
    return np.array([
        [3 * M(4, 0), 2 * M(3, 0), M(2, 0)],
        [3 * M(3, 0), 2 * M(2, 0), M(1, 0)],
        [3 * M(2, 0), 2 * M(1, 0), M(0, 0)],
    ])


def gram_matrix(e: EllipticMoments) -> np.ndarray:
    """Gram matrix of {x^2, x, 1} under <F, H> = int F H sqrt(f) dx."""
    M = e.M
    return np.array([
        [M(4, 0), M(3, 0), M(2, 0)],
        [M(3, 0), M(2, 0), M(1, 0)],
        [M(2, 0), M(1, 0), M(0, 0)],
    ])


def _solve_full_pivot(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    A = A.astype(float).copy()
    b = b.astype(float).copy()
    n = len(b)
    perm = list(range(n))
    for k in range(n):
        sub = np.abs(A[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        A[[k, i]] = A[[i, k]]
        b[[k, i]] = b[[i, k]]
        A[:, [k, j]] = A[:, [j, k]]
        perm[k], perm[j] = perm[j], perm[k]
        for r in range(k + 1, n):
            f = A[r, k] / A[k, k]
            A[r, k:] -= f * A[k, k:]
            b[r] -= f * b[k]
    y = np.zeros(n)
    for k in range(n - 1, -1, -1):
        y[k] = (b[k] - A[k, k + 1:] @ y[k + 1:]) / A[k, k]
    x = np.zeros(n)
    for k, p in enumerate(perm):
        x[p] = y[k]
    return x


def reconstruct_elliptic(e: EllipticMoments, tol: float = 1e-12) -> EllipticCurveDomain:
    """Solve for (a, b, c), then d from the alpha = 0 recurrence row.

    The system determinant is six times a Gram determinant, hence positive for
    consistent data; a determinant at or below ``tol`` times the matrix scale
    means the moments cannot come from an oval.
    """
    A = system_matrix(e)
    M = e.M
    rhs = np.array([-4.0 / 3.0 * M(1, 2), -2.0 / 3.0 * M(0, 2), 0.0])
    det = float(np.linalg.det(A))
    scale = float(np.max(np.abs(A))) ** 3
    if not det > tol * scale:
        raise SingularSystem(f"system determinant {det:.3g} is not positive", determinant=det)
    a, b, c = _solve_full_pivot(A, rhs)
    d = (M(0, 2) - a * M(3, 0) - b * M(2, 0) - c * M(1, 0)) / M(0, 0)
    try:
        x1, x2, _ = cubic_oval(a, b, c, d)
    except NotElliptic as exc:
        raise NotElliptic(f"recovered curve has no oval: {exc}") from exc
    return EllipticCurveDomain(float(a), float(b), float(c), float(d), x1, x2,
                               determinant=det, condition=float(np.linalg.cond(A)))
