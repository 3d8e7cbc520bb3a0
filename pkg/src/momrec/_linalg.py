"""Small linear-algebra kernels shared by the Prony and reconstruction code.

Exact kernels run on gmpy2 rationals (much faster than ``Fraction``) and hand
back ``Fraction`` values.  The high-precision least-squares path goes through
mpmath.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import gmpy2
import mpmath
import numpy as np


def _q(v):
    if isinstance(v, Fraction):
        return gmpy2.mpq(v.numerator, v.denominator)
    return gmpy2.mpq(v)


def _frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def berlekamp_massey(seq: Sequence) -> list[Fraction]:
    """Minimal monic annihilating polynomial of an exact sequence.

    Returns ascending coefficients of ``p`` with ``sum_k p[k] * s[i + k] = 0``
    for every valid ``i``.  Uniquely determined when ``len(seq) >= 2 * deg p``.
    """
    s = [_q(v) for v in seq]
    C = [gmpy2.mpq(1)]
    B = [gmpy2.mpq(1)]
    L, m, b = 0, 1, gmpy2.mpq(1)
    for n in range(len(s)):
        d = s[n]
        for i in range(1, L + 1):
            if i < len(C) and C[i]:
                d += C[i] * s[n - i]
        if d == 0:
            m += 1
            continue
        coef = d / b
        T = list(C)
        need = len(B) + m
        if len(C) < need:
            C.extend([gmpy2.mpq(0)] * (need - len(C)))
        for i, bi in enumerate(B):
            C[i + m] -= coef * bi
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    C = (C + [gmpy2.mpq(0)] * (L + 1))[: L + 1]
    return [_frac(v) for v in reversed(C)]


def exact_rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    M = [[_q(v) for v in r] for r in rows]
    if not M:
        return [], []
    nr, nc = len(M), len(M[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(nr):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                Mr = M[r]
                M[i] = [a - f * bb for a, bb in zip(M[i], Mr)]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return [[_frac(v) for v in row] for row in M], pivots


def exact_rank(rows) -> int:
    return len(exact_rref(rows)[1])


def exact_solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Unique solution of a consistent exact system, or None."""
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    R, piv = exact_rref(aug)
    n = len(A[0])
    if n in piv or len(piv) < n:
        return None
    return [R[i][n] for i in range(n)]


def float_rank(M: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    """Numerical rank with relative threshold ``tol`` plus the singular values."""
    sv = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0, sv
    return int(np.sum(sv > tol * sv[0])), sv


def mp_lstsq(A: Sequence[Sequence], b: Sequence, dps: int):
    """Least squares at ``dps`` digits. Returns (solution list, max abs residual).

    Uses normal equations carried at twice the working precision, which
    absorbs the squared conditioning and is far faster than mpmath's QR.
    """
    with mpmath.workdps(2 * dps + 10):
        rows = [[mpmath.mpf(_mpf_in(v)) for v in row] for row in A]
        rhs = [mpmath.mpf(_mpf_in(v)) for v in b]
        cols = list(zip(*rows))
        G = mpmath.matrix([[mpmath.fdot(ci, cj) for cj in cols] for ci in cols])
        r = mpmath.matrix([mpmath.fdot(ci, rhs) for ci in cols])
        x = mpmath.lu_solve(G, r)
        sol = [x[i] for i in range(len(cols))]
        res = max(abs(mpmath.fdot(row, sol) - bi) for row, bi in zip(rows, rhs))
    with mpmath.workdps(dps):
        return [+v for v in sol], +res


def _mpf_in(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return v
