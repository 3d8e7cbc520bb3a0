"""Forward power moments of piecewise polynomials."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InsufficientMoments
from .polycore import PiecewisePolynomial, is_exact_value


@dataclass(frozen=True)
class MomentTable1D:
    """Moments ``m_0 .. m_{n-1}``; index is implicit."""

    values: tuple

    def __init__(self, values: Sequence):
        object.__setattr__(self, "values", tuple(values))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def is_exact(self) -> bool:
        return all(is_exact_value(v) for v in self.values)

    def to_float(self) -> "MomentTable1D":
        return MomentTable1D(float(v) for v in self.values)


def moments_pp(g: PiecewisePolynomial, count: int) -> MomentTable1D:
    """m_alpha = sum_n int over [xi_n, xi_{n+1}] of x**alpha * piece_n, alpha < count.

    Integration is done through antiderivatives, so exact inputs give exact
    moments.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    out = [0] * count
    for lo, hi, piece in g.intervals():
        if piece.is_zero:
            continue
        ints = monomial_integrals(lo, hi, count + len(piece.coeffs))
        for alpha in range(count):
            out[alpha] += sum(c * ints[alpha + i] for i, c in enumerate(piece.coeffs))
    return MomentTable1D(out)


def monomial_integrals(lo, hi, n: int) -> list:
    """``[int_lo^hi x**k dx for k < n]``, exact when the endpoints are exact."""
    exact = is_exact_value(lo) and is_exact_value(hi)
    out = []
    plo, phi = lo, hi
    for k in range(n):
        diff = phi - plo
        out.append(Fraction(diff) / (k + 1) if exact else diff / (k + 1))
        plo *= lo
        phi *= hi
    return out


def derivative_moments(m: MomentTable1D | Sequence, order: int) -> list:
    """Moments of the ``order``-th distributional derivative of g.

    Integration by parts gives d_alpha = (-1)**order * alpha(alpha-1)...(alpha-order+1)
    * m_{alpha-order}.  Returns ``[d_order, d_{order+1}, ..., d_{len(m)-1+order}]``;
    d_alpha for alpha < order is zero and is not included.
    """
    values = m.values if isinstance(m, MomentTable1D) else tuple(m)
    if not values:
        raise InsufficientMoments("derivative_moments needs at least one moment")
    if order < 1:
        raise ValueError("order must be positive")
    sign = -1 if order % 2 else 1
    out = []
    for k, mk in enumerate(values):
        alpha = k + order
        ff = 1
        for i in range(order):
            ff *= alpha - i
        out.append(sign * ff * mk)
    return out


def full_derivative_sequence(m: MomentTable1D | Sequence, order: int) -> list:
    """``d_0 .. d_{len(m)-1+order}`` including the leading zeros."""
    d = derivative_moments(m, order)
    zero = Fraction(0) if all(is_exact_value(v) for v in d) else 0.0
    return [zero] * order + d
