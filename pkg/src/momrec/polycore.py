"""Univariate polynomial algebra over floats, exact rationals, or mpmath reals.

Coefficients are stored in ascending order, ``coeffs[i]`` multiplies ``x**i``.
Operations keep whatever scalar type they are given, so a polynomial built from
``Fraction`` values stays exact through products, powers, division and
integration, which is what the test oracles rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import ZeroPolynomial

__all__ = [
    "Polynomial",
    "PiecewisePolynomial",
    "RealInterval",
    "evaluate",
    "real_roots_in",
    "antiderivative",
    "power",
    "squarefree_decomposition",
    "refine_root",
    "is_exact_value",
]


def is_exact_value(v) -> bool:
    return isinstance(v, Rational)


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Rational):
        return Fraction(int(v.numerator), int(v.denominator))
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, mpmath.mpf):
        m, e = mpmath.mpf(v).man_exp
        return Fraction(int(m)) * Fraction(2) ** int(e)
    return Fraction(float(v))


@dataclass(frozen=True)
class RealInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval has lo > hi: [{self.lo}, {self.hi}]")

    @property
    def length(self):
        return self.hi - self.lo

    def contains(self, x, slack=0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


class Polynomial:
    """Immutable dense polynomial. Trailing zeros are stripped on construction."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    # construction helpers ---------------------------------------------------
    @classmethod
    def exact(cls, coeffs: Iterable) -> "Polynomial":
        return cls(_to_fraction(v) for v in coeffs)

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls([value])

    @classmethod
    def monomial(cls, k: int, value=1) -> "Polynomial":
        return cls([0] * k + [value])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Polynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    # basic properties -------------------------------------------------------
    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def degree(self) -> int | None:
        """Index of the leading coefficient; ``None`` for the zero polynomial."""
        return len(self._c) - 1 if self._c else None

    @property
    def is_zero(self) -> bool:
        return not self._c

    @property
    def is_exact(self) -> bool:
        return all(is_exact_value(v) for v in self._c)

    @property
    def lead(self):
        if not self._c:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self._c[-1]

    def norm_inf(self) -> float:
        return max((abs(float(v)) for v in self._c), default=0.0)

    def to_exact(self) -> "Polynomial":
        return Polynomial.exact(self._c)

    def to_float(self) -> "Polynomial":
        return Polynomial(float(v) for v in self._c)

    def to_mpf(self) -> "Polynomial":
        return Polynomial(mpmath.mpf(v) if not isinstance(v, Fraction)
                          else mpmath.mpf(v.numerator) / v.denominator
                          for v in self._c)

    # evaluation -------------------------------------------------------------
    def __call__(self, x):
        acc = 0
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        a, b = self._c, other._c
        n = max(len(a), len(b))
        return Polynomial((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                          for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-v for v in self._c)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(v * other for v in self._c)
        a, b = self._c, other._c
        if not a or not b:
            return Polynomial()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Polynomial(out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, m: int):
        return power(self, m)

    def __divmod__(self, other: "Polynomial"):
        return _divmod(self, _coerce(other))

    def __floordiv__(self, other):
        return _divmod(self, _coerce(other))[0]

    def __mod__(self, other):
        return _divmod(self, _coerce(other))[1]

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._c == other._c
        if isinstance(other, (int, float, Fraction)):
            return self._c == Polynomial([other])._c
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"Polynomial({list(self._c)!r})"

    def __len__(self):
        return len(self._c)

    # calculus ---------------------------------------------------------------
    def derivative(self, order: int = 1) -> "Polynomial":
        c = list(self._c)
        for _ in range(order):
            c = [i * c[i] for i in range(1, len(c))]
        return Polynomial(c)

    def antiderivative(self) -> "Polynomial":
        return antiderivative(self)

    def integrate(self, lo, hi):
        q = antiderivative(self)
        return q(hi) - q(lo)

    def compose(self, inner: "Polynomial") -> "Polynomial":
        acc = Polynomial()
        for c in reversed(self._c):
            acc = acc * inner + Polynomial([c])
        return acc

    def monic(self) -> "Polynomial":
        lead = self.lead
        if is_exact_value(lead):
            lead = _to_fraction(lead)
        return Polynomial(v / lead for v in self._c)


def _coerce(v) -> Polynomial:
    return v if isinstance(v, Polynomial) else Polynomial([v])


def _divmod(a: Polynomial, b: Polynomial):
    if b.is_zero:
        raise ZeroPolynomial("division by the zero polynomial")
    if a.degree is None or a.degree < b.degree:
        return Polynomial(), a
    lead = b.lead
    if is_exact_value(lead):
        lead = _to_fraction(lead)
    rem = list(a.coeffs)
    quot = [0] * (a.degree - b.degree + 1)
    bc = b.coeffs
    for k in range(len(quot) - 1, -1, -1):
        q = rem[k + b.degree] / lead
        quot[k] = q
        if q == 0:
            continue
        for j, bj in enumerate(bc):
            rem[k + j] -= q * bj
    # the leading slots are zero by construction; drop float residue there
    rem = rem[: b.degree]
    return Polynomial(quot), Polynomial(rem)


def evaluate(p: Polynomial, x):
    """Horner evaluation of ``p`` at ``x``."""
    return p(x)


def antiderivative(p: Polynomial) -> Polynomial:
    """Antiderivative vanishing at 0."""
    out = [0]
    for i, c in enumerate(p.coeffs):
        out.append(c / (i + 1) if not is_exact_value(c) else Fraction(c) / (i + 1))
    return Polynomial(out)


def power(p: Polynomial, m: int) -> Polynomial:
    """``p**m`` by repeated squaring; ``p**0`` is the constant 1."""
    if m < 0:
        raise ValueError("negative polynomial power")
    result = Polynomial([1])
    base = p
    while m:
        if m & 1:
            result = result * base
        m >>= 1
        if m:
            base = base * base
    return result


def gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd by the Euclidean algorithm. Meant for exact coefficients."""
    while not b.is_zero:
        a, b = b, a % b
    return a.monic() if not a.is_zero else a


def squarefree_decomposition(p: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: ``p = lead * prod f_i**i`` with squarefree, coprime ``f_i``.

    Returns ``[(f_i, i), ...]`` skipping constant factors. Exact coefficients
    are required for the result to be meaningful.
    """
    if p.is_zero:
        raise ZeroPolynomial("squarefree decomposition of zero")
    p = p.to_exact()
    if p.degree == 0:
        return []
    dp = p.derivative()
    a = gcd(p, dp)
    b = p // a
    c = dp // a
    d = c - b.derivative()
    out = []
    i = 1
    while b.degree and b.degree > 0:
        a = gcd(b, d)
        if a.degree and a.degree > 0:
            out.append((a, i))
        b = b // a
        c = d // a
        d = c - b.derivative()
        i += 1
    return out


def _companion_eigenvalues(p: Polynomial) -> np.ndarray:
    c = np.array([float(v) for v in p.coeffs], dtype=float)
    n = len(c) - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    # scale to tame coefficient growth before forming the companion matrix
    c = c / c[-1]
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1]
    return np.linalg.eigvals(comp)


def _merge_close(values: Sequence[float], tol: float) -> list[float]:
    out: list[list[float]] = []
    for v in sorted(values):
        if out and v - out[-1][-1] <= tol:
            out[-1].append(v)
        else:
            out.append([v])
    return [sum(g) / len(g) for g in out]


def real_roots_in(p: Polynomial, iv: RealInterval, tol: float = 1e-10) -> list[float]:
    """Distinct real roots of ``p`` in ``iv`` via companion-matrix eigenvalues.

    Exact polynomials are reduced to their squarefree part first, so multiple
    roots come back accurate; for float input, root clusters closer than
    ``tol`` are merged to their mean.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.is_zero:
        raise ZeroPolynomial("real_roots_in called on the zero polynomial")
    if p.degree == 0:
        return []
    work = p
    if p.is_exact:
        factors = squarefree_decomposition(p)
        work = Polynomial([1])
        for f, _ in factors:
            work = work * f
    fw = work.to_float()
    scale = fw.norm_inf()
    dfw = fw.derivative()
    found = []
    for z in _companion_eigenvalues(fw):
        if abs(z.imag) > max(math.sqrt(tol), 1e-7) * (1.0 + abs(z)):
            continue
        x = float(z.real)
        # a couple of Newton steps tighten companion eigenvalues
        for _ in range(3):
            d = dfw(x)
            if d == 0:
                break
            step = fw(x) / d
            if not math.isfinite(step) or abs(step) > 1e-3 * (1.0 + abs(x)):
                break
            x -= step
        # roots far outside iv are dropped anyway; skipping them early avoids overflow
        if not math.isfinite(x) or not iv.contains(x, slack=max(1.0, float(iv.length))):
            continue
        if abs(fw(x)) <= max(tol, 1e-9) * (1.0 + scale) * (1.0 + abs(x)) ** max(fw.degree, 1):
            found.append(x)
    roots = _merge_close(found, tol)
    return [r for r in roots if iv.contains(r, slack=tol)]


def refine_root(p: Polynomial, x0, dps: int):
    """Newton-polish a simple root of ``p`` to ``dps`` digits; returns an mpf."""
    with mpmath.workdps(dps + 10):
        q = p.to_mpf()
        dq = q.derivative()
        x = mpmath.mpf(x0)
        for _ in range(200):
            d = dq(x)
            if d == 0:
                break
            step = q(x) / d
            x -= step
            if abs(step) <= mpmath.mpf(10) ** (-(dps + 5)) * (1 + abs(x)):
                break
    with mpmath.workdps(dps):
        return +x


class PiecewisePolynomial:
    """Function equal to ``pieces[n]`` on ``[breakpoints[n], breakpoints[n+1]]``
    and zero outside ``[breakpoints[0], breakpoints[-1]]``."""

    __slots__ = ("breakpoints", "pieces")

    def __init__(self, breakpoints: Sequence, pieces: Sequence):
        bps = tuple(breakpoints)
        pcs = tuple(p if isinstance(p, Polynomial) else Polynomial(p) for p in pieces)
        if len(bps) < 2:
            raise ValueError("need at least two breakpoints")
        if any(not (bps[i] < bps[i + 1]) for i in range(len(bps) - 1)):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pcs) != len(bps) - 1:
            raise ValueError("piece count must equal breakpoint count - 1")
        self.breakpoints = bps
        self.pieces = pcs

    @classmethod
    def exact(cls, breakpoints, pieces):
        return cls([_to_fraction(b) for b in breakpoints],
                   [Polynomial.exact(p.coeffs if isinstance(p, Polynomial) else p)
                    for p in pieces])

    @property
    def support(self) -> RealInterval:
        return RealInterval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def max_degree(self) -> int | None:
        degs = [p.degree for p in self.pieces if p.degree is not None]
        return max(degs) if degs else None

    @property
    def jumps(self) -> int:
        """Interior breakpoint count (K)."""
        return len(self.breakpoints) - 2

    def intervals(self):
        for n, piece in enumerate(self.pieces):
            yield self.breakpoints[n], self.breakpoints[n + 1], piece

    def __call__(self, x):
        bps = self.breakpoints
        if x < bps[0] or x > bps[-1]:
            return 0
        for n in range(len(self.pieces)):
            if x <= bps[n + 1]:
                return self.pieces[n](x)
        return self.pieces[-1](x)

    def to_float(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial([float(b) for b in self.breakpoints],
                                   [p.to_float() for p in self.pieces])

    def __repr__(self):
        return f"PiecewisePolynomial({list(self.breakpoints)!r}, {list(self.pieces)!r})"
