"""Moment-vanishing ("invisibility") analyzers.

A function or weighted domain is invisible for a family of test functions when
all its integrals against that family vanish.  The checks here cover Legendre
orthogonality, wave-type test functions Q(x) + R(y), power moments of P^k q
under a composition condition, flattened-boundary sublevel sets, and constant
terms of powers of Laurent polynomials.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize

from .errors import (
    DecompositionInconclusive,
    ResidualTooLarge,
    UnboundedSublevelSet,
    ValidationError,
)
from .moments1d import MomentTable1D
from .polycore import Polynomial, RealInterval, antiderivative, is_exact_value, real_roots_in


# --- Legendre ----------------------------------------------------------------

def legendre_polynomial(n: int, exact: bool = True) -> Polynomial:
    """L_n from (k+1) L_{k+1} = (2k+1) x L_k - k L_{k-1}."""
    if n < 0:
        raise ValidationError("n must be nonnegative")
    one = Fraction(1) if exact else 1.0
    prev, cur = Polynomial([one]), Polynomial([0 * one, one])
    if n == 0:
        return prev
    x = Polynomial([0 * one, one])
    for k in range(1, n):
        prev, cur = cur, (x * cur * ((2 * k + 1) * one) - prev * (k * one)) * (one / (k + 1))
    return cur


def legendre_moments(n: int, count: int, exact: bool = True) -> MomentTable1D:
    """m_j(L_n) = int_{-1}^{1} x^j L_n(x) dx for j < count.

    Float mode uses a Gauss-Legendre rule (exact at this degree) with L_n
    evaluated by its recurrence; summing monomial coefficients instead loses
    about four digits to cancellation by n = 10.
    """
    if count < 1:
        raise ValidationError("count must be positive")
    if n < 0:
        raise ValidationError("n must be nonnegative")
    if not exact:
        x, w = np.polynomial.legendre.leggauss((n + count) // 2 + 1)
        prev, cur = np.ones_like(x), x.copy()
        if n == 0:
            cur = prev
        for k in range(1, n):
            prev, cur = cur, ((2 * k + 1) * x * cur - k * prev) / (k + 1)
        return MomentTable1D([float(w @ (x ** j * cur)) for j in range(count)])
    L = legendre_polynomial(n, exact)
    vals = []
    for j in range(count):
        vals.append(sum((c * Fraction(2, i + j + 1) for i, c in enumerate(L.coeffs)
                         if (i + j) % 2 == 0), Fraction(0)))
    return MomentTable1D(vals)


# --- bivariate polynomials -------------------------------------------------

@dataclass(frozen=True)
class Poly2:
    """Bivariate polynomial as {(i, j): coefficient of x^i y^j}."""

    terms: Mapping[tuple[int, int], object]

    def __init__(self, terms):
        if not isinstance(terms, Mapping):
            # nested list c[i][j]
            terms = {(i, j): c for i, row in enumerate(terms) for j, c in enumerate(row)}
        clean = {}
        for (i, j), c in terms.items():
            if i < 0 or j < 0:
                raise ValidationError("exponents must be nonnegative")
            if c != 0:
                clean[(int(i), int(j))] = c
        object.__setattr__(self, "terms", clean)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def __call__(self, x, y):
        return sum((c * x ** i * y ** j for (i, j), c in self.terms.items()), 0 * x)

    def partial(self, axis: int) -> "Poly2":
        if axis == 1:
            return Poly2({(i - 1, j): i * c for (i, j), c in self.terms.items() if i})
        if axis == 2:
            return Poly2({(i, j - 1): j * c for (i, j), c in self.terms.items() if j})
        raise ValidationError("axis must be 1 (x) or 2 (y)")

    def restrict(self, axis: int, value) -> Polynomial:
        """Univariate polynomial in coordinate ``axis`` with the other fixed."""
        out = {}
        for (i, j), c in self.terms.items():
            k, other = (i, value ** j) if axis == 1 else (j, value ** i)
            out[k] = out.get(k, 0) + c * other
        return Polynomial([out.get(k, 0) for k in range(max(out, default=-1) + 1)])

    def top_form(self, theta: float) -> float:
        d = self.degree
        return sum(float(c) * math.cos(theta) ** i * math.sin(theta) ** j
                   for (i, j), c in self.terms.items() if i + j == d)


def _monomial_integral(k: int, lo, hi):
    if all(map(is_exact_value, (lo, hi))):
        lo, hi = Fraction(lo), Fraction(hi)
        return (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    return (float(hi) ** (k + 1) - float(lo) ** (k + 1)) / (k + 1)


# --- wave invisibility -----------------------------------------------------

def wave_invisibility(f: Poly2, rect, tol: float = 1e-12) -> dict:
    """Is f invisible for all Q(x) + R(y) on the rectangle?

    That happens exactly when both marginals F(x) = int f dy and H(y) = int f dx
    vanish identically.  A visible f gets a witness x^k (or y^k) where k is the
    lowest nonvanishing coefficient of the offending marginal.
    """
    if not isinstance(f, Poly2):
        f = Poly2(f)
    (x0, x1), (y0, y1) = rect
    if not (x0 < x1 and y0 < y1):
        raise ValidationError("rectangle must have x0 < x1 and y0 < y1")
    F, H = {}, {}
    for (i, j), c in f.terms.items():
        F[i] = F.get(i, 0) + c * _monomial_integral(j, y0, y1)
        H[j] = H.get(j, 0) + c * _monomial_integral(i, x0, x1)
    Fp = Polynomial([F.get(k, 0) for k in range(max(F, default=-1) + 1)])
    Hp = Polynomial([H.get(k, 0) for k in range(max(H, default=-1) + 1)])
    exact = Fp.is_exact and Hp.is_exact

    def negligible(p: Polynomial) -> bool:
        return p.is_zero or (not exact and p.norm_inf() <= tol)

    report = {"F": Fp, "H": Hp, "invisible": negligible(Fp) and negligible(Hp), "witness": None}
    if report["invisible"]:
        return report
    for var, p, lo, hi in (("x", Fp, x0, x1), ("y", Hp, y0, y1)):
        if negligible(p):
            continue
        k = next(i for i, c in enumerate(p.coeffs) if c != 0 and (exact or abs(c) > tol))
        val = sum(c * _monomial_integral(i + k, lo, hi) for i, c in enumerate(p.coeffs))
        report["witness"] = {"variable": var, "power": k, "moment": val}
        return report
    return report


def mixed_moment(f: Poly2, rect, var: str, k: int):
    """int int f * x^k (var="x") or f * y^k (var="y") over the rectangle."""
    (x0, x1), (y0, y1) = rect
    acc = 0
    for (i, j), c in f.terms.items():
        if var == "x":
            acc += c * _monomial_integral(i + k, x0, x1) * _monomial_integral(j, y0, y1)
        else:
            acc += c * _monomial_integral(i, x0, x1) * _monomial_integral(j + k, y0, y1)
    return acc


# --- composition condition -----------------------------------------------

def power_moment_scan(P: Polynomial, q: Polynomial, iv: RealInterval, k_max: int) -> list:
    """m_k = int_iv P(x)^k q(x) dx for k = 0..k_max."""
    if k_max < 1:
        raise ValidationError("k_max must be at least 1")
    out, Pk = [], Polynomial([1])
    for _ in range(k_max + 1):
        out.append((Pk * q).integrate(iv.lo, iv.hi))
        Pk = Pk * P
    return out


def decompose_in(P: Polynomial, W: Polynomial):
    """Write P = Ptilde(W) by repeated division by W.

    Returns (Ptilde, residual) where residual is the largest coefficient of the
    nonconstant parts of the remainders; zero means an exact decomposition.
    """
    if W.degree is None or W.degree < 1:
        raise ValidationError("W must be nonconstant")
    digits, rest, residual = [], P, 0
    while not rest.is_zero:
        rest, r = divmod(rest, W)
        digits.append(r.coeffs[0] if r.coeffs else 0)
        tail = r.coeffs[1:]
        if tail:
            residual = max(residual, max(abs(c) for c in tail))
    return Polynomial(digits), residual


def verify_cc(P: Polynomial, q: Polynomial, W: Polynomial, iv: RealInterval,
              tol: float = 1e-12, k_max: int = 20) -> dict:
    """Composition condition: W(a) = W(b), P = Ptilde(W), Q = Qtilde(W) with Q' = q.

    When it holds, every power moment int P^k q vanishes; that consequence is
    checked on k <= k_max and a violation raises.
    """
    if W.degree is None or W.degree < 1:
        raise ValidationError("W must be nonconstant")
    Q = antiderivative(q)
    gap = abs(W(iv.hi) - W(iv.lo))
    Pt, rp = decompose_in(P, W)
    Qt, rq = decompose_in(Q, W)
    exact = all(p.is_exact for p in (P, q, W)) and all(map(is_exact_value, (iv.lo, iv.hi)))

    def ok(r):
        if exact:
            return r == 0
        if r <= tol:
            return True
        if r <= 1e3 * tol:
            raise DecompositionInconclusive(
                f"division residual {float(r):.3g} in the gray zone ({tol:.3g}, {1e3 * tol:.3g}]",
                residual=float(r))
        return False

    endpoints = gap == 0 if exact else gap <= tol
    holds = bool(endpoints and ok(rp) and ok(rq))
    report = {"holds": holds, "endpoint_gap": gap, "P_residual": rp, "Q_residual": rq,
              "P_tilde": Pt, "Q_tilde": Qt, "moments": None}
    if holds:
        ms = power_moment_scan(P, q, iv, k_max)
        worst = max(abs(float(v)) for v in ms)
        if worst > 1e-12:
            raise ResidualTooLarge(
                f"composition condition holds but |m_k| reaches {worst:.3g}", residual=worst)
        report["moments"] = ms
    return report


# --- flattened-boundary sublevel sets ------------------------------------

RAY_SAMPLES = 720


def sublevel_radius(P: Poly2, level: float = 1.0) -> float:
    """Radius of a disk containing {P <= level}, from rays at sampled angles.

    Along each ray P - level is a univariate polynomial; its top coefficient
    must be positive (otherwise the set escapes to infinity along that ray)
    and its largest positive root bounds the set in that direction.
    """
    d = P.degree
    if d == 0 or d % 2:
        raise UnboundedSublevelSet(f"a degree-{d} polynomial has unbounded sublevel sets")
    thetas = np.linspace(0.0, 2 * np.pi, RAY_SAMPLES, endpoint=False)
    tops = np.array([P.top_form(t) for t in thetas])
    scale = max(abs(float(c)) for c in P.terms.values())
    if tops.min() <= 1e-9 * scale:
        t = thetas[int(np.argmin(tops))]
        raise UnboundedSublevelSet(
            f"top-degree form is not positive along direction {t:.4f} rad", theta=float(t))
    R = 0.0
    for t in thetas:
        c, s = math.cos(t), math.sin(t)
        ray = {}
        for (i, j), coef in P.terms.items():
            ray[i + j] = ray.get(i + j, 0.0) + float(coef) * c ** i * s ** j
        poly = Polynomial([ray.get(k, 0.0) - (level if k == 0 else 0.0) for k in range(d + 1)])
        roots = np.roots(poly.coeffs[::-1])
        pos = [z.real for z in roots if abs(z.imag) < 1e-9 * (1 + abs(z)) and z.real > 0]
        R = max(R, max(pos, default=0.0))
    if R == 0.0:
        raise UnboundedSublevelSet("sublevel set is empty")
    return 1.05 * R + 1e-9


def verify_mcc_example(P: Poly2, j: int, Q: Polynomial, level: int = 256,
                       quad_tol: float = 1e-12) -> dict:
    """|int_{P <= 1} Q(P) dP/dx_j dx dy| by quadrature.

    Lines parallel to axis j are cut exactly at the roots of P - 1, the
    sublevel pieces integrated with Gauss-Legendre rules that are exact for
    the polynomial integrand, and the transverse direction uses ``level``
    Gauss-Legendre nodes over the bounding box.
    """
    if not isinstance(P, Poly2):
        P = Poly2(P)
    if j not in (1, 2):
        raise ValidationError("axis j must be 1 or 2")
    R = sublevel_radius(P)
    dP = P.partial(j)
    inner_deg = ((Q.degree or 0) + 1) * P.degree
    inner_x, inner_w = np.polynomial.legendre.leggauss(inner_deg // 2 + 2)
    outer_x, outer_w = np.polynomial.legendre.leggauss(level)
    other = 2 if j == 1 else 1
    total, peak = 0.0, 0.0
    for t, wt in zip(R * outer_x, R * outer_w):
        line = P.restrict(j, t).to_float()
        dline = dP.restrict(j, t).to_float()
        cuts = real_roots_in(line - 1.0, RealInterval(-R, R), tol=1e-12) if line.degree else []
        pts = [-R] + cuts + [R]
        acc = 0.0
        for a, b in zip(pts, pts[1:]):
            if b - a <= 0 or line((a + b) / 2) > 1.0:
                continue
            u = (a + b) / 2 + (b - a) / 2 * inner_x
            vals = np.array([Q(line(v)) * dline(v) for v in u])
            peak = max(peak, float(np.max(np.abs(vals))))
            acc += (b - a) / 2 * float(inner_w @ vals)
        total += wt * acc
    area = (2 * R) ** 2
    bound = 1e-8 * area * max(peak, 1.0)
    return {"residual": abs(total), "integral": total, "bound": bound,
            "passed": bool(abs(total) <= bound), "box": [[-R, R], [-R, R]], "level": level,
            "axis": j, "transverse_axis": other}


# --- Laurent polynomials -------------------------------------------------

@dataclass(frozen=True)
class LaurentPolynomial:
    """Sum of c * z^e over integer exponent tuples e (all of one dimension)."""

    terms: Mapping[tuple, object]

    def __init__(self, terms: Mapping):
        clean = {}
        dims = set()
        for e, c in terms.items():
            e = (int(e),) if isinstance(e, (int, np.integer)) else tuple(int(v) for v in e)
            dims.add(len(e))
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        if len(dims) > 1:
            raise ValidationError("exponent tuples must share one dimension")
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c != 0})

    @property
    def dimension(self) -> int:
        return len(next(iter(self.terms))) if self.terms else 0

    @property
    def support(self) -> tuple:
        return tuple(sorted(self.terms))

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPolynomial(out)

    def constant_term(self):
        return self.terms.get((0,) * self.dimension, 0)


HULL_ENUMERATION_LIMIT = 12


def origin_in_hull(points: Sequence[Sequence[int]]) -> bool:
    """Exact test of 0 in conv(points) for integer points."""
    pts = tuple(sorted(tuple(int(v) for v in p) for p in points))
    return _origin_in_hull(pts)


@lru_cache(maxsize=None)
def _origin_in_hull(pts: tuple) -> bool:
    if not pts:
        return False
    n = len(pts[0])
    if any(all(v == 0 for v in p) for p in pts):
        return True
    if len(pts) > HULL_ENUMERATION_LIMIT:
        return _origin_in_hull_lp(pts)
    # Caratheodory: a witness simplex has at most n + 1 vertices
    for r in range(2, min(n + 1, len(pts)) + 1):
        for sub in itertools.combinations(pts, r):
            lam = _barycentric_zero(sub)
            if lam is not None and all(v >= 0 for v in lam):
                return True
    return False


def _barycentric_zero(sub):
    """Weights lambda with sum lambda_i p_i = 0, sum lambda_i = 1, if unique."""
    r, n = len(sub), len(sub[0])
    rows = [[Fraction(p[k]) for p in sub] + [Fraction(0)] for k in range(n)]
    rows.append([Fraction(1)] * r + [Fraction(1)])
    # Gaussian elimination on the (n + 1) x (r + 1) augmented system
    piv_row = 0
    pivots = []
    for c in range(r):
        p = next((i for i in range(piv_row, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            return None
        rows[piv_row], rows[p] = rows[p], rows[piv_row]
        inv = 1 / rows[piv_row][c]
        rows[piv_row] = [v * inv for v in rows[piv_row]]
        for i in range(len(rows)):
            if i != piv_row and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[piv_row])]
        pivots.append(c)
        piv_row += 1
    if any(row[r] != 0 for row in rows[piv_row:]):
        return None
    return [rows[i][r] for i in range(r)]


def _origin_in_hull_lp(pts) -> bool:
    A = np.array(pts, dtype=float).T
    A_eq = np.vstack([A, np.ones(len(pts))])
    b_eq = np.concatenate([np.zeros(A.shape[0]), [1.0]])
    res = optimize.linprog(np.zeros(len(pts)), A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                           method="highs")
    return res.status == 0


def constant_terms(f: LaurentPolynomial, k_max: int) -> list:
    """Constant terms of f^k for k = 1..k_max."""
    if not f.terms:
        raise ValidationError("f must be nonzero")
    coeffs = list(f.terms.values())
    bound = sum(abs(c) for c in coeffs) ** k_max if all(isinstance(c, int) for c in coeffs) else None
    if bound is not None and bound < 2 ** 62:
        return _constant_terms_dense(f, k_max)
    out, acc = [], LaurentPolynomial({(0,) * f.dimension: 1})
    for _ in range(k_max):
        acc = acc * f
        out.append(acc.constant_term())
    return out


def _constant_terms_dense(f: LaurentPolynomial, k_max: int) -> list[int]:
    # Kronecker substitution: shifted exponents of f^k stay below k_max * span + 1
    # per axis, so a mixed-radix encoding turns the products into 1D convolutions
    exps = np.array(f.support)
    lo = exps.min(axis=0)
    if np.any(lo > 0) or np.any(exps.max(axis=0) < 0):
        return [0] * k_max
    radix = k_max * (exps.max(axis=0) - lo) + 1
    place = np.concatenate([[1], np.cumprod(radix[:-1])])
    base = np.zeros(int((exps.max(axis=0) - lo) @ place) + 1, dtype=np.int64)
    for e, c in f.terms.items():
        base[int((np.array(e) - lo) @ place)] = c
    origin = int(-lo @ place)
    acc, out = base, []
    for k in range(1, k_max + 1):
        if k > 1:
            acc = np.convolve(acc, base)
        out.append(int(acc[origin * k]))
    return out


def laurent_invisibility(f: LaurentPolynomial, k_max: int = 8) -> dict:
    """Hull criterion for vanishing constant terms of every power of f,
    cross-checked by direct expansion up to k_max."""
    if not isinstance(f, LaurentPolynomial):
        f = LaurentPolynomial(f)
    if not f.terms:
        raise ValidationError("f must be nonzero")
    if k_max < 1:
        raise ValidationError("k_max must be positive")
    predicted = not origin_in_hull(f.support)
    seq = constant_terms(f, k_max)
    all_zero = all(v == 0 for v in seq)
    return {"predicted_invisible": predicted, "constant_terms": seq,
            "agrees": predicted == all_zero}
