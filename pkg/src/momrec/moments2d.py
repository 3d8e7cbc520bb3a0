"""Double moments of planar domains bounded by polynomial graphs, and the
seven quadrature moments of an elliptic-curve oval."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    IndexOutOfRange,
    InvalidDomain,
    InvalidMoments,
    MissingMoment,
    NotElliptic,
    QuadratureFailure,
    ValidationError,
)
from .moments1d import MomentTable1D, moments_pp
from .polycore import PiecewisePolynomial, Polynomial, RealInterval, is_exact_value, power, real_roots_in

ORDER_SAMPLES = 33


@dataclass(frozen=True)
class Strip:
    lower: Polynomial
    upper: Polynomial


@dataclass(frozen=True)
class DomainInterval:
    x_min: object
    x_max: object
    strips: tuple

    def __init__(self, x_min, x_max, strips: Iterable):
        object.__setattr__(self, "x_min", x_min)
        object.__setattr__(self, "x_max", x_max)
        object.__setattr__(self, "strips", tuple(
            s if isinstance(s, Strip) else Strip(_poly(s[0]), _poly(s[1])) for s in strips))
        if not self.strips:
            raise InvalidDomain("an interval needs at least one strip")
        if not x_min < x_max:
            raise InvalidDomain(f"empty interval [{x_min}, {x_max}]")

    @property
    def interval(self) -> RealInterval:
        return RealInterval(self.x_min, self.x_max)


def _poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


@dataclass(frozen=True)
class DomainSpec:
    """Union over intervals of strips lower_l(x) <= y <= upper_l(x)."""

    intervals: tuple

    def __init__(self, intervals: Iterable):
        object.__setattr__(self, "intervals", tuple(intervals))
        if not self.intervals:
            raise InvalidDomain("domain has no intervals")

    def validate(self) -> "DomainSpec":
        for a, b in zip(self.intervals, self.intervals[1:]):
            if abs(float(a.x_max) - float(b.x_min)) > 1e-12 * (1 + abs(float(a.x_max))):
                raise InvalidDomain(f"intervals not contiguous at {a.x_max} / {b.x_min}")
        for iv in self.intervals:
            lo, hi = float(iv.x_min), float(iv.x_max)
            k = np.arange(ORDER_SAMPLES)
            xs = (lo + hi) / 2 + (hi - lo) / 2 * np.cos((2 * k + 1) * np.pi / (2 * ORDER_SAMPLES))
            for x in xs:
                vals = []
                for s in iv.strips:
                    vals += [float(s.lower(x)), float(s.upper(x))]
                if any(not (u < v) for u, v in zip(vals, vals[1:])):
                    raise InvalidDomain(f"strips not strictly ordered at x={x:.6g}", x=x)
        return self

    @property
    def support(self) -> RealInterval:
        return RealInterval(self.intervals[0].x_min, self.intervals[-1].x_max)

    @property
    def is_exact(self) -> bool:
        return all(is_exact_value(iv.x_min) and is_exact_value(iv.x_max)
                   and all(s.lower.is_exact and s.upper.is_exact for s in iv.strips)
                   for iv in self.intervals)

    def to_exact(self) -> "DomainSpec":
        return DomainSpec(
            DomainInterval(Fraction(iv.x_min), Fraction(iv.x_max),
                           [Strip(s.lower.to_exact(), s.upper.to_exact()) for s in iv.strips])
            for iv in self.intervals)

    def to_float(self) -> "DomainSpec":
        return DomainSpec(
            DomainInterval(float(iv.x_min), float(iv.x_max),
                           [Strip(s.lower.to_float(), s.upper.to_float()) for s in iv.strips])
            for iv in self.intervals)

    def max_boundary_degree(self) -> int:
        return max(max(s.lower.degree or 0, s.upper.degree or 0)
                   for iv in self.intervals for s in iv.strips)


@dataclass(frozen=True)
class MomentTable2D:
    """``rows[beta][alpha] = m_{alpha,beta}``."""

    rows: tuple

    def __init__(self, rows: Sequence[Sequence]):
        rows = tuple(tuple(r) for r in rows)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValidationError("moment table must be a full rectangle")
        object.__setattr__(self, "rows", rows)

    @property
    def alpha_max(self) -> int:
        return len(self.rows[0]) - 1 if self.rows else -1

    @property
    def beta_max(self) -> int:
        return len(self.rows) - 1

    def __call__(self, alpha: int, beta: int):
        if not (0 <= beta <= self.beta_max and 0 <= alpha <= self.alpha_max):
            raise IndexOutOfRange(f"m[{alpha},{beta}] outside table")
        return self.rows[beta][alpha]

    @property
    def is_exact(self) -> bool:
        return all(is_exact_value(v) for r in self.rows for v in r)

    def to_float(self) -> "MomentTable2D":
        return MomentTable2D([[float(v) for v in r] for r in self.rows])

    def truncated(self, alpha_max: int, beta_max: int) -> "MomentTable2D":
        return MomentTable2D([r[:alpha_max + 1] for r in self.rows[:beta_max + 1]])


def psi_function(G: DomainSpec, beta: int) -> PiecewisePolynomial:
    """Psi_beta(x) = int y**beta chi_G(x, y) dy as a piecewise polynomial.

    On each interval it equals (1/(beta+1)) * sum_l (upper_l**(beta+1) - lower_l**(beta+1)).
    """
    scale = Fraction(1, beta + 1) if G.is_exact else 1.0 / (beta + 1)
    bps = [G.intervals[0].x_min] + [iv.x_max for iv in G.intervals]
    pieces = []
    for iv in G.intervals:
        acc = Polynomial()
        for s in iv.strips:
            acc = acc + power(s.upper, beta + 1) - power(s.lower, beta + 1)
        pieces.append(acc * scale)
    return PiecewisePolynomial(bps, pieces)


def moments2d(G: DomainSpec, alpha_max: int, beta_max: int, *, validate: bool = True
              ) -> MomentTable2D:
    """m_{alpha,beta} for 0 <= alpha <= alpha_max, 0 <= beta <= beta_max."""
    if alpha_max < 0 or beta_max < 0:
        raise ValidationError("alpha_max and beta_max must be nonnegative")
    if validate:
        G.validate()
    return MomentTable2D([moments_pp(psi_function(G, b), alpha_max + 1).values
                          for b in range(beta_max + 1)])


def triangle_domain(vertices) -> DomainSpec:
    """DomainSpec of a triangle with pairwise distinct vertex abscissae."""
    (xa, ya), (xb, yb), (xc, yc) = sorted(vertices, key=lambda v: v[0])
    if not (xa < xb < xc):
        raise InvalidDomain("triangle needs three distinct x coordinates (no vertical edge)")

    def line(p, q):
        (x0, y0), (x1, y1) = p, q
        slope = (y1 - y0) / (x1 - x0) if not all(map(is_exact_value, (x0, y0, x1, y1))) \
            else Fraction(y1 - y0) / (x1 - x0)
        return Polynomial([y0 - slope * x0, slope])

    long_edge = line((xa, ya), (xc, yc))
    left, right = line((xa, ya), (xb, yb)), line((xb, yb), (xc, yc))
    above = yb > long_edge(xb)
    ivs = []
    for lo, hi, edge in ((xa, xb, left), (xb, xc, right)):
        strip = Strip(long_edge, edge) if above else Strip(edge, long_edge)
        ivs.append(DomainInterval(lo, hi, [strip]))
    return DomainSpec(ivs)


def psi_moments(m: MomentTable2D, beta: int) -> MomentTable1D:
    if not 0 <= beta <= m.beta_max:
        raise IndexOutOfRange(f"beta={beta} outside 0..{m.beta_max}")
    return MomentTable1D(m.rows[beta])


# --- elliptic ovals ---------------------------------------------------------

ELLIPTIC_KEYS = ("m00", "m10", "m20", "m30", "m40", "m02", "m12")


@dataclass(frozen=True)
class EllipticMoments:
    m00: float
    m10: float
    m20: float
    m30: float
    m40: float
    m02: float
    m12: float

    def __post_init__(self):
        if not self.m00 > 0:
            raise InvalidMoments("m00 must be positive for a nonempty domain", m00=self.m00)

    def raw(self, alpha: int, two_beta: int) -> float:
        key = f"m{alpha}{two_beta}"
        if key not in ELLIPTIC_KEYS:
            raise MissingMoment(f"{key} is not one of the seven stored moments")
        return getattr(self, key)

    def M(self, alpha: int, two_beta: int) -> float:
        """Normalized moment M_{alpha,2beta} = ((2beta+1)/2) m_{alpha,2beta}."""
        return (two_beta + 1) / 2 * self.raw(alpha, two_beta)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ELLIPTIC_KEYS}


def cubic_oval(a, b, c, d) -> tuple[float, float, float]:
    """(x1, x2, x3): the bounded interval where f > 0 and the remaining root."""
    if a == 0:
        raise NotElliptic("leading coefficient a must be nonzero (cubic required)")
    f = Polynomial([d, c, b, a])
    bound = 1 + max(abs(v / a) for v in (b, c, d))
    roots = real_roots_in(f, RealInterval(-bound, bound), 1e-12)
    if len(roots) != 3:
        raise NotElliptic(f"f needs three distinct real roots, found {len(roots)}")
    ovals = [(roots[i], roots[i + 1]) for i in range(2)
             if f((roots[i] + roots[i + 1]) / 2) > 0]
    if len(ovals) != 1:
        raise NotElliptic("could not isolate a single bounded oval")
    x1, x2 = ovals[0]
    x3 = next(r for r in roots if r not in (x1, x2))
    return x1, x2, x3


def _oval_integrand(a, x1, x2, x3, alpha, beta):
    # x = x1 + L sin^2(t) turns sqrt(f) into L sin cos sqrt(-a (x - x3)), smooth on [0, pi/2]
    L = x2 - x1

    def g(t):
        s, co = math.sin(t), math.cos(t)
        x = x1 + L * s * s
        w = -a * (x - x3)
        root_f = L * s * co * math.sqrt(max(w, 0.0))
        f = root_f * root_f
        return x ** alpha * f ** beta * root_f * 2 * L * s * co
    return g


def elliptic_moment(a, b, c, d, alpha: int, two_beta: int, quad_tol: float = 1e-12,
                    oval: tuple | None = None) -> float:
    """Raw moment m_{alpha, two_beta} of {y**2 <= f(x)}; zero for odd ``two_beta``."""
    if two_beta % 2:
        return 0.0
    x1, x2, x3 = oval or cubic_oval(a, b, c, d)
    beta = two_beta // 2
    val, err = integrate.quad(_oval_integrand(a, x1, x2, x3, alpha, beta), 0, math.pi / 2,
                              epsabs=quad_tol, epsrel=0.0, limit=500)
    if not err <= quad_tol:
        raise QuadratureFailure(f"quadrature error estimate {err:.3g} > {quad_tol:.3g}")
    return 2.0 / (two_beta + 1) * val


def elliptic_moments(a, b, c, d, quad_tol: float = 1e-12) -> EllipticMoments:
    """The seven moments m00, m10, m20, m30, m40, m02, m12 of the oval of y**2 = f(x)."""
    oval = cubic_oval(a, b, c, d)
    vals = {k: elliptic_moment(a, b, c, d, int(k[1]), int(k[2]), quad_tol, oval)
            for k in ELLIPTIC_KEYS}
    return EllipticMoments(**vals)


def check_relation_43(e: EllipticMoments, curve: Sequence[float],
                      extended: Mapping[tuple[int, int], float] | None = None,
                      tol: float = 1e-9, pairs: Iterable[tuple[int, int]] | None = None
                      ) -> dict:
    """Residuals of M_{a,2b+2} = a M_{a+3,2b} + b M_{a+2,2b} + c M_{a+1,2b} + d M_{a,2b}.

    ``extended`` supplies extra normalized M-values keyed by (alpha, 2*beta).
    Without ``pairs`` every (alpha, beta) whose terms are all available is
    checked.
    """
    A, B, C, D = curve
    known: dict[tuple[int, int], float] = {
        (int(k[1]), int(k[2])): e.M(int(k[1]), int(k[2])) for k in ELLIPTIC_KEYS}
    if extended:
        known.update({(int(k[0]), int(k[1])): v for k, v in extended.items()})

    def get(al, tb):
        if (al, tb) not in known:
            raise MissingMoment(f"M[{al},{tb}] not available", key=(al, tb))
        return known[(al, tb)]

    if pairs is None:
        pairs = sorted({(al, tb // 2) for (al, tb) in known
                        if all((al + s, tb) in known for s in range(4))
                        and (al, tb + 2) in known})
    residuals = {}
    for al, be in pairs:
        tb = 2 * be
        lhs = get(al, tb + 2)
        rhs = A * get(al + 3, tb) + B * get(al + 2, tb) + C * get(al + 1, tb) + D * get(al, tb)
        residuals[(al, be)] = lhs - rhs
    worst = max((abs(r) for r in residuals.values()), default=0.0)
    return {"residuals": residuals, "max_abs": worst, "passed": worst <= tol}
