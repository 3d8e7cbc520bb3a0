import random
from fractions import Fraction

import pytest
from hypothesis import settings

from momrec.moments2d import DomainInterval, DomainSpec, triangle_domain
from momrec.polycore import PiecewisePolynomial, Polynomial

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


def random_piecewise(rng: random.Random, max_K=3, max_N=3, grid=1000):
    """Random exact piecewise polynomial with breakpoints >= 0.2 apart in [0, 2].

    Pieces are nonzero and differ across every breakpoint, so every
    breakpoint is really there.
    """
    K = rng.randint(0, max_K)
    N = rng.randint(0, max_N)
    while True:
        pts = sorted(rng.randint(0, 2 * grid) for _ in range(K + 2))
        if all(b - a >= grid // 5 for a, b in zip(pts, pts[1:])):
            break
    bps = [Fraction(p, grid) for p in pts]
    pieces = []
    for _ in range(K + 1):
        while True:
            coeffs = [Fraction(rng.randint(-grid, grid), grid) for _ in range(N + 1)]
            if coeffs[-1] == 0:
                coeffs[-1] = Fraction(1, 2)
            p = Polynomial(coeffs)
            if not pieces or p != pieces[-1]:
                break
        pieces.append(p)
    return PiecewisePolynomial(bps, pieces), K, N


def poly_sup_error(p: Polynomial, q: Polynomial, lo, hi, samples=201) -> float:
    lo, hi = float(lo), float(hi)
    d = (p.to_float() - q.to_float())
    return max(abs(d(lo + (hi - lo) * k / (samples - 1))) for k in range(samples))


def domain_sup_error(G: DomainSpec, H: DomainSpec) -> float:
    """Largest boundary discrepancy between two domains with matching layout."""
    assert len(G.intervals) == len(H.intervals)
    worst = 0.0
    for a, b in zip(G.intervals, H.intervals):
        worst = max(worst, abs(float(a.x_min) - float(b.x_min)), abs(float(a.x_max) - float(b.x_max)))
        assert len(a.strips) == len(b.strips)
        for s, t in zip(a.strips, b.strips):
            worst = max(worst,
                        poly_sup_error(s.lower, t.lower, a.x_min, a.x_max),
                        poly_sup_error(s.upper, t.upper, a.x_min, a.x_max))
    return worst


def square():
    return DomainSpec([DomainInterval(0, 1, [(Polynomial([0]), Polynomial([1]))])])


def parabola_strip():
    return DomainSpec([DomainInterval(-1, 1, [(Polynomial([0]), Polynomial([1, 0, -1]))])])


def triangle():
    return triangle_domain([(0, 0), (2, 0), (1, 1)])


def two_strip():
    h = Fraction(1, 2)
    return DomainSpec([DomainInterval(-h, h, [(Polynomial([0]), Polynomial([1])),
                                              (Polynomial([2, 0, 1]), Polynomial([3, 0, 1]))])])


TEST_DOMAINS = {
    # name: (domain, kappa, d)
    "square": (square, 2, 0),
    "parabola_strip": (parabola_strip, 2, 2),
    "triangle": (triangle, 3, 1),
    "two_strip": (two_strip, 4, 2),
}


@pytest.fixture
def rng():
    return random.Random(20240617)
