import dataclasses
import random
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import TEST_DOMAINS, parabola_strip, square, triangle, two_strip
from momrec.errors import IndexOutOfRange, InvalidDomain, InvalidMoments, MissingMoment, NotElliptic
from momrec.moments1d import moments_pp
from momrec.moments2d import (
    DomainInterval,
    DomainSpec,
    EllipticMoments,
    check_relation_43,
    elliptic_moment,
    elliptic_moments,
    moments2d,
    psi_function,
    psi_moments,
)
from momrec.polycore import PiecewisePolynomial, Polynomial

CURVE = (-1.0, 0.0, 1.0, 0.0)


def sympy_double_moment(G: DomainSpec, alpha: int, beta: int) -> Fraction:
    x, y = sympy.symbols("x y")

    def expr(p):
        return sum(sympy.Rational(str(Fraction(c))) * x ** i for i, c in enumerate(p.coeffs))

    acc = sympy.Integer(0)
    for iv in G.intervals:
        for s in iv.strips:
            inner = sympy.integrate(x ** alpha * y ** beta, (y, expr(s.lower), expr(s.upper)))
            acc += sympy.integrate(inner, (x, sympy.Rational(str(Fraction(iv.x_min))),
                                           sympy.Rational(str(Fraction(iv.x_max)))))
    return Fraction(int(acc.p), int(acc.q))


def oval_oracle(curve, alpha, two_beta):
    a, b, c, d = curve
    with mpmath.workdps(30):
        roots = sorted(mpmath.re(r) for r in mpmath.polyroots([a, b, c, d]))
        f = lambda t: max(a * t ** 3 + b * t ** 2 + c * t + d, 0)
        lo, hi = next((p, q) for p, q in zip(roots, roots[1:]) if f((p + q) / 2) > 0)
        val = mpmath.quad(lambda t: t ** alpha * 2 * f(t) ** (mpmath.mpf(two_beta + 1) / 2)
                          / (two_beta + 1), [lo, hi])
        return float(val)


class TestMoments2D:
    def test_unit_square(self):
        m = moments2d(square(), 4, 3)
        for a in range(5):
            for b in range(4):
                assert m(a, b) == Fraction(1, (a + 1) * (b + 1))

    def test_parabola_strip(self):
        m = moments2d(parabola_strip(), 2, 1)
        assert m(0, 0) == Fraction(4, 3)
        assert m(1, 0) == 0
        assert m(0, 1) == Fraction(8, 15)

    def test_triangle_area(self):
        assert moments2d(triangle(), 0, 0)(0, 0) == 1

    @pytest.mark.parametrize("name", sorted(TEST_DOMAINS))
    def test_matches_symbolic_double_integral(self, name):
        G = TEST_DOMAINS[name][0]()
        m = moments2d(G, 3, 2)
        for a in range(4):
            for b in range(3):
                assert m(a, b) == sympy_double_moment(G, a, b)

    def test_strip_order_violation(self):
        G = DomainSpec([DomainInterval(0, 1, [([1], [0])])])
        with pytest.raises(InvalidDomain):
            moments2d(G, 1, 1)

    def test_overlapping_strips_rejected(self):
        G = DomainSpec([DomainInterval(0, 1, [([0], [2]), ([1], [3])])])
        with pytest.raises(InvalidDomain):
            moments2d(G, 1, 1)

    def test_negative_sizes(self):
        with pytest.raises(ValueError):
            moments2d(square(), -1, 0)


class TestPsi:
    def test_first_row(self):
        m = moments2d(two_strip(), 5, 3)
        assert psi_moments(m, 0).values == m.rows[0]

    def test_square_row_one(self):
        m = moments2d(square(), 4, 1)
        assert psi_moments(m, 1).values == tuple(Fraction(1, 2 * (a + 1)) for a in range(5))

    def test_parabola_row_one(self):
        assert psi_moments(moments2d(parabola_strip(), 0, 1), 1).values[0] == Fraction(8, 15)

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            psi_moments(moments2d(square(), 1, 1), 2)

    @pytest.mark.parametrize("name", sorted(TEST_DOMAINS))
    def test_row_equals_1d_moments_of_explicit_psi(self, name):
        G, _, d = TEST_DOMAINS[name]
        G = G()
        m = moments2d(G, 8, 4)
        for b in range(5):
            x = sympy.symbols("x")
            # build Psi_b independently from the strip powers
            bps, pieces = [G.intervals[0].x_min], []
            for iv in G.intervals:
                acc = sympy.Integer(0)
                for s in iv.strips:
                    up = sum(sympy.Rational(str(Fraction(c))) * x ** i for i, c in enumerate(s.upper.coeffs))
                    lo = sum(sympy.Rational(str(Fraction(c))) * x ** i for i, c in enumerate(s.lower.coeffs))
                    acc += (up ** (b + 1) - lo ** (b + 1)) / (b + 1)
                poly = sympy.Poly(sympy.expand(acc), x)
                coeffs = [Fraction(int(c.p), int(c.q)) for c in poly.all_coeffs()[::-1]]
                pieces.append(Polynomial(coeffs))
                bps.append(iv.x_max)
            psi = PiecewisePolynomial(bps, pieces)
            assert all(p.is_zero or p.degree <= (b + 1) * d for p in psi.pieces)
            assert psi_moments(m, b).values == moments_pp(psi, 9).values

    def test_psi_function_power_sum_identity(self):
        G = two_strip()
        for b in range(4):
            psi = psi_function(G, b)
            for x in (Fraction(-1, 3), Fraction(0), Fraction(1, 7)):
                iv = G.intervals[0]
                want = sum(s.upper(x) ** (b + 1) - s.lower(x) ** (b + 1) for s in iv.strips)
                assert (b + 1) * psi(x) == want

    @given(st.integers(0, 10 ** 6))
    def test_symmetric_domain_has_zero_odd_rows(self, seed):
        rng = random.Random(seed)
        c = [Fraction(rng.randint(6, 20), 10), Fraction(rng.randint(-5, 5), 10)]
        upper = Polynomial(c)
        G = DomainSpec([DomainInterval(0, 1, [(-upper, upper)])])
        m = moments2d(G, 4, 5)
        for b in (1, 3, 5):
            assert all(v == 0 for v in m.rows[b])


class TestElliptic:
    def test_first_example_against_oracle(self):
        e = elliptic_moments(*CURVE)
        assert e.m00 == pytest.approx(oval_oracle(CURVE, 0, 0), abs=1e-11)

    @pytest.mark.parametrize("curve", [CURVE, (-1.0, 1.0, 2.0, 0.0), (-2.0, 0.5, 3.0, 1.0)])
    def test_all_seven_against_oracle(self, curve):
        e = elliptic_moments(*curve)
        for k, v in e.as_dict().items():
            assert v == pytest.approx(oval_oracle(curve, int(k[1]), int(k[2])), abs=1e-10)

    def test_not_a_cubic(self):
        with pytest.raises(NotElliptic):
            elliptic_moments(0, -1, 0, 1)

    def test_one_real_root(self):
        with pytest.raises(NotElliptic):
            elliptic_moments(1, 0, 1, 0)

    def test_odd_rows_vanish(self):
        assert elliptic_moment(*CURVE, 0, 1) == 0
        assert elliptic_moment(*CURVE, 2, 3) == 0

    def test_nonpositive_area_rejected(self):
        with pytest.raises(InvalidMoments):
            EllipticMoments(0, 0, 0, 0, 0, 0, 0)

    def test_tolerance_halving_stable(self):
        a = elliptic_moments(*CURVE, quad_tol=1e-12).as_dict()
        b = elliptic_moments(*CURVE, quad_tol=5e-13).as_dict()
        assert all(abs(a[k] - b[k]) <= 1e-10 for k in a)

    def test_unknown_raw_moment(self):
        with pytest.raises(MissingMoment):
            elliptic_moments(*CURVE).raw(5, 0)


class TestRelation43:
    def test_holds_on_synthetic_data(self):
        rep = check_relation_43(elliptic_moments(*CURVE), CURVE, pairs=[(0, 0)])
        assert abs(rep["residuals"][(0, 0)]) <= 1e-9
        assert rep["passed"]

    def test_default_pairs(self):
        rep = check_relation_43(elliptic_moments(*CURVE), CURVE)
        assert set(rep["residuals"]) == {(0, 0), (1, 0)}
        assert rep["passed"]

    def test_detects_perturbation(self):
        e = elliptic_moments(*CURVE)
        bad = dataclasses.replace(e, m02=e.m02 + 1e-3 / 1.5)
        rep = check_relation_43(bad, CURVE, pairs=[(0, 0)])
        assert rep["residuals"][(0, 0)] == pytest.approx(1e-3, rel=1e-6)
        assert not rep["passed"]

    def test_extended_values_widen_the_check(self):
        e = elliptic_moments(*CURVE)
        ext = {(a, tb): (tb + 1) / 2 * elliptic_moment(*CURVE, a, tb)
               for a in range(8) for tb in (0, 2, 4)}
        rep = check_relation_43(e, CURVE, ext, pairs=[(0, 1), (2, 1), (4, 0)])
        assert rep["max_abs"] <= 1e-9

    def test_missing_value(self):
        with pytest.raises(MissingMoment):
            check_relation_43(elliptic_moments(*CURVE), CURVE, pairs=[(0, 1)])
