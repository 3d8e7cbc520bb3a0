import mpmath
import numpy as np
import pytest

from momrec.elliptic import gram_matrix, reconstruct_elliptic, system_matrix
from momrec.errors import SingularSystem
from momrec.moments2d import EllipticMoments, check_relation_43, elliptic_moment, elliptic_moments

# (a, b, c, d) with three distinct real roots and one bounded oval
CURVES = [
    (-1.0, 0.0, 1.0, 0.0),
    (-1.0, 1.0, 2.0, 0.0),
    (1.0, 0.0, -1.0, 0.0),
    (1.0, -6.0, 11.0, -6.0),
    (-2.0, 0.5, 3.0, 1.0),
]


def rel_error(got, want):
    scale = max(abs(v) for v in want)
    return max(abs(g - w) for g, w in zip(got, want)) / scale


def gram_oracle(curve):
    a, b, c, d = curve
    with mpmath.workdps(30):
        roots = sorted(mpmath.re(r) for r in mpmath.polyroots([a, b, c, d]))
        f = lambda t: max(a * t ** 3 + b * t ** 2 + c * t + d, 0)  # noqa: E731
        lo, hi = next((p, q) for p, q in zip(roots, roots[1:]) if f((p + q) / 2) > 0)
        mom = [mpmath.quad(lambda t: t ** k * mpmath.sqrt(f(t)), [lo, hi]) for k in range(5)]
        G = mpmath.matrix([[mom[4 - i - j] for j in range(3)] for i in range(3)])
        return float(mpmath.det(G))


@pytest.mark.parametrize("curve", CURVES)
def test_round_trip(curve):
    got = reconstruct_elliptic(elliptic_moments(*curve, quad_tol=1e-12))
    assert rel_error(got.coefficients, curve) <= 1e-6
    assert got.determinant > 0
    assert got.x1 < got.x2
    assert abs(got.f(got.x1)) <= 1e-9 and abs(got.f(got.x2)) <= 1e-9


@pytest.mark.parametrize("curve", CURVES)
def test_determinant_is_six_gram(curve):
    e = elliptic_moments(*curve)
    det = np.linalg.det(system_matrix(e))
    assert det == pytest.approx(6 * np.linalg.det(gram_matrix(e)), abs=1e-9)
    assert det == pytest.approx(6 * gram_oracle(curve), abs=1e-9)
    assert det > 0


@pytest.mark.parametrize("curve", CURVES)
def test_recovered_curve_satisfies_recurrence(curve):
    e = elliptic_moments(*curve)
    got = reconstruct_elliptic(e)
    ext = {(al, tb): (tb + 1) / 2 * elliptic_moment(*got.coefficients, al, tb)
           for al in range(6) for tb in (0, 2, 4)}
    rep = check_relation_43(e, got.coefficients, ext, tol=1e-9,
                            pairs=[(0, 0), (1, 0), (2, 0), (0, 1)])
    assert rep["passed"], rep


def test_scaled_curve():
    # y -> sqrt(2) y maps the oval of x - x^3 onto that of 2x - 2x^3
    base = elliptic_moments(-1.0, 0.0, 1.0, 0.0)
    scaled = elliptic_moments(-2.0, 0.0, 2.0, 0.0)
    assert scaled.m00 == pytest.approx(np.sqrt(2) * base.m00, rel=1e-10)
    got = reconstruct_elliptic(scaled)
    assert rel_error(got.coefficients, (-2, 0, 2, 0)) <= 1e-6


def test_point_mass_data_is_singular():
    with pytest.raises(SingularSystem):
        reconstruct_elliptic(EllipticMoments(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0))
