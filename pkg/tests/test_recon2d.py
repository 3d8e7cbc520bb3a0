import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TEST_DOMAINS, domain_sup_error, parabola_strip, square, triangle
from momrec.errors import InsufficientMoments, MomrecError, ValidationError
from momrec.moments2d import DomainInterval, DomainSpec, MomentTable2D, moments2d
from momrec.polycore import Polynomial
from momrec.recon2d import (
    Recon2DConfig,
    forward_residual,
    interior_breakpoints,
    reconstruct2d,
    reconstruct_triangle,
    required_alpha,
    triangle_candidates,
    triangle_six_moments,
)


def close(got, want, tol):
    return np.max(np.abs(np.array(got, dtype=float) - np.array(want, dtype=float))) <= tol


def table_for(G, cfg):
    return moments2d(G, required_alpha(cfg) - 1, cfg.betas)


def shifted(G, dy):
    return DomainSpec([DomainInterval(iv.x_min, iv.x_max,
                                      [(s.lower + Polynomial([dy]), s.upper + Polynomial([dy]))
                                       for s in iv.strips])
                       for iv in G.intervals])


class TestConfig:
    def test_defaults(self):
        cfg = Recon2DConfig(3, 1)
        assert cfg.samples == 5
        assert cfg.betas == 4
        assert cfg.psi_degree(2) == 3

    def test_beta_rule(self):
        assert Recon2DConfig(3, 2, psi_degree_rule="beta").psi_degree(2) == 4

    @pytest.mark.parametrize("kw", [
        dict(kappa=1, degree=0),
        dict(kappa=2, degree=-1),
        dict(kappa=2, degree=2, samples_per_interval=2),
        dict(kappa=2, degree=0, tol=0),
        dict(kappa=2, degree=0, psi_degree_rule="beta*2"),
    ])
    def test_rejected(self, kw):
        with pytest.raises(ValidationError):
            Recon2DConfig(**kw)

    def test_interior_breakpoints(self):
        assert [interior_breakpoints(k) for k in (2, 3, 4)] == [0, 1, 2]


class TestRoundTrip:
    def test_square(self):
        cfg = Recon2DConfig(2, 0)
        H = reconstruct2d(table_for(square(), cfg), cfg)
        assert len(H.intervals) == 1
        assert H.intervals[0].x_min == pytest.approx(0, abs=1e-12)
        assert H.intervals[0].x_max == pytest.approx(1, abs=1e-12)
        assert domain_sup_error(square(), H) <= 1e-10

    def test_parabola(self):
        cfg = Recon2DConfig(2, 2)
        H = reconstruct2d(table_for(parabola_strip(), cfg), cfg)
        s = H.intervals[0].strips[0]
        assert list(map(float, s.upper.coeffs)) == pytest.approx([1, 0, -1], abs=1e-8)
        assert domain_sup_error(parabola_strip(), H) <= 1e-8

    def test_triangle(self):
        cfg = Recon2DConfig(3, 1)
        H = reconstruct2d(table_for(triangle(), cfg), cfg)
        assert close([(iv.x_min, iv.x_max) for iv in H.intervals], [(0, 1), (1, 2)], 1e-10)
        assert domain_sup_error(triangle(), H) <= 1e-8

    @pytest.mark.parametrize("name", sorted(TEST_DOMAINS))
    def test_every_test_domain(self, name):
        build, kappa, d = TEST_DOMAINS[name]
        G = build()
        cfg = Recon2DConfig(kappa, d)
        m = table_for(G, cfg)
        H = reconstruct2d(m, cfg)
        assert domain_sup_error(G, H) <= 1e-6
        assert forward_residual(H, m) <= 1e-8 * max(1, max(abs(float(v)) for r in m.rows for v in r))

    def test_overdetermined_beta_rows(self):
        cfg = Recon2DConfig(2, 0, beta_top=4)
        H = reconstruct2d(table_for(square(), cfg), cfg)
        assert domain_sup_error(square(), H) <= 1e-10

    def test_float_table(self):
        cfg = Recon2DConfig(2, 0)
        H = reconstruct2d(table_for(square(), cfg).to_float(), cfg)
        assert domain_sup_error(square(), H) <= 1e-6


class TestErrors:
    def test_too_few_alpha(self):
        cfg = Recon2DConfig(2, 2)
        with pytest.raises(InsufficientMoments):
            reconstruct2d(moments2d(parabola_strip(), 6, 2), cfg)

    def test_too_few_beta(self):
        cfg = Recon2DConfig(3, 1)
        with pytest.raises(InsufficientMoments):
            reconstruct2d(moments2d(triangle(), required_alpha(cfg), 2), cfg)

    def test_underestimated_degree_is_loud(self):
        cfg = Recon2DConfig(2, 1)
        with pytest.raises(MomrecError):
            reconstruct2d(table_for(parabola_strip(), cfg), cfg)


class TestForwardResidual:
    def test_identity(self):
        m = moments2d(triangle(), 6, 4)
        assert forward_residual(triangle(), m) <= 1e-12

    def test_shift_detected(self):
        m = moments2d(square(), 4, 2)
        assert forward_residual(shifted(square(), Fraction(1, 10)), m) > 1e-3

    def test_empty_table(self):
        assert forward_residual(square(), MomentTable2D([])) == 0.0

    def test_float_table(self):
        m = moments2d(square(), 4, 2).to_float()
        assert forward_residual(square(), m) <= 1e-15


class TestTriangle:
    def test_candidates_share_moments(self):
        truth = [(0, 0), (1, 2), (3, 1)]
        six = triangle_six_moments(truth)
        cands = triangle_candidates(six)
        assert [c["apex"] for c in cands] == ["above", "below"]
        assert close(cands[0]["vertices"], truth, 1e-12)
        other = [(0, 10 / 7), (1, -1 / 7), (3, 12 / 7)]
        assert close(cands[1]["vertices"], other, 1e-12)
        assert triangle_six_moments([(0, Fraction(10, 7)), (1, Fraction(-1, 7)), (3, Fraction(12, 7))]) == six

    def test_hint_selects(self):
        six = triangle_six_moments([(0, 0), (2, 0), (1, 1)])
        assert close(reconstruct_triangle(six, apex="above"), [(0, 0), (1, 1), (2, 0)], 1e-12)

    def test_ambiguous_without_hint(self):
        six = triangle_six_moments([(0, 0), (1, 2), (3, 1)])
        with pytest.raises(ValidationError):
            reconstruct_triangle(six)

    def test_bad_hint(self):
        with pytest.raises(ValidationError):
            reconstruct_triangle(triangle_six_moments([(0, 0), (1, 2), (3, 1)]), apex="left")

    def test_missing_key(self):
        six = triangle_six_moments([(0, 0), (1, 2), (3, 1)])
        del six["m11"]
        with pytest.raises(ValidationError):
            triangle_candidates(six)

    def test_float_input(self):
        six = {k: float(v) for k, v in triangle_six_moments([(0, 0), (1, 2), (3, 1)]).items()}
        assert close(reconstruct_triangle(six, apex="above"), [(0, 0), (1, 2), (3, 1)], 1e-8)

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6))
    def test_truth_is_a_candidate_and_both_fit(self, seed):
        rng = random.Random(seed)
        xs = sorted(rng.sample(range(-10, 11), 3))
        while True:
            ys = [rng.randint(-10, 10) for _ in range(3)]
            # reject degenerate (collinear) triangles
            if (xs[1] - xs[0]) * (ys[2] - ys[0]) != (xs[2] - xs[0]) * (ys[1] - ys[0]):
                break
        truth = list(zip(xs, ys))
        six = triangle_six_moments(truth)
        cands = triangle_candidates(six)
        assert any(close(c["vertices"], truth, 1e-8) for c in cands)
        for c in cands:
            got = triangle_six_moments(c["vertices"])
            for k in six:
                assert got[k] == pytest.approx(float(six[k]), abs=1e-8 * (1 + abs(float(six[k]))))
