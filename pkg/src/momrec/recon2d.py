"""Reconstruction of a polynomial-boundary domain from its double moments.

Each moment row beta is the 1D moment sequence of Psi_beta(x), the beta-th
vertical power integral of the indicator, which is piecewise polynomial.  After
recovering every Psi_beta, the values (beta+1) * Psi_beta(x) at a fixed x are
power sums of the boundary ordinates over that vertical line with amplitudes
+1 (upper) and -1 (lower); a unit-sign Prony solve returns the ordinates.
Boundary polynomials are then fitted through those ordinates at sample points.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import mpmath
import numpy as np

from . import _linalg
from .errors import (
    BranchCrossing,
    BreakpointRecoveryFailed,
    InsufficientMoments,
    MomrecError,
    RankDeficient,
    ReconstructionError,
    ResidualTooLarge,
    ValidationError,
)
from .moments2d import (
    DomainInterval,
    DomainSpec,
    MomentTable2D,
    Strip,
    moments2d,
    psi_moments,
    triangle_domain,
)
from .polycore import Polynomial, is_exact_value
from .prony import PronyProblem, hankel_rank, solve_classical, solve_signed
from .recon1d import Recon1DConfig, reconstruct1d, required_moments, working_dps

log = logging.getLogger(__name__)

CONSENSUS_FRACTION = 1e-6


@dataclass(frozen=True)
class Recon2DConfig:
    kappa: int
    degree: int
    samples_per_interval: int | None = None
    tol: float = 1e-10
    beta_top: int | None = None
    psi_degree_rule: str = "beta+1"
    strict_consensus: bool = True

    def __post_init__(self):
        if self.kappa < 2 or self.degree < 0:
            raise ValidationError("kappa must be >= 2 and degree >= 0")
        if self.samples_per_interval is not None and self.samples_per_interval < self.degree + 1:
            raise ValidationError("samples_per_interval must be at least degree + 1")
        if self.psi_degree_rule not in ("beta+1", "beta"):
            raise ValidationError("psi_degree_rule must be 'beta+1' or 'beta'")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")

    @property
    def samples(self) -> int:
        return self.samples_per_interval or 2 * self.degree + 3

    @property
    def betas(self) -> int:
        """Highest beta row used."""
        return self.beta_top if self.beta_top is not None else 2 * (self.kappa - 1)

    def psi_degree(self, beta: int) -> int:
        mult = beta + 1 if self.psi_degree_rule == "beta+1" else beta
        return mult * self.degree


def interior_breakpoints(kappa: int) -> int:
    """Bound on interior breakpoints of every Psi_beta.

    Without vertical boundary pieces each projection breakpoint is an endpoint
    of at least two of the kappa graph segments, so there are at most kappa
    breakpoints in all.
    """
    return max(kappa - 2, 0)


def required_alpha(cfg: Recon2DConfig) -> int:
    """Number of alpha indices (alpha_max + 1) the pipeline consumes."""
    K = interior_breakpoints(cfg.kappa)
    return max(required_moments(K, cfg.psi_degree(b)) for b in range(cfg.betas + 1))


def reconstruct2d(m: MomentTable2D, cfg: Recon2DConfig) -> DomainSpec:
    """Recover the strips of a domain from m_{alpha,beta}, beta <= cfg.betas."""
    B = cfg.betas
    if m.beta_max < B:
        raise InsufficientMoments(f"need beta rows 0..{B}, table has 0..{m.beta_max}")
    need = required_alpha(cfg)
    if m.alpha_max + 1 < need:
        raise InsufficientMoments(
            f"need alpha_max >= {need - 1} for kappa={cfg.kappa}, d={cfg.degree}",
            required=need - 1, got=m.alpha_max)
    if not m.is_exact:
        return _reconstruct(m, cfg, None)
    dps = working_dps(need)
    with mpmath.workdps(dps):
        return _reconstruct(m, cfg, dps)


def _reconstruct(m: MomentTable2D, cfg: Recon2DConfig, dps):
    B, tol = cfg.betas, cfg.tol

    # 1. Psi_beta from each moment row
    psis = {}
    for beta in range(B + 1):
        N = cfg.psi_degree(beta)
        row = psi_moments(m, beta).values
        if all(v == 0 for v in row):
            psis[beta] = None
            continue
        K = interior_breakpoints(cfg.kappa)
        row = row[:required_moments(K, N)]
        try:
            psis[beta] = reconstruct1d(row, Recon1DConfig(K, N, tol=tol),
                                       keep_precision=dps is not None)
        except MomrecError as exc:
            exc.context.setdefault("beta", beta)
            raise type(exc)(f"Psi_{beta}: {exc}", **exc.context) from exc

    # 2. breakpoint consensus
    bps = _consensus({b: p.breakpoints for b, p in psis.items() if p is not None},
                     cfg.strict_consensus)

    # 3-4. strips per interval
    intervals = []
    for lo, hi in zip(bps, bps[1:]):
        intervals.append(_interval_strips(psis, lo, hi, cfg, dps))
    G = DomainSpec(intervals)

    res = forward_residual(G, m)
    scale = max(abs(float(v)) for r in m.rows for v in r)
    if res > tol * scale:
        raise ResidualTooLarge(f"forward moment residual {res:.3g} exceeds {tol * scale:.3g}",
                               residual=res)
    log.debug("recon2d: %d interval(s), forward residual %.3g", len(intervals), res)
    return G


def _consensus(sets: Mapping[int, tuple], strict: bool) -> list:
    if not sets:
        raise BreakpointRecoveryFailed("every Psi_beta vanishes; empty domain")
    pts = sorted(((x, b) for b, xs in sets.items() for x in xs), key=lambda t: t[0])
    width = float(pts[-1][0] - pts[0][0])
    radius = CONSENSUS_FRACTION * max(width, 1e-300)
    clusters: list[list] = []
    for x, b in pts:
        if clusters and float(x - clusters[-1][-1][0]) <= radius:
            clusters[-1].append((x, b))
        else:
            clusters.append([(x, b)])
    if strict:
        for c in clusters:
            seen = {b for _, b in c}
            missing = sorted(set(sets) - seen)
            if missing:
                detail = {b: [float(v) for v in xs] for b, xs in sets.items()}
                raise BreakpointRecoveryFailed(
                    f"breakpoint {float(c[0][0]):.10g} missing from beta rows {missing}; "
                    f"per-beta sets: {detail}")
    return [sum(x for x, _ in c) / len(c) for c in clusters]


def _power_sums(psis, B, x):
    return [(beta + 1) * psis[beta](x) if psis[beta] is not None else 0 * x
            for beta in range(B + 1)]


def _chebyshev(lo, hi, n):
    pi = mpmath.pi if isinstance(lo, mpmath.mpf) else np.pi
    cos = mpmath.cos if isinstance(lo, mpmath.mpf) else np.cos
    return [(lo + hi) / 2 + (hi - lo) / 2 * cos((2 * k + 1) * pi / (2 * n))
            for k in range(n - 1, -1, -1)]


def _interval_strips(psis, lo, hi, cfg, dps) -> DomainInterval:
    B, tol, d = cfg.betas, cfg.tol, cfg.degree
    mid = (lo + hi) / 2
    data = [0.0] + [float(v) for v in _power_sums(psis, B, mid)]
    r = hankel_rank(data, len(data) // 2, tol)
    if r == 0 or r % 2:
        raise RankDeficient(f"odd or zero boundary count {r} over [{float(lo)}, {float(hi)}]",
                            interval=(float(lo), float(hi)))
    s = r // 2
    if 4 * s - 1 > B + 1:
        raise InsufficientMoments(
            f"{s} strips over [{float(lo)}, {float(hi)}] need beta up to {4 * s - 2}")
    xs = _chebyshev(lo, hi, cfg.samples)
    branches = [[] for _ in range(2 * s)]
    for x in xs:
        try:
            ys = solve_signed(_power_sums(psis, B, x), s, tol, refine_dps=dps)
        except MomrecError as exc:
            exc.context.update(interval=(float(lo), float(hi)), x=float(x))
            raise type(exc)(f"at x={float(x):.10g}: {exc}", **exc.context) from exc
        for k, y in enumerate(ys):
            branches[k].append(y)
    polys = [_fit(xs, ys, d, tol, dps) for ys in branches]
    _check_order(polys, lo, hi)
    strips = [Strip(polys[2 * l], polys[2 * l + 1]) for l in range(s)]
    return DomainInterval(float(lo), float(hi), strips)


def _fit(xs, ys, d, tol, dps) -> Polynomial:
    """Least-squares polynomial of degree d through (xs, ys), float coefficients."""
    A = [[x ** i for i in range(d + 1)] for x in xs]
    yscale = 1.0 + max(abs(float(y)) for y in ys)
    if dps is not None:
        coef, res = _linalg.mp_lstsq(A, ys, dps)
        bound = tol * yscale
        cscale = max(1, max(abs(c) for c in coef))
        snap = max(1e3 * res, mpmath.mpf(10) ** (-(dps // 4))) * cscale
        coef = [0.0 if abs(c) < snap else float(c) for c in coef]
    else:
        Af = np.array(A, dtype=float)
        yf = np.array([float(y) for y in ys])
        coef, *_ = np.linalg.lstsq(Af, yf, rcond=None)
        res = float(np.max(np.abs(Af @ coef - yf)))
        bound = 1e3 * tol * yscale
        coef = list(coef)
    if res > bound:
        raise BranchCrossing(
            f"boundary ordinates do not follow a degree-{d} polynomial (misfit {float(res):.3g}); "
            "kappa or degree may be misconfigured")
    return Polynomial(coef)


def _check_order(polys, lo, hi):
    xs = np.linspace(float(lo), float(hi), 41)[1:-1]
    for x in xs:
        vals = [p(x) for p in polys]
        if any(not (a < b) for a, b in zip(vals, vals[1:])):
            raise BranchCrossing(f"fitted boundaries cross at x={x:.6g}")


def forward_residual(G: DomainSpec, m: MomentTable2D) -> float:
    """max |moments2d(G) - m| over the table; exact arithmetic when m is exact."""
    if not m.rows:
        return 0.0
    H = G.to_exact() if m.is_exact else G.to_float()
    mine = moments2d(H, m.alpha_max, m.beta_max, validate=False)
    return float(max(abs(a - b) for r1, r2 in zip(mine.rows, m.rows) for a, b in zip(r1, r2)))


# --- triangles from six moments ---------------------------------------------

TRIANGLE_KEYS = ("m00", "m10", "m20", "m30", "m01", "m11")


def triangle_candidates(six: Mapping[str, object], tol: float = 1e-10) -> list[dict]:
    """All triangles (non-vertical edges) matching m00, m10, m20, m30, m01, m11.

    Psi_0 is a hat function whose second derivative is three point masses at the
    vertex abscissae, so the x-moments give a 3-node Prony problem.  The two
    remaining y-moments are linear in the ordinates once the side on which the
    middle vertex lies is fixed, so there are exactly two candidates, one per
    side.  Returned sorted with ``apex = "above"`` first.
    """
    missing = [k for k in TRIANGLE_KEYS if k not in six]
    if missing:
        raise ValidationError(f"missing moments {missing}")
    vals = [six[k] for k in TRIANGLE_KEYS]
    exact = all(is_exact_value(v) for v in vals)
    if exact:
        vals = [Fraction(v) for v in vals]
        with mpmath.workdps(50):
            return _triangles(vals, tol, 50)
    return _triangles([float(v) for v in vals], tol, None)


def _triangles(vals, tol, dps):
    m00, m10, m20, m30, m01, m11 = vals
    if not m00 > 0:
        raise ValidationError("m00 must be positive")
    # moments of Psi_0'': d_alpha = alpha (alpha - 1) m_{alpha-2, 0}
    d = [0 * m00, 0 * m00, 2 * m00, 6 * m10, 12 * m20, 20 * m30]
    try:
        sol = solve_classical(PronyProblem(d, max_nodes=3), tol, dps=dps)
    except ReconstructionError as exc:
        raise BreakpointRecoveryFailed(f"vertex abscissae: {exc}") from exc
    if len(sol.nodes) != 3:
        raise BreakpointRecoveryFailed(f"expected 3 vertex abscissae, found {len(sol.nodes)}")
    xs = list(sol.nodes_mp) if sol.nodes_mp is not None else list(sol.nodes)
    cA = sol.amplitudes[0][0]
    if dps is not None:
        # recompute the first slope at full precision: m00 = h (xC - xA) / 2
        xA, xB, xC = xs
        h = 2 * mpmath.mpf(m00.numerator) / m00.denominator / (xC - xA)
        area = mpmath.mpf(m00.numerator) / m00.denominator
        S01 = 3 * (mpmath.mpf(m01.numerator) / m01.denominator) / area
        S11 = 12 * (mpmath.mpf(m11.numerator) / m11.denominator) / area
    else:
        xA, xB, xC = xs
        h = 2 * m00 / (xC - xA)
        area = m00
        S01 = 3 * m01 / area
        S11 = 12 * m11 / area
    if not (cA > 0 and sol.amplitudes[2][0] > 0 and sol.amplitudes[1][0] < 0):
        raise BreakpointRecoveryFailed("x-moments are not those of a triangle")
    t = (xB - xA) / (xC - xA)
    Sx = xA + xB + xC
    out = []
    for sign, apex in ((1, "above"), (-1, "below")):
        # unknowns yA, yC with yB = (1 - t) yA + t yC + sign * h
        a11, a12 = 2 - t, 1 + t
        a21, a22 = xA + xB * (1 - t), xC + xB * t
        r1 = S01 - sign * h
        r2 = S11 - Sx * S01 - xB * sign * h
        det = a11 * a22 - a12 * a21
        yA = (r1 * a22 - a12 * r2) / det
        yC = (a11 * r2 - a21 * r1) / det
        yB = (1 - t) * yA + t * yC + sign * h
        verts = [(float(xA), float(yA)), (float(xB), float(yB)), (float(xC), float(yC))]
        out.append({"apex": apex, "vertices": verts})
    return out


def reconstruct_triangle(six: Mapping[str, object], apex: str | None = None,
                         tol: float = 1e-10) -> list[tuple[float, float]]:
    """Vertices (sorted by x) of the triangle with the given six moments.

    The six moments fix the triangle only up to the side of the long edge on
    which the middle vertex sits, so ``apex`` ("above" or "below") selects the
    candidate; without it a unique answer exists only when both coincide.
    """
    cands = triangle_candidates(six, tol)
    if apex is None:
        a, b = (np.array(c["vertices"]) for c in cands)
        if np.max(np.abs(a - b)) <= 1e-9 * (1 + np.max(np.abs(a))):
            return cands[0]["vertices"]
        raise ValidationError("six moments admit two triangles; pass apex='above' or 'below'",
                              candidates=cands)
    for c in cands:
        if c["apex"] == apex:
            return c["vertices"]
    raise ValidationError("apex must be 'above' or 'below'")


def triangle_six_moments(vertices) -> dict:
    G = triangle_domain(vertices)
    m = moments2d(G, 3, 1)
    return {"m00": m(0, 0), "m10": m(1, 0), "m20": m(2, 0), "m30": m(3, 0),
            "m01": m(0, 1), "m11": m(1, 1)}
