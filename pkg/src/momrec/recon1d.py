"""Piecewise-polynomial reconstruction from 1D power moments.

Stage A differentiates N+1 times in the moment domain, which turns g into a
finite sum of delta derivatives sitting on the breakpoints, and recovers those
breakpoints with the confluent Prony solver.  Stage B fixes the breakpoints and
solves the (linear) moment equations for the piece coefficients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _linalg
from .errors import (
    BreakpointRecoveryFailed,
    InsufficientMoments,
    ReconstructionError,
    ResidualTooLarge,
    ValidationError,
)
from .moments1d import MomentTable1D, full_derivative_sequence
from .polycore import PiecewisePolynomial, Polynomial, RealInterval
from .prony import PronyProblem, solve_confluent

log = logging.getLogger(__name__)

MERGE_FRACTION = 1e-6


@dataclass(frozen=True)
class Recon1DConfig:
    max_jumps: int
    max_degree: int
    support_hint: RealInterval | None = None
    tol: float = 1e-10

    def __post_init__(self):
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        if self.max_jumps < 0 or self.max_degree < 0:
            raise ValidationError("max_jumps and max_degree must be nonnegative")


def mu(K: int, N: int) -> int:
    """Minimal moment count for K jumps and piece degree N in the
    piecewise-polynomial case."""
    return max(2 * (N + 1) * K - 2, (K + 1) * (N + 1))


def required_moments(K: int, N: int) -> int:
    """Moments consumed by :func:`reconstruct1d`: a confluent Prony system over
    K+2 nodes of multiplicity N+1, plus one block for the piece solve."""
    return 2 * (K + 2) * (N + 1) + (N + 1)


def working_dps(count: int) -> int:
    return max(50, count)


def reconstruct1d(m: MomentTable1D, cfg: Recon1DConfig, *, keep_precision: bool = False
                  ) -> PiecewisePolynomial:
    """Recover breakpoints and piece coefficients of g from its moments.

    Exact moment tables take the exact/high-precision route throughout; the
    result is returned with float coefficients unless ``keep_precision``.
    """
    if not isinstance(m, MomentTable1D):
        m = MomentTable1D(m)
    K, N = cfg.max_jumps, cfg.max_degree
    need = required_moments(K, N)
    if len(m) < need:
        raise InsufficientMoments(f"need {need} moments for K={K}, N={N}, got {len(m)}",
                                  required=need, got=len(m))
    dps = working_dps(len(m)) if m.is_exact else None
    if dps is None:
        return _reconstruct(m, cfg, None, keep_precision)
    with mpmath.workdps(dps):
        return _reconstruct(m, cfg, dps, keep_precision)


def _reconstruct(m, cfg, dps, keep_precision):
    K, N, tol = cfg.max_jumps, cfg.max_degree, cfg.tol

    # Stage A: breakpoints
    seq = full_derivative_sequence(m, N + 1)
    try:
        sol = solve_confluent(PronyProblem(seq, max_nodes=K + 2, confluency=N), tol, dps=dps)
    except ReconstructionError as exc:
        raise BreakpointRecoveryFailed(f"breakpoint recovery failed: {exc}",
                                       cause=exc.name) from exc
    nodes = list(sol.nodes_mp) if sol.nodes_mp is not None else list(sol.nodes)
    amp_scale = max((abs(float(c)) for a in sol.amplitudes for c in a), default=0.0)
    keep = [i for i, a in enumerate(sol.amplitudes)
            if max(abs(float(c)) for c in a) > tol * amp_scale]
    nodes = [nodes[i] for i in keep]
    if len(nodes) < 2:
        raise BreakpointRecoveryFailed(f"found {len(nodes)} breakpoint(s); need at least 2")
    nodes = _merge_nodes(nodes, MERGE_FRACTION * float(nodes[-1] - nodes[0]))
    if len(nodes) - 2 > K:
        raise BreakpointRecoveryFailed(f"{len(nodes) - 2} interior breakpoints exceed K={K}")
    if cfg.support_hint is not None:
        hint = cfg.support_hint
        slack = 1e-6 * max(1.0, hint.length)
        if abs(float(nodes[0]) - hint.lo) > slack or abs(float(nodes[-1]) - hint.hi) > slack:
            raise BreakpointRecoveryFailed(
                f"recovered support [{float(nodes[0])}, {float(nodes[-1])}] "
                f"disagrees with hint [{hint.lo}, {hint.hi}]")

    # Stage B: piece coefficients
    pieces, res = _solve_pieces(m.values, nodes, N, dps)
    scale = max(abs(float(v)) for v in m.values)
    if res > tol * scale:
        raise ResidualTooLarge(f"piece fit residual {res:.3g} exceeds {tol * scale:.3g}",
                               residual=res)
    log.debug("recon1d: %d breakpoints, stage B residual %.3g", len(nodes), res)
    if keep_precision:
        return PiecewisePolynomial(nodes, pieces)
    return PiecewisePolynomial([float(x) for x in nodes], [p.to_float() for p in pieces])


def _merge_nodes(nodes, radius):
    groups = []
    for x in nodes:
        if groups and float(x - groups[-1][-1]) <= radius:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [sum(g) / len(g) for g in groups]


def _design(values_len, nodes, N, integrals):
    cols = []
    for n in range(len(nodes) - 1):
        ints = integrals(nodes[n], nodes[n + 1], values_len + N + 1)
        for i in range(N + 1):
            cols.append(ints[i:i + values_len])
    return cols


def _solve_pieces(values, nodes, N, dps):
    npieces = len(nodes) - 1
    L = len(values)
    if dps is not None:
        with mpmath.workdps(dps):
            def ints(lo, hi, n):
                out, plo, phi = [], lo, hi
                for k in range(n):
                    out.append((phi - plo) / (k + 1))
                    plo *= lo
                    phi *= hi
                return out
            cols = _design(L, nodes, N, ints)
            A = [[cols[c][a] for c in range(len(cols))] for a in range(L)]
            sol, res = _linalg.mp_lstsq(A, values, dps)
            cscale = max(1, max(abs(c) for c in sol))
            snap = mpmath.mpf(10) ** (-(dps // 2)) * cscale
            sol = [mpmath.mpf(0) if abs(c) < snap else c for c in sol]
            pieces = [Polynomial(sol[n * (N + 1):(n + 1) * (N + 1)]) for n in range(npieces)]
            return pieces, float(res)

    def fints(lo, hi, n):
        k = np.arange(n)
        return list((float(hi) ** (k + 1) - float(lo) ** (k + 1)) / (k + 1))
    cols = _design(L, nodes, N, fints)
    A = np.array(cols, dtype=float).T
    b = np.array([float(v) for v in values])
    # column scaling keeps lstsq well behaved when powers span many decades
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    sol, *_ = np.linalg.lstsq(A / norms, b, rcond=None)
    sol = sol / norms
    res = float(np.max(np.abs(A @ sol - b)))
    pieces = [Polynomial(sol[n * (N + 1):(n + 1) * (N + 1)]) for n in range(npieces)]
    return pieces, res
