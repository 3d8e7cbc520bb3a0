"""Prony-type solvers: classical, confluent (derivative nodes), and unit-sign.

The model behind all three is

    s_alpha = sum_n sum_j c_{n,j} * (-1)**j * alpha(alpha-1)...(alpha-j+1) * x_n**(alpha-j)

which is the sequence of power moments of sum_n sum_j c_{n,j} delta^{(j)}(x - x_n).
The classical case keeps only j = 0.

Two numeric routes exist.  Exact data (``int``/``Fraction``) goes through
Berlekamp-Massey over the rationals, so the annihilating polynomial and its
multiplicity structure are exact; its roots are then polished in mpmath.
Float data goes through an SVD rank decision on the Hankel matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from . import _linalg
from .errors import (
    AmplitudeNotUnit,
    NodeCollision,
    NonRealNode,
    RankDeficient,
    ResidualTooLarge,
    ValidationError,
)
from .polycore import (
    Polynomial,
    _companion_eigenvalues,
    is_exact_value,
    refine_root,
    squarefree_decomposition,
)

DEFAULT_TOL = 1e-10
GAP_RATIO = 10.0
SIGN_GUARD = 0.1


@dataclass(frozen=True)
class PronyProblem:
    power_data: tuple
    max_nodes: int
    confluency: int = 0

    def __init__(self, power_data: Sequence, max_nodes: int, confluency: int = 0):
        object.__setattr__(self, "power_data", tuple(power_data))
        object.__setattr__(self, "max_nodes", int(max_nodes))
        object.__setattr__(self, "confluency", int(confluency))
        if self.max_nodes < 1:
            raise ValidationError("max_nodes must be positive")
        if self.confluency < 0:
            raise ValidationError("confluency must be nonnegative")

    @property
    def is_exact(self) -> bool:
        return all(is_exact_value(v) for v in self.power_data)


@dataclass(frozen=True)
class PronySolution:
    nodes: tuple
    amplitudes: tuple
    rank: int = 0
    residual: float = 0.0
    multiplicities: tuple = ()
    # nodes carried at working precision when the exact route was taken
    nodes_mp: tuple | None = field(default=None, compare=False, repr=False)

    def __len__(self):
        return len(self.nodes)


def confluent_column(node, j: int, length: int) -> list:
    """Moments of delta^{(j)}(x - node): (-1)**j * alpha^{(j)} * node**(alpha - j)."""
    col = []
    sign = -1 if j % 2 else 1
    for alpha in range(length):
        if alpha < j:
            col.append(0 * node)
            continue
        ff = 1
        for i in range(j):
            ff *= alpha - i
        col.append(sign * ff * node ** (alpha - j))
    return col


def forward(nodes: Sequence, amplitudes: Sequence[Sequence], length: int) -> list:
    """Evaluate the confluent exponential sum for ``alpha < length``."""
    out = [0] * length
    for x, amps in zip(nodes, amplitudes):
        for j, c in enumerate(amps):
            if c == 0:
                continue
            for a, v in enumerate(confluent_column(x, j, length)):
                out[a] += c * v
    return out


def hankel(data: Sequence, rows: int, cols: int) -> list[list]:
    return [[data[i + k] for k in range(cols)] for i in range(rows)]


def hankel_rank(data: Sequence, max_degree: int, tol: float = DEFAULT_TOL) -> int:
    """Rank of the (len - max_degree) x (max_degree + 1) Hankel matrix of ``data``."""
    rows = len(data) - max_degree
    if rows < 1:
        raise ValidationError("not enough data for the requested Hankel size")
    H = hankel(data, rows, max_degree + 1)
    if all(is_exact_value(v) for v in data):
        return _linalg.exact_rank(H)
    return _linalg.float_rank(np.array(H, dtype=float), tol)[0]


def annihilator(data: Sequence, max_degree: int, tol: float = DEFAULT_TOL) -> Polynomial:
    """Minimal monic polynomial p with sum_k p[k] data[i+k] = 0 for all i."""
    if len(data) < 2 * max_degree:
        raise ValidationError(
            f"need at least {2 * max_degree} values for degree {max_degree}, got {len(data)}")
    if all(is_exact_value(v) for v in data):
        p = Polynomial(_linalg.berlekamp_massey(data))
        if p.degree > max_degree:
            raise RankDeficient(
                f"linear complexity {p.degree} exceeds the bound {max_degree}",
                rank=p.degree)
        return p
    arr = np.array([float(v) for v in data])
    rows = len(arr) - max_degree
    H = np.array(hankel(arr, rows, max_degree + 1))
    r, sv = _linalg.float_rank(H, tol)
    if r == 0:
        return Polynomial([1.0])
    if r < len(sv) and sv[r] > 0 and sv[r - 1] / sv[r] < GAP_RATIO:
        raise RankDeficient(
            f"ambiguous Hankel rank: singular value gap {sv[r - 1] / sv[r]:.3g} < {GAP_RATIO}",
            rank=r)
    if r > max_degree:
        raise RankDeficient(f"rank {r} exceeds bound {max_degree}", rank=r)
    Hr = np.array(hankel(arr, len(arr) - r, r + 1))
    _, _, vt = np.linalg.svd(Hr)
    v = vt[-1]
    if abs(v[-1]) < 1e-14 * np.max(np.abs(v)):
        raise RankDeficient("annihilating vector has vanishing leading coefficient", rank=r)
    return Polynomial(v / v[-1])


def _roots_exact(p: Polynomial, tol: float, dps: int):
    """(node_mp, multiplicity) pairs from an exact annihilating polynomial."""
    out = []
    for factor, mult in squarefree_decomposition(p):
        for z in _companion_eigenvalues(factor):
            if abs(z.imag) > max(tol, 1e-9) * (1 + abs(z)):
                raise NonRealNode(f"complex node {z:.6g}", node=complex(z))
            out.append((refine_root(factor, float(z.real), dps), mult))
    out.sort(key=lambda t: t[0])
    return out


def _roots_float(p: Polynomial, tol: float, confluency: int):
    zs = _companion_eigenvalues(p)
    if zs.size == 0:
        return []
    scale = 1.0 + float(np.max(np.abs(zs)))
    # a root of multiplicity m is perturbed by roughly eps**(1/m)
    radius = max(tol, 1e-12) ** (1.0 / (confluency + 1)) * scale
    imag_tol = max(tol * scale, radius if confluency else 0.0)
    for z in zs:
        if abs(z.imag) > imag_tol:
            raise NonRealNode(f"complex node {z:.6g}", node=complex(z))
    groups: list[list[float]] = []
    for x in sorted(float(z.real) for z in zs):
        if groups and x - groups[-1][-1] <= radius:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(sum(g) / len(g), len(g)) for g in groups]


def _amplitudes(nodes, mults, data, confluency, dps):
    if dps is not None:
        with mpmath.workdps(dps):
            return _amplitudes_impl(nodes, mults, data, confluency, dps)
    return _amplitudes_impl(nodes, mults, data, confluency, None)


def _amplitudes_impl(nodes, mults, data, confluency, dps):
    n = len(data)
    cols, index = [], []
    for k, (x, m) in enumerate(zip(nodes, mults)):
        for j in range(m):
            cols.append(confluent_column(x, j, n))
            index.append((k, j))
    amps = [[0.0] * (confluency + 1) for _ in nodes]
    if not cols:
        return amps, max((abs(float(v)) for v in data), default=0.0)
    if dps is not None:
        A = [[cols[c][a] for c in range(len(cols))] for a in range(n)]
        sol, res = _linalg.mp_lstsq(A, data, dps)
        res = float(res)
        for (k, j), c in zip(index, sol):
            amps[k][j] = c
        return amps, res
    A = np.array(cols, dtype=float).T
    b = np.array([float(v) for v in data])
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.max(np.abs(A @ sol - b)))
    for (k, j), c in zip(index, sol):
        amps[k][j] = float(c)
    return amps, res


def _solve(p: PronyProblem, tol: float, dps: int | None) -> PronySolution:
    data = p.power_data
    max_degree = p.max_nodes * (p.confluency + 1)
    if len(data) < 2 * max_degree:
        raise ValidationError(
            f"need {2 * max_degree} data values for {p.max_nodes} nodes of confluency "
            f"{p.confluency}, got {len(data)}")
    if all(v == 0 for v in data):
        return PronySolution((), (), 0, 0.0, ())
    exact = p.is_exact
    ann = annihilator(data, max_degree, tol)
    if exact:
        dps = dps or max(50, len(data))
        roots = _roots_exact(ann, tol, dps)
    else:
        roots = _roots_float(ann, tol, p.confluency)
    if len(roots) > p.max_nodes:
        raise RankDeficient(f"{len(roots)} nodes exceed max_nodes={p.max_nodes}",
                            rank=ann.degree)
    too_high = [m for _, m in roots if m > p.confluency + 1]
    if too_high:
        raise RankDeficient(
            f"node multiplicity {max(too_high)} exceeds confluency {p.confluency} + 1",
            rank=ann.degree)
    nodes = [x for x, _ in roots]
    mults = [m for _, m in roots]
    amps, res = _amplitudes(nodes, mults, data, p.confluency, dps if exact else None)
    scale = max(abs(float(v)) for v in data)
    if res > 10 * tol * scale:
        raise ResidualTooLarge(f"forward residual {res:.3g} exceeds {10 * tol * scale:.3g}",
                               residual=res)
    return PronySolution(
        nodes=tuple(float(x) for x in nodes),
        amplitudes=tuple(tuple(float(c) for c in a) for a in amps),
        rank=ann.degree,
        residual=res,
        multiplicities=tuple(mults),
        nodes_mp=tuple(nodes) if exact else None,
    )


def solve_classical(p: PronyProblem, tol: float = DEFAULT_TOL, *, dps: int | None = None
                    ) -> PronySolution:
    """Solve s_n = sum_j a_j x_j**n for distinct real nodes.

    Amplitudes come back as 1-tuples so classical and confluent solutions share
    a shape.
    """
    if p.confluency != 0:
        raise ValidationError("solve_classical requires confluency 0")
    return _solve(p, tol, dps)


def solve_confluent(p: PronyProblem, tol: float = DEFAULT_TOL, *, dps: int | None = None
                    ) -> PronySolution:
    """Recover nodes and per-node derivative amplitudes c_{n,0..confluency}.

    Confluency 0 is accepted and behaves like :func:`solve_classical`.
    """
    return _solve(p, tol, dps)


def _newton_signed(ys, signs, sums, dps: int):
    """Polish unit-sign Prony nodes against p_1..p_n at ``dps`` digits."""
    n = len(ys)
    with mpmath.workdps(dps + 10):
        y = [mpmath.mpf(v) for v in ys]
        p = [mpmath.mpf(_linalg._mpf_in(v)) for v in sums[:n]]
        scale = max(1, max(abs(v) for v in y))
        for _ in range(60):
            F = mpmath.matrix([mpmath.fsum(s * yi ** m for s, yi in zip(signs, y)) - p[m - 1]
                               for m in range(1, n + 1)])
            J = mpmath.matrix([[s * m * yi ** (m - 1) for s, yi in zip(signs, y)]
                               for m in range(1, n + 1)])
            step = mpmath.lu_solve(J, F)
            y = [yi - step[i] for i, yi in enumerate(y)]
            if mpmath.norm(step, mpmath.inf) <= mpmath.mpf(10) ** (-dps - 3) * scale:
                break
    with mpmath.workdps(dps):
        return [+v for v in y]


def solve_signed(power_sums: Sequence, strips: int, tol: float = DEFAULT_TOL, *,
                 refine_dps: int | None = None) -> list:
    """Boundary ordinates from power sums p_m = sum_l (upper_l**m - lower_l**m).

    ``power_sums`` holds p_1, p_2, ...; p_0 = 0 is implied because the
    amplitudes are +-1 and balanced.  Returns 2*strips sorted values; even
    indices (0-based) are lower boundaries, odd indices upper ones.  With
    ``refine_dps`` the nodes are Newton-polished and returned as mpf.
    """
    if strips < 1:
        raise ValidationError("strips must be >= 1")
    n = 2 * strips
    if len(power_sums) < 2 * n - 1:
        raise ValidationError(f"need p_1..p_{2 * n - 1} for {strips} strip(s)")
    sums = list(power_sums)
    if all(is_exact_value(v) for v in sums):
        data = [0] + sums
    else:
        data = [0.0] + [float(v) for v in sums]
    sol = solve_classical(PronyProblem(data, max_nodes=n), tol)
    if len(sol.nodes) != n:
        raise AmplitudeNotUnit(
            f"found {len(sol.nodes)} boundary values, expected {n}", nodes=sol.nodes)
    signs = []
    for k, (a,) in enumerate(sol.amplitudes):
        expect = -1 if k % 2 == 0 else 1
        if abs(a - expect) > SIGN_GUARD:
            raise AmplitudeNotUnit(
                f"amplitude {a:.6g} at node {sol.nodes[k]:.6g} is not {expect:+d}",
                amplitude=a)
        signs.append(expect)
    ys = list(sol.nodes_mp) if sol.nodes_mp is not None else list(sol.nodes)
    scale = 1.0 + max(abs(float(v)) for v in ys)
    for a, b in zip(ys, ys[1:]):
        if float(b - a) <= tol * scale:
            raise NodeCollision(f"boundary values {float(a):.6g} and {float(b):.6g} coincide")
    if refine_dps is not None:
        ys = _newton_signed(ys, signs, sums, refine_dps)
        return ys
    return [float(v) for v in ys]


def node_distance(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        return math.inf
    return max((abs(x - y) for x, y in zip(sorted(a), sorted(b))), default=0.0)
