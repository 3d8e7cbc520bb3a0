"""File formats: stable JSON, the domain/moment/piecewise schemas, CSV for the
seven elliptic moments, run manifests and SVG plots.

Numbers in input files may be JSON numbers or rational strings such as "1/3".
Integers and rational strings stay exact; JSON floats become floats unless
MOMREC_EXACT=1, in which case they are read as the exact binary fractions they
denote.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import mpmath
import numpy as np

from . import __version__
from .errors import InvalidDomain, InvalidMoments, ValidationError
from .moments1d import MomentTable1D
from .moments2d import ELLIPTIC_KEYS, DomainInterval, DomainSpec, EllipticMoments, MomentTable2D, Strip
from .polycore import PiecewisePolynomial, Polynomial

MANIFEST_SCHEMA = "momrec.run/1"


def exact_mode() -> bool:
    return os.environ.get("MOMREC_EXACT", "") == "1"


# --- stable JSON -------------------------------------------------------------

def _num(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (Fraction, mpmath.mpf, np.floating, float)):
        return float(v)
    return v


def dumps(obj: Any) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    out = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj, out):
    obj = _num(obj)
    if isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj, key=str)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)) + ": ")
            _emit(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, float):
        out.append(format(obj, ".17g") if math.isfinite(obj) else "null")
    else:
        out.append(json.dumps(obj))


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path) -> Any:
    try:
        text = Path(path).read_text() if str(path) != "-" else sys.stdin.read()
        return json.loads(text)
    except FileNotFoundError as exc:
        raise ValidationError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc


# --- numbers -----------------------------------------------------------------

def parse_number(v):
    if isinstance(v, bool):
        raise ValidationError(f"expected a number, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValidationError("non-finite number in input")
        return Fraction(v) if exact_mode() else v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {v!r}") from exc
    raise ValidationError(f"expected a number, got {type(v).__name__}")


def exact_string(v) -> str:
    f = Fraction(v)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _coeffs(raw, what):
    if not isinstance(raw, list):
        raise ValidationError(f"{what} must be a list of coefficients")
    return Polynomial([parse_number(c) for c in raw])


def _poly_out(p: Polynomial) -> list:
    return list(p.coeffs) or [0]


# --- domains ------------------------------------------------------------------

def domain_from_json(obj) -> DomainSpec:
    try:
        ivs = []
        for iv in obj["intervals"]:
            strips = [Strip(_coeffs(s["lower"], "lower"), _coeffs(s["upper"], "upper"))
                      for s in iv["strips"]]
            ivs.append(DomainInterval(parse_number(iv["x_min"]), parse_number(iv["x_max"]), strips))
    except (KeyError, TypeError) as exc:
        raise InvalidDomain(f"malformed domain JSON: missing {exc}") from exc
    return DomainSpec(ivs)


def domain_to_json(G: DomainSpec) -> dict:
    return {"intervals": [
        {"x_min": iv.x_min, "x_max": iv.x_max,
         "strips": [{"lower": _poly_out(s.lower), "upper": _poly_out(s.upper)} for s in iv.strips]}
        for iv in G.intervals]}


# --- moment tables --------------------------------------------------------

def table2d_to_json(m: MomentTable2D) -> dict:
    out = {"alpha_max": m.alpha_max, "beta_max": m.beta_max,
           "values": [[float(v) for v in r] for r in m.rows]}
    if m.is_exact:
        out["exact"] = [[exact_string(v) for v in r] for r in m.rows]
    return out


def table2d_from_json(obj) -> MomentTable2D:
    try:
        rows = obj["exact"] if "exact" in obj else obj["values"]
        A, B = obj.get("alpha_max"), obj.get("beta_max")
    except (KeyError, TypeError, AttributeError) as exc:
        raise InvalidMoments("moment JSON needs a 'values' array") from exc
    m = MomentTable2D([[parse_number(v) for v in r] for r in rows])
    if (A is not None and A != m.alpha_max) or (B is not None and B != m.beta_max):
        raise InvalidMoments(f"declared alpha_max/beta_max ({A}, {B}) disagree with the values "
                             f"({m.alpha_max}, {m.beta_max})")
    return m


def table1d_to_json(m: MomentTable1D) -> dict:
    out = {"count": len(m), "values": [float(v) for v in m.values]}
    if m.is_exact:
        out["exact"] = [exact_string(v) for v in m.values]
    return out


def table1d_from_json(obj) -> MomentTable1D:
    try:
        vals = obj["exact"] if "exact" in obj else obj["values"]
    except (KeyError, TypeError) as exc:
        raise InvalidMoments("moment JSON needs a 'values' array") from exc
    if not vals:
        raise InvalidMoments("empty moment list")
    return MomentTable1D([parse_number(v) for v in vals])


def read_table1d(path) -> MomentTable1D:
    """1D moments from JSON ({"values": [..]}) or CSV with one value per line."""
    if not str(path).endswith(".csv"):
        return table1d_from_json(read_json(path))
    try:
        text = Path(path).read_text()
    except FileNotFoundError as exc:
        raise ValidationError(f"input file not found: {path}") from exc
    vals = [line.split(",")[0].strip() for line in text.splitlines() if line.strip()]
    if not vals:
        raise InvalidMoments("empty moment list")
    out = []
    for v in vals:
        try:
            num = float(v) if any(ch in v for ch in ".eE") and "/" not in v else v
        except ValueError as exc:
            raise InvalidMoments(f"not a number: {v!r}") from exc
        out.append(parse_number(num))
    return MomentTable1D(out)


def piecewise_from_json(obj) -> PiecewisePolynomial:
    try:
        return PiecewisePolynomial([parse_number(x) for x in obj["breakpoints"]],
                                   [_coeffs(p, "piece") for p in obj["pieces"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed piecewise JSON: missing {exc}") from exc


def piecewise_to_json(g: PiecewisePolynomial) -> dict:
    return {"breakpoints": list(g.breakpoints), "pieces": [_poly_out(p) for p in g.pieces]}


# --- elliptic input ---------------------------------------------------------

def read_elliptic(path) -> EllipticMoments:
    """Seven moments from JSON ({"m00": ..}) or CSV.

    CSV may be ``key,value`` lines, a header row of keys over a value row, or a
    single row of the seven values in the order m00 m10 m20 m30 m40 m02 m12.
    """
    text = Path(path).read_text() if str(path) != "-" else sys.stdin.read()
    if str(path).endswith(".json") or text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidMoments(f"{path}: malformed JSON") from exc
    else:
        rows = [[c.strip() for c in r] for r in csv.reader(_io.StringIO(text)) if any(c.strip() for c in r)]
        if rows and all(len(r) == 2 and r[0] in ELLIPTIC_KEYS for r in rows):
            raw = {k: v for k, v in rows}
        elif len(rows) == 2 and set(rows[0]) == set(ELLIPTIC_KEYS):
            raw = dict(zip(rows[0], rows[1]))
        elif len(rows) == 1 and len(rows[0]) == 7:
            raw = dict(zip(ELLIPTIC_KEYS, rows[0]))
        else:
            raise InvalidMoments(f"{path}: cannot find the seven moments {', '.join(ELLIPTIC_KEYS)}")
    missing = [k for k in ELLIPTIC_KEYS if k not in raw]
    if missing:
        raise InvalidMoments(f"missing moments: {', '.join(missing)}")
    vals = {}
    for k in ELLIPTIC_KEYS:
        v = raw[k]
        try:
            vals[k] = float(Fraction(v)) if isinstance(v, str) else float(v)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InvalidMoments(f"{k}: not a number ({v!r})") from exc
    return EllipticMoments(**vals)


# --- manifest -----------------------------------------------------------------

def write_manifest(out_path, subcommand: str, inputs, parameters: dict, outputs) -> Path:
    path = Path(f"{out_path}.manifest.json")
    write_json(path, {
        "schema": MANIFEST_SCHEMA,
        "version": __version__,
        "subcommand": subcommand,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "parameters": parameters,
        "exact_mode": exact_mode(),
    })
    return path


# --- SVG -------------------------------------------------------------------

SVG_SIZE = 512
_MARGIN = 48


def _domain_polylines(G: DomainSpec, per_interval: int = 64):
    """Closed outline of every strip, as lists of (x, y)."""
    lines = []
    for iv in G.intervals:
        xs = np.linspace(float(iv.x_min), float(iv.x_max), per_interval)
        for s in iv.strips:
            lo = [(x, float(s.lower(x))) for x in xs]
            up = [(x, float(s.upper(x))) for x in xs[::-1]]
            lines.append(lo + up + [lo[0]])
    return lines


def svg_plot(curves: list[tuple[str, list[list[tuple[float, float]]]]], title: str = "") -> str:
    """512x512 SVG of named polyline groups with annotated axes."""
    pts = [p for _, group in curves for line in group for p in line]
    if not pts:
        raise ValidationError("nothing to plot")
    xs, ys = zip(*pts)
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-12)
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    x0, x1, y0, y1 = cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2
    inner = SVG_SIZE - 2 * _MARGIN

    def X(x):
        return _MARGIN + (x - x0) / span * inner

    def Y(y):
        return SVG_SIZE - _MARGIN - (y - y0) / span * inner

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    dashes = ["", ' stroke-dasharray="6,4"', "", ""]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
             f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
             f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>']
    lo, hi = _MARGIN, SVG_SIZE - _MARGIN
    parts.append(f'<line x1="{lo}" y1="{hi}" x2="{hi}" y2="{hi}" stroke="black"/>')
    parts.append(f'<line x1="{lo}" y1="{lo}" x2="{lo}" y2="{hi}" stroke="black"/>')
    for k in range(5):
        t = k / 4
        xv, yv = x0 + t * span, y0 + t * span
        px, py = lo + t * inner, hi - t * inner
        parts.append(f'<text x="{px:.1f}" y="{hi + 16}" font-size="11" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{lo - 6}" y="{py + 4:.1f}" font-size="11" text-anchor="end">{yv:.3g}</text>')
    parts.append(f'<text x="{SVG_SIZE / 2}" y="{SVG_SIZE - 8}" font-size="12" text-anchor="middle">x</text>')
    parts.append(f'<text x="12" y="{SVG_SIZE / 2}" font-size="12">y</text>')
    if title:
        parts.append(f'<text x="{SVG_SIZE / 2}" y="20" font-size="13" text-anchor="middle">{title}</text>')
    for i, (name, group) in enumerate(curves):
        color = colors[i % len(colors)]
        for line in group:
            path = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in line)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"{dashes[i % len(dashes)]}/>')
        parts.append(f'<text x="{SVG_SIZE - _MARGIN}" y="{20 + 14 * (i + 1)}" font-size="11" '
                     f'text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def domain_svg(reconstructed: DomainSpec, truth: DomainSpec | None = None) -> str:
    curves = []
    if truth is not None:
        curves.append(("truth", _domain_polylines(truth.to_float())))
    curves.append(("reconstruction", _domain_polylines(reconstructed.to_float())))
    return svg_plot(curves, "domain reconstruction")


def piecewise_svg(g: PiecewisePolynomial, truth: PiecewisePolynomial | None = None) -> str:
    def sample(h):
        h = h.to_float()
        line = []
        for lo, hi, p in h.intervals():
            for x in np.linspace(lo, hi, 64):
                line.append((float(x), float(p(x))))
        return [line]
    curves = ([("truth", sample(truth))] if truth is not None else []) + [("reconstruction", sample(g))]
    return svg_plot(curves, "piecewise reconstruction")
