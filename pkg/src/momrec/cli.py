"""``momrec`` command line.

Exit status 0 on success, 2 for invalid input, 3 when a reconstruction runs
but fails its own checks.  Failures print one JSON line to stderr naming the
error type.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import io as mio
from .elliptic import reconstruct_elliptic
from .errors import MomrecError, ValidationError
from .invisible import (
    LaurentPolynomial,
    Poly2,
    laurent_invisibility,
    legendre_moments,
    power_moment_scan,
    verify_cc,
    verify_mcc_example,
    wave_invisibility,
)
from .moments1d import moments_pp
from .moments2d import check_relation_43, elliptic_moments, moments2d
from .polycore import Polynomial, RealInterval
from .recon1d import Recon1DConfig, reconstruct1d
from .recon2d import Recon2DConfig, forward_residual, reconstruct2d

log = logging.getLogger("momrec")

INVISIBLE_MODES = ("legendre", "wave", "power-scan", "cc", "mcc", "laurent")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValidationError(f"{args.command} needs " + ", ".join(f"--{n}" for n in missing))


def _emit(args, payload: dict, inputs, params: dict, extra_outputs=()):
    text = mio.dumps(payload) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        mio.write_manifest(args.output, args.command, inputs, params,
                           [args.output, *extra_outputs])
    else:
        sys.stdout.write(text)


# --- subcommands ----------------------------------------------------------

def cmd_moments1d(args):
    _need(args, "domain", "alpha-max")
    g = mio.piecewise_from_json(mio.read_json(args.domain))
    if mio.exact_mode():
        g = g.exact(g.breakpoints, g.pieces)
    m = moments_pp(g, args.alpha_max + 1)
    _emit(args, mio.table1d_to_json(m), [args.domain], {"alpha_max": args.alpha_max})


def cmd_moments2d(args):
    _need(args, "domain", "alpha-max", "beta-max")
    G = mio.domain_from_json(mio.read_json(args.domain))
    if mio.exact_mode():
        G = G.to_exact()
    m = moments2d(G, args.alpha_max, args.beta_max)
    _emit(args, mio.table2d_to_json(m), [args.domain],
          {"alpha_max": args.alpha_max, "beta_max": args.beta_max})


def cmd_recon1d(args):
    _need(args, "moments", "jumps", "piece-degree")
    m = mio.read_table1d(args.moments)
    cfg = Recon1DConfig(args.jumps, args.piece_degree, tol=args.tol)
    g = reconstruct1d(m, cfg)
    outputs = []
    if args.svg:
        Path(args.svg).write_text(mio.piecewise_svg(g))
        outputs.append(args.svg)
    _emit(args, mio.piecewise_to_json(g), [args.moments],
          {"K": args.jumps, "N": args.piece_degree, "tol": args.tol}, outputs)


def cmd_recon2d(args):
    _need(args, "moments", "kappa", "degree")
    m = mio.table2d_from_json(mio.read_json(args.moments))
    cfg = Recon2DConfig(args.kappa, args.degree, tol=args.tol)
    G = reconstruct2d(m, cfg)
    outputs, inputs = [], [args.moments]
    if args.svg:
        truth = None
        if args.truth:
            truth = mio.domain_from_json(mio.read_json(args.truth))
            inputs.append(args.truth)
        Path(args.svg).write_text(mio.domain_svg(G, truth))
        outputs.append(args.svg)
    payload = mio.domain_to_json(G)
    payload["forward_residual"] = forward_residual(G, m)
    _emit(args, payload, inputs,
          {"kappa": args.kappa, "d": args.degree, "tol": args.tol}, outputs)


def cmd_elliptic(args):
    params = {"tol": args.tol, "quad_tol": args.quad_tol}
    if args.coefficients is not None:
        a, b, c, d = args.coefficients
        e = elliptic_moments(a, b, c, d, quad_tol=args.quad_tol)
        _emit(args, {"moments": e.as_dict(), "coefficients": [a, b, c, d]}, [],
              {**params, "coefficients": [a, b, c, d]})
        return
    _need(args, "moments")
    e = mio.read_elliptic(args.moments)
    curve = reconstruct_elliptic(e)
    relation = check_relation_43(e, curve.coefficients)
    _emit(args, {
        "coefficients": {"a": curve.a, "b": curve.b, "c": curve.c, "d": curve.d},
        "oval": [curve.x1, curve.x2],
        "determinant": curve.determinant,
        "condition": curve.condition,
        "relation_residual": relation["max_abs"],
    }, [args.moments], params)


def _poly(v) -> Polynomial:
    if not isinstance(v, list):
        raise ValidationError("polynomials are coefficient lists, lowest degree first")
    return Polynomial([mio.parse_number(c) for c in v])


def _poly2(v) -> Poly2:
    """Bivariate input: list of [i, j, coefficient] triples."""
    try:
        return Poly2({(int(i), int(j)): mio.parse_number(c) for i, j, c in v})
    except (TypeError, ValueError) as exc:
        raise ValidationError("bivariate polynomials are lists of [i, j, coefficient]") from exc


def _interval(v) -> RealInterval:
    lo, hi = (mio.parse_number(x) for x in v)
    return RealInterval(lo, hi)


def _jsonable(v):
    if isinstance(v, Polynomial):
        return list(v.coeffs)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def cmd_invisible(args):
    _need(args, "input")
    spec = mio.read_json(args.input)
    if not isinstance(spec, dict):
        raise ValidationError("invisible input must be a JSON object")
    mode = args.mode
    try:
        if mode == "legendre":
            n, count = int(spec["n"]), int(spec.get("count", int(spec["n"]) + 1))
            m = legendre_moments(n, count, exact=bool(spec.get("exact", True)))
            out = {"n": n, "moments": list(m.values),
                   "vanishing_below_n": all(v == 0 for v in m.values[:n])}
            if m.is_exact:
                out["exact"] = [mio.exact_string(v) for v in m.values]
        elif mode == "wave":
            rect = [[mio.parse_number(x) for x in r] for r in spec["rect"]]
            out = wave_invisibility(_poly2(spec["f"]), rect, tol=spec.get("tol", 1e-12))
        elif mode == "power-scan":
            out = {"moments": power_moment_scan(_poly(spec["P"]), _poly(spec["q"]),
                                                _interval(spec["interval"]), int(spec["k_max"]))}
        elif mode == "cc":
            out = verify_cc(_poly(spec["P"]), _poly(spec["q"]), _poly(spec["W"]),
                            _interval(spec["interval"]), tol=spec.get("tol", 1e-12))
        elif mode == "mcc":
            out = verify_mcc_example(_poly2(spec["P"]), int(spec.get("axis", 1)), _poly(spec["Q"]),
                                     level=int(spec.get("level", 256)), quad_tol=args.quad_tol)
        else:
            terms = {tuple(e) if isinstance(e, list) else e: mio.parse_number(c)
                     for e, c in spec["terms"]}
            out = laurent_invisibility(LaurentPolynomial(terms), int(spec.get("k_max", 8)))
    except KeyError as exc:
        raise ValidationError(f"{mode} input is missing {exc}") from exc
    out = _jsonable(out)
    out["mode"] = mode
    _emit(args, out, [args.input], {"mode": mode, "quad_tol": args.quad_tol})


COMMANDS = {
    "moments1d": cmd_moments1d,
    "moments2d": cmd_moments2d,
    "recon1d": cmd_recon1d,
    "recon2d": cmd_recon2d,
    "elliptic": cmd_elliptic,
    "invisible": cmd_invisible,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="output JSON path (stdout if omitted)")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--quad-tol", type=float, default=1e-12)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="momrec", description="Shape and function reconstruction from moments.")
    p.add_argument("--version", action="version", version=f"momrec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("moments1d", parents=[common], help="moments of a piecewise polynomial")
    s.add_argument("--domain", help="piecewise polynomial JSON")
    s.add_argument("--alpha-max", type=int)

    s = sub.add_parser("moments2d", parents=[common], help="double moments of a domain")
    s.add_argument("--domain", help="domain JSON")
    s.add_argument("--alpha-max", type=int)
    s.add_argument("--beta-max", type=int)

    s = sub.add_parser("recon1d", parents=[common], help="piecewise polynomial from moments")
    s.add_argument("--moments")
    s.add_argument("--jumps", type=int, help="K, bound on interior breakpoints")
    s.add_argument("--piece-degree", type=int, help="N, bound on piece degree")
    s.add_argument("--svg")

    s = sub.add_parser("recon2d", parents=[common], help="domain from double moments")
    s.add_argument("--moments")
    s.add_argument("--kappa", type=int)
    s.add_argument("--degree", type=int)
    s.add_argument("--svg")
    s.add_argument("--truth", help="domain JSON drawn under the reconstruction in the SVG")

    s = sub.add_parser("elliptic", parents=[common], help="cubic curve from seven oval moments")
    s.add_argument("--moments", help="JSON or CSV with m00 m10 m20 m30 m40 m02 m12")
    s.add_argument("--coefficients", type=float, nargs=4, metavar=("A", "B", "C", "D"),
                   help="compute the seven moments of y^2 = a x^3 + b x^2 + c x + d instead")

    s = sub.add_parser("invisible", parents=[common], help="moment-vanishing checks")
    s.add_argument("mode", choices=INVISIBLE_MODES)
    s.add_argument("--input", help="JSON parameters for the chosen mode")
    return p


def _fail(exc: Exception, name: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": name, "message": str(exc)}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except MomrecError as exc:
        return _fail(exc, exc.name, exc.exit_code)
    except (ValueError, ZeroDivisionError) as exc:
        return _fail(exc, "ValidationError", 2)
    except OSError as exc:
        return _fail(exc, "IOError", 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
