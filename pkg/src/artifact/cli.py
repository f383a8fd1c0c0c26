"""Command line interface.

Every subcommand prints JSON to stdout; complex numbers are written as
``{"re": x, "im": y}``.  Exit status is 0 on success, 2 when a
classification is inconclusive and 1 on error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import json
import math
import sys

import numpy as np

from .config import DEFAULT, Config

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


def parse_complex(text: str) -> complex:
    """``"RE,IM"`` or a single real number."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")


def to_jsonable(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit(payload) -> None:
    json.dump(to_jsonable(payload), sys.stdout, indent=2)
    sys.stdout.write("\n")


# -- handlers -----------------------------------------------------------------------

def cmd_ell_eval(args, config: Config) -> int:
    from .kernel import lattice_context, sigma_w, wp, wp_prime, wp_second, zeta_w
    ctx = lattice_context(args.tau, config)
    fn = {"wp": wp, "wpp": wp_prime, "wp2": wp_second, "zeta": zeta_w, "sigma": sigma_w}[args.fn]
    emit({"tau": args.tau, "z": args.z, "fn": args.fn, "value": fn(args.z, ctx),
          "warnings": list(ctx.warnings)})
    return EXIT_OK


def cmd_hecke_eval(args, config: Config) -> int:
    from .hecke import hecke_Z, premodular_Zmk, premodular_Zn000
    out = {"r": args.r, "s": args.s, "tau": args.tau}
    if args.premodular is None:
        out["Z"] = hecke_Z(args.r, args.s, args.tau, config)
    elif args.premodular[0] == "n000":
        if len(args.premodular) != 2:
            raise ValueError("use --premodular n000 N")
        n = int(args.premodular[1])
        out["n"] = n
        out["Z_n000"] = premodular_Zn000(args.r, args.s, args.tau, n, config)
    else:
        k = int(args.premodular[0])
        out["k"] = k
        out["Z_mk"] = premodular_Zmk(args.r, args.s, args.tau, k, config)
    emit(out)
    return EXIT_OK


def cmd_hecke_zero(args, config: Config) -> int:
    from .atlas import find_tau_zero, region_of
    zero = find_tau_zero(args.r, args.s, config=config)
    emit({"r": args.r, "s": args.s, "domain": args.domain,
          "regions": sorted(x.value for x in region_of(args.r, args.s)), "zero": zero})
    return EXIT_OK


def atlas_samples(n: int, config: Config = DEFAULT):
    """Zeros ``tau^(0)(r, s)`` on an ``n x n`` cell-centred grid of Delta0."""
    from .atlas import find_tau_zero, in_delta0
    a = (np.arange(n) + 0.5) / n * 0.5
    rows = []
    for r in a:
        for s in a:
            if not in_delta0(r, s):
                continue
            z = find_tau_zero(float(r), float(s), config=config)
            if z is not None:
                rows.append((float(r), float(s), z.tau_star.real, z.tau_star.imag, z.residual))
    return rows


def write_svg(path: str, points, curves, width: int = 480, im_max: float = 3.0) -> None:
    """Plot of F0 with sampled zeros as dots and curves as polylines."""
    h = int(width * im_max)

    def xy(t):
        return width * t.real, h - width * t.imag

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" '
           f'viewBox="0 0 {width} {h}">',
           f'<rect width="{width}" height="{h}" fill="white"/>']
    th = np.linspace(0, math.pi, 200)
    circ = 0.5 + 0.5 * np.exp(1j * th)
    out.append('<polyline fill="none" stroke="gray" points="'
               + " ".join("%.2f,%.2f" % xy(t) for t in circ) + '"/>')
    for t in points:
        if t.imag <= im_max:
            x, y = xy(t)
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.2" fill="steelblue"/>')
    colors = {1: "crimson", 2: "darkgreen", 3: "darkorange"}
    for i, pts in curves.items():
        pts = [t for t in pts if t.imag <= im_max]
        out.append(f'<polyline fill="none" stroke="{colors.get(i, "black")}" stroke-width="1.5" '
                   'points="' + " ".join("%.2f,%.2f" % xy(t) for t in pts) + '"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def cmd_atlas_sample(args, config: Config) -> int:
    from .atlas import trace_degenerate_curve
    rows = atlas_samples(args.grid, config)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "s", "tau_re", "tau_im", "residual"])
        for row in rows:
            w.writerow([repr(x) for x in row])
    if args.svg:
        curves = {i: trace_degenerate_curve(i, 60).points for i in (1, 2, 3)}
        write_svg(args.svg, [complex(r[2], r[3]) for r in rows], curves)
    emit({"samples": len(rows), "csv": args.out, "svg": args.svg,
          "max_residual": max((r[4] for r in rows), default=None)})
    return EXIT_OK


def cmd_atlas_curve(args, config: Config) -> int:
    from .atlas import trace_degenerate_curve
    tr = trace_degenerate_curve(args.i, args.samples)
    if args.svg:
        write_svg(args.svg, [], {args.i: tr.points})
    emit({"i": args.i, "points": tr.points, "excluded": tr.excluded})
    return EXIT_OK


def cmd_spectral_solve(args, config: Config) -> int:
    from .spectral import classify_point, monodromy_data_from_point, solve_T_from_rs
    sol = solve_T_from_rs(args.r, args.s, args.tau, args.k, config=config)
    if sol is None:
        emit({"r": args.r, "s": args.s, "tau": args.tau, "k": args.k, "solution": None})
        return EXIT_OK
    pts = []
    for P in sol.points:
        cls = classify_point(P)
        entry = {"T": P.T, "C": P.C, "class": cls.tag}
        if cls.tag.value == "completely_reducible":
            data = monodromy_data_from_point(P)
            entry.update(r=data.r, s=data.s, sigma=data.sigma, kappa=data.kappa)
        pts.append(entry)
    emit({"r": args.r, "s": args.s, "tau": args.tau, "k": args.k, "T2": sol.T2,
          "shifted_residual": sol.shifted_residual, "points": pts})
    return EXIT_OK


def cmd_monodromy_verify(args, config: Config) -> int:
    from .ode import verify_unitary
    from .spectral import LameParams, SpectralPoint, classify_point
    params = LameParams.constrained(args.T, args.tau, args.k, config)
    verdict = verify_unitary(params)
    out = {"T": args.T, "tau": args.tau, "k": args.k, "unitary": verdict.unitary,
           "tag": verdict.tag, "t1": verdict.t1, "t2": verdict.t2,
           "commutator": verdict.commutator}
    if verdict.tag.value == "completely_reducible":
        P = SpectralPoint.from_T(args.T, args.tau, args.k, config=config)
        cls = classify_point(P)
        out["predicted"] = {"r": cls.r, "s": cls.s,
                            "t1": 2 * np.cos(2 * np.pi * cls.s),
                            "t2": 2 * np.cos(2 * np.pi * cls.r)}
        out["dets"] = verdict.dets
    emit(out)
    return EXIT_OK


def _read_batch(path: str, default_k: int):
    items = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.replace(";", ",").split(",")]
            tau = complex(float(parts[0]), float(parts[1]))
            k = int(parts[2]) if len(parts) > 2 else default_k
            items.append((tau, k))
    return items


def cmd_classify(args, config: Config) -> int:
    from .classify import classify_torus
    if args.batch:
        items = _read_batch(args.batch, args.k)
    else:
        if args.tau is None:
            raise ValueError("--tau or --batch is required")
        items = [(args.tau, args.k)]
    reports = [classify_torus(tau, k, config) for tau, k in items]
    emit(reports if args.batch else reports[0])
    return EXIT_INCONCLUSIVE if any(r.inconclusive for r in reports) else EXIT_OK


def cmd_obstruction(args, config: Config) -> int:
    from .classify import rectangle_obstruction
    v = rectangle_obstruction(args.m)
    emit({"m": v.m, "holds_plus": v.holds_plus, "holds_minus": v.holds_minus,
          "even_excluded_on_rectangles": v.even_excluded_on_rectangles})
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key = value file with tolerances")
    sub = p.add_subparsers(dest="command", required=True)

    ell = sub.add_parser("ell", help="Weierstrass functions").add_subparsers(dest="action",
                                                                             required=True)
    e = ell.add_parser("eval")
    e.add_argument("--tau", type=parse_complex, required=True)
    e.add_argument("--z", type=parse_complex, required=True)
    e.add_argument("--fn", choices=["wp", "wpp", "wp2", "zeta", "sigma"], default="wp",
                   help="wpp is the first derivative, wp2 the second")
    e.set_defaults(func=cmd_ell_eval)

    hecke = sub.add_parser("hecke", help="Hecke form").add_subparsers(dest="action", required=True)
    h = hecke.add_parser("eval")
    h.add_argument("--r", type=float, required=True)
    h.add_argument("--s", type=float, required=True)
    h.add_argument("--tau", type=parse_complex, required=True)
    h.add_argument("--premodular", nargs="+", metavar="K|n000 N",
                   help="pre-modular form Z^(m_k) for K in 1..3, or n000 N for N in 1..3")
    h.set_defaults(func=cmd_hecke_eval)
    hz = hecke.add_parser("zero")
    hz.add_argument("--r", type=float, required=True)
    hz.add_argument("--s", type=float, required=True)
    hz.add_argument("--domain", choices=["f0"], default="f0")
    hz.set_defaults(func=cmd_hecke_zero)

    atlas = sub.add_parser("atlas", help="zero atlas").add_subparsers(dest="action", required=True)
    a = atlas.add_parser("sample")
    a.add_argument("--grid", type=int, default=20)
    a.add_argument("--out", required=True)
    a.add_argument("--svg")
    a.set_defaults(func=cmd_atlas_sample)
    c = atlas.add_parser("curve")
    c.add_argument("--i", type=int, choices=[1, 2, 3], required=True)
    c.add_argument("--samples", type=int, default=41)
    c.add_argument("--svg")
    c.set_defaults(func=cmd_atlas_curve)

    spectral = sub.add_parser("spectral", help="spectral curve").add_subparsers(
        dest="action", required=True)
    s = spectral.add_parser("solve")
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--tau", type=parse_complex, required=True)
    s.add_argument("--k", type=int, choices=[1, 2, 3], required=True)
    s.set_defaults(func=cmd_spectral_solve)

    mono = sub.add_parser("monodromy", help="ODE monodromy").add_subparsers(dest="action",
                                                                          required=True)
    m = mono.add_parser("verify")
    m.add_argument("--T", type=parse_complex, required=True)
    m.add_argument("--tau", type=parse_complex, required=True)
    m.add_argument("--k", type=int, choices=[1, 2, 3], required=True)
    m.set_defaults(func=cmd_monodromy_verify)

    cl = sub.add_parser("classify", help="classify a torus")
    cl.add_argument("--tau", type=parse_complex)
    cl.add_argument("--k", type=int, choices=[1, 2, 3], default=1)
    cl.add_argument("--batch", help="file with one 'RE,IM[,K]' per line")
    cl.set_defaults(func=cmd_classify)

    ob = sub.add_parser("obstruction", help="rectangle obstruction conditions")
    ob.add_argument("--m", type=lambda t: tuple(int(x) for x in t.split(",")), required=True)
    ob.set_defaults(func=cmd_obstruction)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = Config.from_file(args.config) if args.config else DEFAULT
        return args.func(args, config)
    except Exception as exc:  # reported as JSON, exit status 1
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
