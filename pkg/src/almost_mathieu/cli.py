"""Command-line front end: datasets, spot checks, and the verify suite.

Every subcommand writes a single artifact to --output (stdout by default):
CSV with a mandatory header and 17-significant-digit floats, a JSON report
with the fixed envelope {command, config, results, failures, version}, or
an SVG plot for the butterfly.  Outputs are byte-identical for identical
(config, seed) regardless of the parallelism degree; BUTTERFLY_THREADS
sets the default worker count and the --threads flag wins over it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .alpha import construct_alpha, verify_conditions
from .bands import sminus_points, spectral_union_S, spectrum_bands
from .core import OperatorSpec, reduce_fraction
from .experiments import (
    approximant_family,
    box_counting_dimension,
    butterfly_generate,
    measure_decay,
)
from .greens import green_identities_check, lyapunov, surace_deviation
from .interpolation import build_intermediate, green_comparison
from .products import align_phases, product_growth, random_drift_chain
from .verify import SUITE_NAMES, run_suites


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_report(command: str, config: dict, results, failures: list[str]) -> str:
    doc = {
        "command": command,
        "config": config,
        "results": results,
        "failures": failures,
        "version": __version__,
    }
    return json.dumps(doc, indent=2) + "\n"


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for x in row:
            if isinstance(x, float):
                cells.append(_fmt(x))
            else:
                cells.append(str(x))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("BUTTERFLY_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _alpha_arg(args):
    return reduce_fraction(args.p, args.q)


# ---------------------------------------------------------------------------
# subcommands


def cmd_butterfly(args) -> int:
    config = {
        "qmax": args.qmax,
        "lambda": args.lam,
        "theta_mode": args.theta_mode,
        "theta": args.theta,
        "format": args.format,
    }
    ds = butterfly_generate(
        args.qmax,
        args.lam,
        theta_mode=args.theta_mode,
        theta=args.theta,
        max_workers=_threads(args),
    )
    if args.format == "csv":
        _emit(_csv(["p", "q", "band", "lo", "hi"], ds.rows), args.output)
    elif args.format == "svg":
        _emit(_butterfly_svg(ds, args.width, args.height, args.lam), args.output)
    else:
        rows = [
            {"p": p, "q": q, "band": b, "lo": lo, "hi": hi}
            for p, q, b, lo, hi in ds.rows
        ]
        _emit(
            _json_report("butterfly", config, {"rows": rows}, list(ds.failures)),
            args.output,
        )
    return 0 if not ds.failures else 1


def _butterfly_svg(ds, width: int, height: int, lam: float) -> str:
    hull = 2.0 + lam
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    qmax = max((r[1] for r in ds.rows), default=1)
    for p, q, _band, lo, hi in ds.rows:
        x = (lo + hull) / (2.0 * hull) * width
        w = max((hi - lo) / (2.0 * hull) * width, 0.1)
        y = (1.0 - p / q) * height
        h = max(0.25, 0.5 * height / (qmax * qmax))
        lines.append(
            f'<rect x="{x:.4f}" y="{y - h / 2:.4f}" width="{w:.4f}" '
            f'height="{h:.4f}" fill="black"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_bands(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "lambda": args.lam,
        "theta": args.theta,
        "format": args.format,
    }
    spec = OperatorSpec.almost_mathieu(_alpha_arg(args), args.lam, args.theta)
    s = spectrum_bands(spec)
    rows = [(b.index, b.lo, b.hi, b.monotonicity) for b in s.bands]
    if args.format == "csv":
        _emit(_csv(["band", "lo", "hi", "monotonicity"], rows), args.output)
    else:
        _emit(
            _json_report(
                "bands",
                config,
                {
                    "bands": [
                        {"band": i, "lo": lo, "hi": hi, "monotonicity": m}
                        for i, lo, hi, m in rows
                    ],
                    "measure": s.measure,
                },
                [],
            ),
            args.output,
        )
    return 0


def cmd_sminus(args) -> int:
    config = {"p": args.p, "q": args.q, "lambda": args.lam, "format": args.format}
    res = sminus_points(_alpha_arg(args), args.lam)
    if hasattr(res, "energies"):
        rows = [(i + 1, e) for i, e in enumerate(res.energies)]
        results = {"points": [e for e in res.energies]}
    else:
        rows = [(b.index, b.lo, b.hi) for b in res.bands]
        results = {"bands": [{"lo": b.lo, "hi": b.hi} for b in res.bands]}
    if args.format == "csv":
        header = ["index", "energy"] if len(rows[0]) == 2 else ["band", "lo", "hi"]
        _emit(_csv(header, rows), args.output)
    else:
        _emit(_json_report("sminus", config, results, []), args.output)
    return 0


def cmd_lyapunov(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "lambda": args.lam,
        "theta": args.theta,
        "e_re": args.e_re,
        "e_im": args.e_im,
        "grid": args.grid,
        "format": args.format,
    }
    spec = OperatorSpec.almost_mathieu(_alpha_arg(args), args.lam, args.theta)
    if args.grid:
        hull = 2.0 + args.lam
        energies = np.linspace(-hull, hull, args.grid)
        rows = []
        for E in energies:
            v = lyapunov(spec, complex(E, args.e_im))
            rows.append((float(E), args.e_im, v.gamma, v.bloch_k if v.bloch_k is not None else ""))
        if args.format == "csv":
            _emit(_csv(["e_re", "e_im", "gamma", "bloch_k"], rows), args.output)
        else:
            _emit(
                _json_report(
                    "lyapunov",
                    config,
                    {"values": [{"e_re": r[0], "gamma": r[2]} for r in rows]},
                    [],
                ),
                args.output,
            )
    else:
        v = lyapunov(spec, complex(args.e_re, args.e_im))
        _emit(
            _json_report(
                "lyapunov", config, {"gamma": v.gamma, "bloch_k": v.bloch_k}, []
            ),
            args.output,
        )
    return 0


def cmd_green_check(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "lambda": args.lam,
        "theta": args.theta,
        "z_re": args.z_re,
        "z_im": args.z_im,
        "m": args.m,
    }
    spec = OperatorSpec.almost_mathieu(_alpha_arg(args), args.lam, args.theta)
    rep = green_identities_check(spec, complex(args.z_re, args.z_im), args.m)
    results = {
        "factorization_residual": rep.factorization_residual,
        "power_residual": rep.power_residual,
        "l2_sum": rep.l2_sum,
        "l2_identity_residual": rep.l2_identity_residual,
        "l2_bound_ok": rep.l2_bound_ok,
        "ok": rep.ok,
    }
    _emit(_json_report("green-check", config, results, []), args.output)
    return 0 if rep.ok else 1


def cmd_surace(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "lambda": args.lam,
        "theta": args.theta,
        "epsilon": args.epsilon,
        "eta": args.eta,
        "grid_points": args.grid_points,
    }
    spec = OperatorSpec.almost_mathieu(_alpha_arg(args), args.lam, args.theta)
    rep = surace_deviation(spec, args.epsilon, args.eta, args.grid_points)
    results = {
        "measured_measure": rep.measured_measure,
        "bound": rep.bound,
        "slack": rep.slack,
        "ok": rep.ok,
    }
    _emit(_json_report("surace", config, results, []), args.output)
    return 0 if rep.ok else 1


def cmd_product_check(args) -> int:
    config = {
        "count": args.count,
        "n_max": args.n_max,
        "beta": args.beta,
        "seed": args.seed,
    }
    rng = np.random.default_rng(args.seed)
    passed = 0
    for _ in range(args.count):
        n = int(rng.integers(1, args.n_max + 1))
        chain = align_phases(random_drift_chain(rng, n, args.beta))
        if product_growth(chain, args.beta).passed:
            passed += 1
    results = {"count": args.count, "passed": passed}
    ok = passed == args.count
    _emit(_json_report("product-check", config, results, []), args.output)
    return 0 if ok else 1


def cmd_interp_check(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "pt": args.pt,
        "qt": args.qt,
        "delta": args.delta,
        "epsilon": args.epsilon,
        "ctilde": args.ctilde,
        "energy": args.energy,
    }
    ip = build_intermediate(
        reduce_fraction(args.p, args.q),
        reduce_fraction(args.pt, args.qt),
        args.delta,
        ctilde=args.ctilde,
    )
    rep = green_comparison(ip, args.energy, args.epsilon)
    results = {
        "l0": ip.l0,
        "gate_ok": ip.gate_ok,
        "lhs_i": rep.lhs_i,
        "rhs_i": rep.rhs_i,
        "lhs_ii": rep.lhs_ii,
        "rhs_ii": rep.rhs_ii,
        "final_lhs": rep.final_lhs,
        "final_rhs": rep.final_rhs,
        "fitted_cprime": rep.fitted_cprime,
        "window_ok": rep.window_ok,
        "trace_ok": rep.trace_ok,
        "step_i_ok": rep.step_i_ok,
        "final_ok": rep.final_ok,
    }
    _emit(_json_report("interp-check", config, results, []), args.output)
    return 0 if rep.step_i_ok else 1


def cmd_measure_decay(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "delta": args.delta,
        "variant": args.variant,
        "kmin": args.kmin,
        "kmax": args.kmax,
        "format": args.format,
    }
    base = _alpha_arg(args)
    if args.approximants:
        fam = []
        for tok in args.approximants.split(","):
            pp, qq = tok.strip().split("/")
            fam.append(reduce_fraction(int(pp), int(qq)))
    else:
        fam = approximant_family(base, args.kmin, args.kmax)
    rep = measure_decay(base, args.delta, args.variant, fam, max_workers=_threads(args))
    rows = [
        (r.approximant.p, r.approximant.q, r.measure, int(r.gate_ok)) for r in rep.rows
    ]
    if args.format == "csv":
        _emit(_csv(["p", "q", "measure", "gate_ok"], rows), args.output)
    else:
        results = {
            "rows": [
                {"p": p, "q": q, "measure": m, "gate_ok": bool(g)}
                for p, q, m, g in rows
            ],
            "fitted_rate": rep.fitted_rate,
            "fitted_prefactor": rep.fitted_prefactor,
            "r_squared": rep.r_squared,
        }
        _emit(_json_report("measure-decay", config, results, []), args.output)
    return 0


def cmd_dimension(args) -> int:
    config = {
        "p": args.p,
        "q": args.q,
        "lambda": args.lam,
        "scale_min": args.scale_min,
        "scale_max": args.scale_max,
        "nscales": args.nscales,
    }
    s = spectral_union_S(_alpha_arg(args), args.lam)
    scales = list(np.geomspace(args.scale_max, args.scale_min, args.nscales))
    rep = box_counting_dimension(s, scales)
    results = {
        "estimate": rep.estimate,
        "r_squared": rep.r_squared,
        "scales": list(rep.scales),
        "counts": list(rep.counts),
        "set_measure": s.measure,
        "n_bands": len(s.bands),
    }
    _emit(_json_report("dimension", config, results, []), args.output)
    return 0


def cmd_alpha_construct(args) -> int:
    config = {"c": args.c, "jmax": args.jmax}
    cf, cert = construct_alpha(args.c, args.jmax)
    re_cert = verify_conditions(cf, args.c, args.jmax)
    results = {
        "quotients": [str(n) for n in cf.quotients],
        "denominators": [str(c.q) for c in cf.convergents],
        "levels": [
            {
                "j": lev.j,
                "q_j": str(lev.q_j),
                "q_j1": str(lev.q_j1),
                "cond1_margin": lev.cond1_margin,
                "cond2_margin": lev.cond2_margin,
                "cond3a_margin": lev.cond3a_margin,
                "cond3b_margin": lev.cond3b_margin,
                "ok": lev.ok,
            }
            for lev in re_cert.levels
        ],
        "all_ok": re_cert.all_ok,
    }
    _emit(_json_report("alpha-construct", config, results, []), args.output)
    return 0 if re_cert.all_ok else 1


def cmd_verify(args) -> int:
    names = list(SUITE_NAMES) if args.suite == "all" else args.suite.split(",")
    unknown = [n for n in names if n not in SUITE_NAMES]
    if unknown:
        raise ValueError(f"unknown suites: {', '.join(unknown)}")
    config = {"suite": args.suite, "seed": args.seed}
    suites = run_suites(names, args.seed, _threads(args))
    failures = [
        f"{s['name']}:{c['name']}" for s in suites for c in s["checks"] if not c["ok"]
    ]
    for s in suites:
        status = "ok" if s["ok"] else "FAIL"
        print(f"{s['name']}: {status} ({s['passed']} passed, {s['failed']} failed)", file=sys.stderr)
    _emit(_json_report("verify", config, {"suites": suites}, failures), args.output)
    return 0 if not failures else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amo",
        description="Spectral computations for the almost Mathieu operator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, fmt_choices=("json", "csv")):
        sp.add_argument("--output", default=None, help="output path (default stdout)")
        if fmt_choices:
            sp.add_argument("--format", choices=fmt_choices, default=fmt_choices[0])
        sp.add_argument("--threads", type=int, default=None)

    def rational(sp):
        sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--q", type=int, required=True)

    sp = sub.add_parser("butterfly", help="band dataset over all reduced p/q")
    sp.add_argument("--qmax", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sp.add_argument("--theta-mode", choices=("union-S", "fixed-theta"), default="union-S")
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--width", type=int, default=800)
    sp.add_argument("--height", type=int, default=800)
    common(sp, ("csv", "json", "svg"))
    sp.set_defaults(func=cmd_butterfly)

    sp = sub.add_parser("bands", help="band structure of one periodic operator")
    rational(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sp.add_argument("--theta", type=float, default=0.0)
    common(sp)
    sp.set_defaults(func=cmd_bands)

    sp = sub.add_parser("sminus", help="phase-intersection spectrum")
    rational(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    common(sp)
    sp.set_defaults(func=cmd_sminus)

    sp = sub.add_parser("lyapunov", help="Lyapunov exponent at one energy or a grid")
    rational(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--e-re", type=float, default=0.0)
    sp.add_argument("--e-im", type=float, default=0.0)
    sp.add_argument("--grid", type=int, default=0, help="grid size (0 = single energy)")
    common(sp)
    sp.set_defaults(func=cmd_lyapunov)

    sp = sub.add_parser("green-check", help="half-line Green identity residuals")
    rational(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--z-re", type=float, default=0.0)
    sp.add_argument("--z-im", type=float, default=0.5)
    sp.add_argument("--m", type=int, default=2)
    common(sp, None)
    sp.set_defaults(func=cmd_green_check)

    sp = sub.add_parser("surace", help="complexified-energy deviation measure")
    rational(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--grid-points", type=int, default=10001)
    common(sp, None)
    sp.set_defaults(func=cmd_surace)

    sp = sub.add_parser("product-check", help="random hyperbolic-product certificates")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--n-max", type=int, default=100)
    sp.add_argument("--beta", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, None)
    sp.set_defaults(func=cmd_product_check)

    sp = sub.add_parser("interp-check", help="two-scale Green comparison")
    rational(sp)
    sp.add_argument("--pt", type=int, required=True)
    sp.add_argument("--qt", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--ctilde", type=float, default=0.5)
    sp.add_argument("--energy", type=float, default=0.0)
    common(sp, None)
    sp.set_defaults(func=cmd_interp_check)

    sp = sub.add_parser("measure-decay", help="measure of S(p~/q~) inside J_delta")
    rational(sp)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--variant", type=int, choices=(1, 2), default=1)
    sp.add_argument("--kmin", type=int, default=3)
    sp.add_argument("--kmax", type=int, default=15)
    sp.add_argument("--approximants", default=None, help="comma list of p/q")
    common(sp)
    sp.set_defaults(func=cmd_measure_decay)

    sp = sub.add_parser("dimension", help="box-counting dimension of S(p/q, lambda)")
    rational(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sp.add_argument("--scale-min", type=float, default=1e-6)
    sp.add_argument("--scale-max", type=float, default=1e-1)
    sp.add_argument("--nscales", type=int, default=12)
    common(sp, None)
    sp.set_defaults(func=cmd_dimension)

    sp = sub.add_parser("alpha-construct", help="zero-dimension frequency certificate")
    sp.add_argument("--c", type=float, default=10.0)
    sp.add_argument("--jmax", type=int, default=3)
    common(sp, None)
    sp.set_defaults(func=cmd_alpha_construct)

    sp = sub.add_parser("verify", help="run the self-check suites")
    sp.add_argument("--suite", default="all")
    sp.add_argument("--seed", type=int, default=7)
    common(sp, None)
    sp.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        config = {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in ("func",) and not callable(v)
        }
        sys.stdout.write(
            _json_report(args.command, config, {}, [f"{type(exc).__name__}: {exc}"])
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
