"""Command-line interface.

Every command prints one envelope ``{command, inputs, schedule, results,
version}``. Exit status is 0 for a completed analysis (whatever the
verdict), 2 for bad input and 3 for an engine failure. With ``--out`` the
main output goes to that file and each curve is written next to it as a
``T,R_re,R_im`` CSV sidecar.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__, catalog
from .apfun import LimitNotReached, bohr_spectrum_scan, bohr_transform_curve
from .ergodic import NORM, curve_csv, dw_mean, ergodic_curve, theta
from .limits import Schedule, jsonable
from .quadrature import QuadratureError
from .suite import run_suite
from .transforms import ConvolutionRule, composition_check, conv_membership, convolve_trigpoly, kernel_from_text
from .weights import ProbeConfig, Weight, classify_all

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ENGINE = 3


class _InputError(ValueError):
    pass


def _schedule(args) -> Schedule:
    s = Schedule()
    over = {}
    for flag, name in (("T0", "T0"), ("ratio", "ratio"), ("steps", "count"), ("window", "window"),
                       ("tol", "spread_tol")):
        v = getattr(args, flag)
        if v is not None:
            over[name] = v
    return replace(s, **over) if over else s


def _weight(text, flag):
    if text is None:
        raise _InputError(f"{flag} is required")
    return Weight.parse(text)


def _function(args):
    if args.f is None:
        raise _InputError("--f is required")
    return catalog.parse_function(args.f)


# --------------------------------------------------------------------------
# commands: each returns (inputs, results, curves) with curves name -> csv text


def cmd_classify(args, schedule):
    text = args.weight if args.weight is not None else args.mu
    w = _weight(text, "weight")
    rep = classify_all(w, ProbeConfig(schedule=schedule))
    results = {k: (None if v is None else v.to_json()) for k, v in rep.items()}
    results["summary"] = {k: rep[k].verdict for k in ("W", "V", "WInv", "Ws")}
    poly = rep["polynomial"]
    if poly is not None and poly.is_polynomial:
        results["summary"]["polynomial"] = "weight" if poly.is_weight else f"rejected: {poly.reason}"
    return {"weight": w.text}, results, {}


def cmd_dwmean(args, schedule):
    spec = _function(args)
    mu, nu = _weight(args.mu, "--mu"), _weight(args.nu, "--nu")
    res = dw_mean(spec.value, mu, nu, schedule)
    return ({"f": spec.text, "mu": mu.text, "nu": nu.text}, res.to_json(),
            {"mean": res.curve.to_csv()})


def cmd_theta(args, schedule):
    mu, nu = _weight(args.mu, "--mu"), _weight(args.nu, "--nu")
    th = theta(mu, nu, schedule)
    return {"mu": mu.text, "nu": nu.text}, th.to_json(), {"theta": th.curve.to_csv()}


def cmd_spectrum(args, schedule):
    spec = _function(args)
    grid = [float(x) for x in args.grid.split(",") if x.strip()]
    if not grid:
        raise _InputError("--grid needs at least one frequency")
    numeric = args.numeric or not spec.is_trigpoly
    res = bohr_spectrum_scan(spec.value, grid, args.threshold, schedule, numeric=numeric)
    curves = {}
    if numeric:
        for lam in grid:
            c = bohr_transform_curve(spec.value, lam, schedule)
            curves[f"lambda={lam:g}"] = curve_csv(c.T, c.values)
    inputs = {"f": spec.text, "grid": grid, "threshold": args.threshold, "numeric": numeric}
    return inputs, res.to_json(), curves


def cmd_pap0(args, schedule):
    spec = _function(args)
    mu, nu = _weight(args.mu, "--mu"), _weight(args.nu, "--nu")
    curve = ergodic_curve(spec.value, mu, nu, schedule, NORM, kappa=args.kappa)
    results = {"member": curve.verdict.kind == "converges-to-zero", "curve": curve.to_json(points=False)}
    inputs = {"f": spec.text, "mu": mu.text, "nu": nu.text, "kappa": args.kappa}
    return inputs, results, {"pap0": curve.to_csv()}


def cmd_convolve(args, schedule):
    spec = _function(args)
    g = kernel_from_text(args.kernel, args.mass)
    ts = np.array([float(x) for x in args.t.split(",") if x.strip()])
    if ts.size == 0:
        raise _InputError("--t needs at least one point")
    if spec.is_trigpoly:
        exact = convolve_trigpoly(spec.trig, g)
        vals = exact(ts)
        results = {"method": "coefficient-wise", "trigpoly": exact.to_json()}
    else:
        rule = ConvolutionRule(spec.handle, g, args.quad_tol)
        vals = rule.evaluate(ts)
        results = {"method": "quadrature", "panels": rule.panels}
    results["values"] = [{"t": float(t), "re": jsonable(np.real(v)), "im": jsonable(np.imag(v))}
                         for t, v in zip(ts, vals)]
    results["kernel"] = g.to_json()
    curves = {}
    if args.membership:
        mu, nu = _weight(args.mu, "--mu"), _weight(args.nu, "--nu")
        v = conv_membership(spec.value, g, mu, nu, schedule, tol=args.quad_tol)
        results["membership"] = v.to_json()
        curves["membership"] = v.curve.to_csv()
    inputs = {"f": spec.text, "kernel": args.kernel, "mass": args.mass, "t": ts.tolist(),
              "mu": args.mu, "nu": args.nu}
    return inputs, results, curves


def cmd_compose_check(args, schedule):
    mu, nu = _weight(args.mu, "--mu"), _weight(args.nu, "--nu")
    examples = catalog.composition_examples()
    names = [e[0] for e in examples]
    chosen = names if args.example == "all" else [args.example]
    for n in chosen:
        if n not in names:
            raise _InputError(f"unknown example {n!r}; known: {', '.join(names)}")
    results, curves = {}, {}
    for name, F, h1, h2 in examples:
        if name not in chosen:
            continue
        r = composition_check(F, h1, h2, mu, nu, schedule, seed=args.seed)
        results[name] = r.to_json()
        curves[name] = r.remainder.to_csv()
    return {"examples": chosen, "mu": mu.text, "nu": nu.text, "seed": args.seed}, results, curves


def cmd_verify_suite(args, schedule):
    rep = run_suite(schedule, seed=args.seed)
    curves = {}
    for e in rep.entries:
        for inst in e.instances:
            c = inst.evidence.get("curve")
            if isinstance(c, dict) and "T" in c:
                re_ = np.asarray(c["R_re"], dtype=float)
                im_ = np.asarray(c.get("R_im", np.zeros_like(re_)), dtype=float)
                curves[f"{e.theorem_id}.{len(curves)}"] = curve_csv(c["T"], re_ + 1j * im_)
    return {"seed": args.seed}, rep.to_json(), curves


COMMANDS = {
    "classify": cmd_classify,
    "dwmean": cmd_dwmean,
    "theta": cmd_theta,
    "spectrum": cmd_spectrum,
    "pap0": cmd_pap0,
    "convolve": cmd_convolve,
    "compose-check": cmd_compose_check,
    "verify-suite": cmd_verify_suite,
}


# --------------------------------------------------------------------------
# rendering


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and any(isinstance(x, (dict, list)) for x in obj):
        for k, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{k}]")
    else:
        yield prefix, obj


def render(envelope, fmt, curves):
    if fmt == "json":
        return json.dumps(envelope, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        if curves:
            return next(iter(curves.values()))
        buf = io.StringIO()
        buf.write("key,value\n")
        for k, v in _flatten(envelope["results"]):
            buf.write(f"{k},{json.dumps(v)}\n")
        return buf.getvalue()
    lines = [f"{envelope['command']}  (dwpap {envelope['version']})"]
    for k, v in _flatten(envelope["results"]):
        lines.append(f"  {k:<48} {json.dumps(v) if not isinstance(v, str) else v}")
    return "\n".join(lines) + "\n"


def _sidecar_path(out, name):
    stem, _ = os.path.splitext(out)
    safe = "".join(c if c.isalnum() or c in "-_.=" else "_" for c in name)
    return f"{stem}.{safe}.csv"


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", default="1", help="weight mu in the weight DSL (default 1)")
    common.add_argument("--nu", default="1", help="weight nu in the weight DSL (default 1)")
    common.add_argument("--f", help="function spec, e.g. '2+3*cos(t)+@lorentz' or TrigPoly JSON")
    common.add_argument("--kappa", type=float, help="exponent in (0,1) on mu(Q_T)")
    common.add_argument("--T0", type=float, help="first horizon (default 1)")
    common.add_argument("--ratio", type=float, help="geometric horizon ratio (default 1.5)")
    common.add_argument("--steps", type=int, help="number of horizons (default 24)")
    common.add_argument("--window", type=int, help="tail window (default 5)")
    common.add_argument("--tol", type=float, help="tail spread tolerance (default 1e-3)")
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--out", help="write output here and curves to CSV sidecars")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized probes")

    p = argparse.ArgumentParser(prog="dwpap", description="Doubly-weighted ergodic and mean analysis.")
    p.add_argument("--version", action="version", version=f"dwpap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="weight class membership")
    c.add_argument("weight", nargs="?", help="weight text (defaults to --mu)")
    sub.add_parser("dwmean", parents=[common], help="doubly-weighted mean of --f")
    sub.add_parser("theta", parents=[common], help="limit of nu(Q_T)/mu(Q_T)")
    s = sub.add_parser("spectrum", parents=[common], help="Bohr coefficients on a frequency grid")
    s.add_argument("--grid", default="0", help="comma-separated frequencies")
    s.add_argument("--threshold", type=float, default=0.0)
    s.add_argument("--numeric", action="store_true", help="use finite-T averages even for trig polynomials")
    sub.add_parser("pap0", parents=[common], help="membership of --f in the ergodic space")
    v = sub.add_parser("convolve", parents=[common], help="convolution with a catalog kernel")
    v.add_argument("--kernel", default="gauss(1)", help="gauss(sigma), laplace(a) or box(R)")
    v.add_argument("--mass", type=float, default=1.0, help="kernel L1 mass")
    v.add_argument("--t", default="0", help="comma-separated evaluation points")
    v.add_argument("--quad-tol", dest="quad_tol", type=float, default=1e-6)
    v.add_argument("--membership", action="store_true", help="also judge membership of the convolution")
    k = sub.add_parser("compose-check", parents=[common], help="Lipschitz composition remainder bound")
    k.add_argument("--example", default="all", help="built-in example name or 'all'")
    sub.add_parser("verify-suite", parents=[common], help="run the built-in verification suite")
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        schedule = _schedule(args)
        if args.kappa is not None and not (0.0 < args.kappa < 1.0):
            raise _InputError(f"--kappa must lie in (0, 1), got {args.kappa}")
        if args.out and not os.path.isdir(os.path.dirname(os.path.abspath(args.out))):
            raise _InputError(f"--out directory does not exist: {args.out}")
        inputs, results, curves = COMMANDS[args.command](args, schedule)
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"dwpap: input error: {msg}", file=stderr)
        return EXIT_INPUT
    except (QuadratureError, LimitNotReached, ArithmeticError, RuntimeError) as exc:
        print(f"dwpap: engine failure: {exc}", file=stderr)
        return EXIT_ENGINE
    envelope = {
        "command": args.command,
        "inputs": jsonable(inputs),
        "schedule": schedule.to_json(),
        "results": jsonable(results),
        "version": __version__,
    }
    text = render(envelope, args.format, curves)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        for name, csv in curves.items():
            with open(_sidecar_path(args.out, name), "w") as fh:
                fh.write(csv)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
