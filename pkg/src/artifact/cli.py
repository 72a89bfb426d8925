"""Command-line front end.

Curves go out as CSV (header row, 17 significant digits, '.' decimals),
structured results as JSON with one document per line.  Exit codes: 0 on
success, 1 when a verification case fails, 2 on usage or domain errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from contextlib import contextmanager
from typing import IO, Iterator, Sequence

import numpy as np

from . import fastest_saturated as fs
from . import kernels, optimal_candidate, perturbation, spectral, spiral_rde, tent, verifier

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MIN_RESOLUTION = 16


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def parse_range(text: str) -> tuple[float, float]:
    """'a:b' with a < b."""
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"bad range {text!r}, expected a:b") from None
    if not lo < hi:
        raise UsageError(f"range {text!r} is not increasing")
    return lo, hi


@contextmanager
def _sink(path: str | None) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(out: IO[str], header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(v) for v in row])


def _write_json(out: IO[str], doc: dict) -> None:
    out.write(json.dumps(doc) + "\n")


def _grid(args) -> np.ndarray:
    lo, hi = parse_range(args.range)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    return np.linspace(lo, hi, args.n)


# subcommands


def cmd_constants(args, out) -> int:
    c = spectral.critical_constants()
    vals = {
        "alpha_bar": c.alpha_bar,
        "sigma_bar": c.sigma_bar,
        "c_bar": c.c_bar,
        "theta_hat": perturbation.hat_theta(),
        "period": c.period,
        "K_tent": tent.k_tent(),
        "K_asympt": fs.k_asympt(),
    }
    if args.format == "json":
        _write_json(out, vals)
    else:
        for k, v in vals.items():
            out.write(f"{k}={v:.6g}\n")
    return EXIT_OK


def cmd_eigen(args, out) -> int:
    es = spectral.complex_eigenvalues(args.a, args.kmax)
    rows = [(x, 0.0) for x in es.real_roots] + list(es.complex_roots)
    _write_csv(out, ["re", "im"], list(zip(*rows)) if rows else [[], []])
    return EXIT_OK


def cmd_kernel(args, out) -> int:
    x = _grid(args)
    which = args.which
    if which == "g":
        y = kernels.eval_g(x)
    elif which == "G":
        y = kernels.eval_G(x)
    elif which == "m":
        t1, t2 = fs.base_shifts() if args.tau1 is None else (args.tau1, args.tau2)
        y = kernels.eval_m(x, t1, t2)
    elif which == "M":
        k = fs.crit()
        p1, p2 = (args.tau1 * k.P, args.tau2 * k.P) if args.tau1 is not None else tuple(s * k.P for s in fs.base_shifts())
        y = kernels.eval_M(x, p1, p2)
    else:
        y = kernels.eval_primitives(x, args.primitive)
    _write_csv(out, ["x", which], [x, np.asarray(y)])
    return EXIT_OK


def _read_control(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV phi,beta (header optional)."""
    try:
        data = np.genfromtxt(path, delimiter=",", names=None, comments="#")
    except OSError as exc:
        raise UsageError(str(exc)) from None
    data = np.atleast_2d(data)
    data = data[~np.isnan(data).any(axis=1)]
    if data.shape[1] != 2 or len(data) < 2:
        raise UsageError("control file needs rows phi,beta")
    phi, beta = data[:, 0], data[:, 1]
    if np.any(np.diff(phi) <= 0):
        raise UsageError("control angles must increase")
    if np.any((beta <= 0) | (beta >= math.pi / 2)):
        raise UsageError("control beta must lie in (0, pi/2)")
    return phi, beta


def cmd_spiral(args, out) -> int:
    if args.kind == "saturated":
        tr = spiral_rde.saturated_trace(args.alpha, args.phi_end, args.samples)
        out.write(tr.to_csv())
        return EXIT_OK
    if args.kind == "fastest":
        x = _grid(args)
        _write_csv(out, ["phi", "r"], [x, np.asarray(fs.fastest_ray(x, args.radius))])
        return EXIT_OK
    if args.file is None:
        raise UsageError("spiral control needs a file of phi,beta rows")
    phi_c, beta_c = _read_control(args.file)
    beta = lambda p: float(np.interp(p, phi_c, beta_c))
    sol = spiral_rde.solve_rde_steps(
        spiral_rde.PiecewiseCurve.zero(), beta, spiral_rde.saturated_source(), args.phi_end, args.step
    )
    _write_csv(out, ["phi", "r"], [sol.nodes, sol.r_right])
    return EXIT_OK


def cmd_perturb(args, out) -> int:
    if args.kind == "segment" and args.dphi:
        raise UsageError("--dphi applies to arc perturbations only")
    src = perturbation.sources(args.kind, args.theta, args.dphi or 0.0)
    tau = _grid(args)
    _write_csv(out, ["tau", "delta_rho"], [tau, np.asarray(perturbation.delta_rho(tau, src))])
    return EXIT_OK


def cmd_tent(args, out) -> int:
    if args.action == "bounds":
        angle, rounds = tent.tent_reach_bound()
        _write_json(
            out,
            {
                "K_tent": tent.k_tent(),
                "reach_angle": angle,
                "reach_rounds": rounds,
                "point_base_ell0_factor": tent.point_base_ell0_factor(),
                "point_base_excess": tent.point_base_excess(),
            },
        )
        return EXIT_OK
    g = tent.tent_solve(args.r0, args.L, args.dq_theta, args.dq_perp)
    _write_json(
        out,
        {
            "ell_hat_0": g.ell_hat_0,
            "r_hat_2": g.r_hat_2,
            "ell_hat_1": g.ell_hat_1,
            "saturation_residual": g.saturation_residual,
            "admissible": tent.tent_admissible(args.L, args.r0) if args.r0 > 0 else None,
        },
    )
    return EXIT_OK


def cmd_optimal(args, out) -> int:
    plan = optimal_candidate.r_opt(args.phibar)
    doc = json.loads(plan.to_json())
    doc["fastest_saturated"] = float(fs.fastest_ray(args.phibar, 0.0))
    _write_json(out, doc)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.resolution < MIN_RESOLUTION:
        raise UsageError(f"--resolution must be >= {MIN_RESOLUTION}")
    specs = verifier.select(args.filter)
    if not specs:
        raise UsageError(f"no case matches {args.filter!r}")
    ok = True
    for spec in specs:
        rep = verifier.grid_scan(spec, args.resolution, args.threads)
        _write_json(out, rep.to_dict(timing=not args.no_timing))
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description="Fire-spiral barrier computations.")
    ap.add_argument("-o", "--output", help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("constants", help="critical angle, rate and tent constants")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("eigen", help="roots of lambda + exp(-lambda) = a")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=5)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("kernel", help="kernel curves g, m, G, M or the primitives")
    p.add_argument("which", choices=("g", "m", "G", "M", "prim"))
    p.add_argument("--range", default="0:5", help="a:b")
    p.add_argument("--n", type=int, default=501)
    p.add_argument("--tau1", type=float, help="m/M window start (rescaled)")
    p.add_argument("--tau2", type=float, help="m/M window end (rescaled)")
    p.add_argument("--primitive", choices=("calG", "gfrak", "frakG"), default="gfrak")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("spiral", help="saturated, fastest-saturated or controlled spiral")
    p.add_argument("kind", choices=("saturated", "fastest", "control"))
    p.add_argument("file", nargs="?", help="phi,beta CSV for 'control'")
    p.add_argument("--alpha", type=float, default=fs.crit().alpha)
    p.add_argument("--radius", type=float, default=0.0)
    p.add_argument("--range", default="0:30", help="a:b angles for 'fastest'")
    p.add_argument("--n", type=int, default=1001)
    p.add_argument("--phi-end", type=float, default=30.0)
    p.add_argument("--samples", type=int, default=1024, help="samples per round for 'saturated'")
    p.add_argument("--step", type=float, default=1e-2)
    p.set_defaults(func=cmd_spiral)

    p = sub.add_parser("perturb", help="rescaled ray perturbation delta rho(tau)")
    p.add_argument("kind", choices=("segment", "arc"))
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--dphi", type=float, default=None)
    p.add_argument("--range", default="0:5")
    p.add_argument("--n", type=int, default=501)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("tent", help="tent closing geometry")
    p.add_argument("action", choices=("solve", "bounds"))
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--L", type=float, default=0.0)
    p.add_argument("--dq-theta", type=float, default=0.0)
    p.add_argument("--dq-perp", type=float, default=0.0)
    p.set_defaults(func=cmd_tent)

    p = sub.add_parser("optimal", help="optimal candidate plan at a final angle")
    p.add_argument("--phibar", type=float, required=True)
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("verify", help="run the registered grid-scan cases")
    p.add_argument("--filter", default=None)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--no-timing", action="store_true", help="omit wall times for byte-stable output")
    p.set_defaults(func=cmd_verify)
    return ap


def _join_range(argv: Sequence[str]) -> list[str]:
    # "--range -1:0" would otherwise read -1:0 as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--range":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--range={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = ap.parse_args(_join_range(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with _sink(args.output) as out:
            return args.func(args, out)
    except (UsageError, spectral.DomainError, ValueError) as exc:
        print(f"artifact {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
