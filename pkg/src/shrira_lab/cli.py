"""Command-line runner: ``shrira-lab <subcommand> [options]``.

Each invocation writes ``<output-dir>/<subcommand>-<timestamp>/`` holding
``manifest.json`` (argv, resolved options, seed, version, creation time) and
the subcommand's report files, then prints a one-line JSON summary.

Exit codes: 0 success, 1 probe ceiling breached, 2 usage or configuration
error, 3 numerical failure (blow-up, unresolved quadrature).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import re
import sys
from typing import Callable

import numpy as np

from . import __version__
from . import arith
from . import bona_smith as bs
from . import dyadic
from . import estimates as es
from . import spectral_core as sc
from .solver import BlowUpError, SolveConfig, existence_time, solve_ivp
from .spectral_core import GridSpec, SpectralField
from .spf2 import SPF2FormatError, load_field, save_field

EXIT_OK, EXIT_BREACH, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- initial conditions

_MODE_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*=\s*([^,()]+)")


def _parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot parse complex value {text!r} (use e.g. 1.5-2i)") from None


def parse_ic(text: str, grid: GridSpec, s: float = 2.0) -> SpectralField:
    """Build an initial field from the mini-language.

    ``random:s=<decay>:seed=<k>[:norm=<v>]``
        smooth random data, x-mean-zero, inside the dealiasing band; with
        ``norm`` rescaled so that ||u||_{H^s} = v.
    ``modes:(m,n)=re+imi,...``
        listed coefficients, Hermitian partners completed.
    ``file:<path>``
        an SPF2 file (its own grid is used).
    """
    kind, _, rest = text.partition(":")
    if kind == "random":
        opts = {}
        for part in filter(None, rest.split(":")):
            key, eq, val = part.partition("=")
            if not eq:
                raise UsageError(f"random IC option {part!r} must look like key=value")
            opts[key] = val
        unknown = set(opts) - {"s", "seed", "norm"}
        if unknown:
            raise UsageError(f"unknown random IC options {sorted(unknown)}; allowed: s, seed, norm")
        try:
            decay = float(opts.get("s", "2"))
            seed = int(opts.get("seed", "0"))
            norm = float(opts["norm"]) if "norm" in opts else None
        except ValueError as exc:
            raise UsageError(f"bad random IC value: {exc}") from None
        rng = np.random.default_rng(seed)
        u = sc.random_field(grid, decay, rng, mean_zero_x=True, band=grid.dealias_mask())
        if norm is not None:
            if norm < 0:
                raise UsageError("norm must be >= 0")
            cur = sc.sobolev_norm(u, s)
            u = u * (norm / cur) if cur > 0 else u
        return u
    if kind == "modes":
        items = [((int(m), int(n)), _parse_complex(v)) for m, n, v in _MODE_RE.findall(rest)]
        leftover = _MODE_RE.sub("", rest).replace(",", "").strip()
        if leftover:
            raise UsageError(f"cannot parse modes list near {leftover!r}")
        return sc.synthesize(items, grid)
    if kind == "file":
        if not rest:
            raise UsageError("file IC needs a path: file:<path>")
        return load_field(rest, grid.oversample)
    raise UsageError(f"unknown IC kind {kind!r}; expected random:, modes: or file:")


# ---------------------------------------------------------------- run directories


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")


def _make_run_dir(base: str, cmd: str) -> str:
    os.makedirs(base, exist_ok=True)
    stamp = _timestamp()
    path = os.path.join(base, f"{cmd}-{stamp}")
    n = 1
    while os.path.exists(path):
        path = os.path.join(base, f"{cmd}-{stamp}-{n}")
        n += 1
    os.makedirs(path)
    return path


def _write_manifest(run_dir: str, argv: list[str], args: argparse.Namespace) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "schema": "shrira-lab/manifest-v1",
        "command": args.command,
        "argv": list(argv),
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)


def _write_report(run_dir: str, rep: es.ProbeReport, fmt: str, name: str = "report") -> None:
    if fmt in ("json", "both"):
        with open(os.path.join(run_dir, f"{name}.json"), "w") as fh:
            fh.write(rep.to_json())
    if fmt in ("csv", "both"):
        with open(os.path.join(run_dir, f"{name}.csv"), "w") as fh:
            fh.write(rep.to_csv())


def _write_rows(run_dir: str, rows: list[dict], fmt: str, name: str = "rows") -> None:
    if fmt in ("json", "both"):
        with open(os.path.join(run_dir, f"{name}.json"), "w") as fh:
            json.dump({"schema": es.REPORT_SCHEMA, "rows": es._jsonable(rows)}, fh, indent=2, sort_keys=True)
    if fmt in ("csv", "both") and rows:
        keys = list(rows[0])
        with open(os.path.join(run_dir, f"{name}.csv"), "w") as fh:
            fh.write(",".join(keys) + "\n")
            for r in rows:
                fh.write(",".join(repr(r[k]) for k in keys) + "\n")


def _report_summary(rep: es.ProbeReport) -> dict:
    out = {"estimate_id": rep.estimate_id, "fitted_constant": rep.fitted_constant, "passed": rep.passed}
    if rep.slope_fit is not None:
        out["slope"] = rep.slope_fit["exponent"]
    return out


# ---------------------------------------------------------------- validation helpers


def _grid(args) -> GridSpec:
    try:
        return GridSpec.square(args.grid, args.oversample)
    except ValueError as exc:
        raise UsageError(f"--grid/--oversample: {exc}") from None


def _positive(name: str, v: float) -> None:
    if not (v > 0 and math.isfinite(v)):
        raise UsageError(f"{name} must be positive and finite, got {v}")


# ---------------------------------------------------------------- subcommands


def cmd_solve(args, run_dir) -> tuple[dict, int]:
    grid = _grid(args)
    u0 = parse_ic(args.ic, grid, args.s)
    T = args.T if args.T is not None else existence_time(u0, args.s, args.A_s)
    _positive("--dt", args.dt)
    _positive("--T", T)
    cfg = SolveConfig(
        dt=args.dt, T=T, integrator=args.integrator, dealias=not args.no_dealias, s=args.s,
        record_stride=args.record_stride, c_cfl=args.c_cfl,
    )
    traj = solve_ivp(u0, cfg)
    traj.export(run_dir)
    d = traj.diagnostics
    return {
        "steps": cfg.n_steps,
        "T": T,
        "snapshots": len(traj.states),
        "l2_drift": abs(d["l2"][-1] - d["l2"][0]) / d["l2"][0] if d["l2"][0] else 0.0,
        "hs_final": d["hs"][-1],
    }, EXIT_OK


def _emit(rep, args, run_dir) -> tuple[dict, int]:
    _write_report(run_dir, rep, args.format)
    return _report_summary(rep), EXIT_OK if rep.passed else EXIT_BREACH


def cmd_probe_strichartz(args, run_dir):
    if args.global_:
        grid = GridSpec.square(args.grid or 32, args.oversample)
        rep = es.strichartz_global_probe(args.s, args.samples, args.seed, grid, decay=args.decay)
        return _emit(rep, args, run_dir)
    if args.Nmax < 1 or args.Nmax & (args.Nmax - 1):
        raise UsageError(f"--Nmax must be a power of two >= 1, got {args.Nmax}")
    if args.alpha <= 0.25:
        raise UsageError(f"--alpha must exceed 1/4, got {args.alpha}")
    grid = GridSpec.square(args.grid or max(16, 4 * args.Nmax), args.oversample)
    if dyadic.max_shell(grid) < 2 * args.Nmax:
        raise UsageError(f"--grid half-band {dyadic.max_shell(grid)} must be >= 2*Nmax = {2 * args.Nmax}")
    rep = es.strichartz_scan(dyadic.dyadic_values(args.Nmax), args.alpha, args.samples, args.seed, grid)
    return _emit(rep, args, run_dir)


def cmd_probe_kernel(args, run_dir):
    if args.kmax < 0 or args.jmax < args.kmax:
        raise UsageError("need 0 <= --kmax <= --jmax")
    _positive("--eps", args.eps)
    rep = es.kernel_sum_scan(args.kmax, args.jmax, args.draws, args.eps, args.seed)
    summary, code = _emit(rep, args, run_dir)
    summary["upward_trend"] = rep.extra["upward_trend"]
    return summary, code


def cmd_probe_commutator(args, run_dir):
    if args.s < 1:
        raise UsageError(f"--s must be >= 1 for the commutator probe, got {args.s}")
    rep = es.commutator_sweep(args.s, args.samples, args.seed, _grid(args), args.decay)
    return _emit(rep, args, run_dir)


def cmd_probe_product(args, run_dir):
    if args.s < 0:
        raise UsageError(f"--s must be >= 0, got {args.s}")
    rep = es.product_sweep(args.s, args.samples, args.seed, _grid(args), args.decay)
    return _emit(rep, args, run_dir)


def _trajectory_for_probe(args):
    grid = _grid(args)
    u0 = parse_ic(args.ic, grid, args.s)
    T = args.T if args.T is not None else existence_time(u0, args.s, args.A_s)
    _positive("--T", T)
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    cfg = SolveConfig(dt=T / args.steps, T=T, s=args.s, integrator=args.integrator)
    return solve_ivp(u0, cfg)


def cmd_probe_energy(args, run_dir):
    if args.s < 1:
        raise UsageError(f"--s must be >= 1, got {args.s}")
    rep = es.energy_probe(_trajectory_for_probe(args), args.s)
    return _emit(rep, args, run_dir)


def cmd_probe_gt(args, run_dir):
    if args.s <= 1.75:
        raise UsageError(f"--s must exceed 7/4, got {args.s}")
    rep = es.gT_probe(_trajectory_for_probe(args), args.s)
    return _emit(rep, args, run_dir)


def cmd_probe_lemma52(args, run_dir):
    if args.A_s < 0:
        raise UsageError("--A-s must be >= 0")
    u0 = parse_ic(args.ic, _grid(args), args.s)
    rep = es.lemma52_probe(u0, args.s, args.A_s, C_s=args.C_s, steps=args.steps, integrator=args.integrator)
    return _emit(rep, args, run_dir)


def cmd_bona_smith(args, run_dir):
    n_list = [int(v) for v in args.n.split(",") if v.strip()]
    if not n_list or min(n_list) < 1:
        raise UsageError("--n must list positive integers, e.g. 4,8,16,32")
    if args.s_data <= args.s:
        raise UsageError(f"--s-data must exceed --s, got {args.s_data} <= {args.s}")
    grid = _grid(args)
    if args.ic:
        w0 = parse_ic(args.ic, grid, args.s)
        rep = bs.convergence_experiment(w0, args.s, args.s_data, n_list, fit=False)
    else:
        w0 = bs.synthetic_data(grid, args.s_data, args.seed)
        rep = bs.convergence_experiment(w0, args.s, args.s_data, n_list)
    if args.export_fields:
        for n in n_list:
            save_field(bs.mollify(w0, n), os.path.join(run_dir, f"mollified_n{n:04d}.spf2"))
    return _emit(rep, args, run_dir)


def cmd_dirichlet(args, run_dir):
    if not args.Q >= 1:
        raise UsageError(f"--Q must be >= 1, got {args.Q}")
    row = arith.dirichlet_approx(args.alpha, args.Q).as_row()
    _write_rows(run_dir, [row], args.format)
    return row, EXIT_OK


def cmd_weyl(args, run_dir):
    _positive("--eps", args.eps)
    if args.samples:
        rng = np.random.default_rng(args.seed)
        params = [(float(a), float(b)) for a, b in rng.random((args.samples, 2))]
    else:
        if args.alpha is None:
            raise UsageError("weyl needs --alpha or --samples")
        params = [(args.alpha, args.beta)]
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    rows = []
    for a, b in params:
        f = arith.RealQuadratic(a, b)
        S = abs(arith.weyl_sum(f, args.N))
        bound = arith.weyl_bound_rhs(f, args.N, args.eps, args.Q if args.Q else args.N)
        rows.append({"alpha": a, "beta": b, "N": args.N, "abs_S": S, "bound": bound, "ratio": S / bound})
    _write_rows(run_dir, rows, args.format)
    return {"rows": len(rows), "max_ratio": max(r["ratio"] for r in rows)}, EXIT_OK


def cmd_poisson(args, run_dir):
    r = arith.poisson_check(args.family, args.truncation, args.sigma)
    row = {"family": args.family, "sigma": args.sigma, "truncation": args.truncation,
           "lhs": r.lhs, "rhs": r.rhs, "difference": r.difference, "tail_bound": r.tail_bound}
    _write_rows(run_dir, [row], args.format)
    return row, EXIT_OK


def cmd_field_info(args, run_dir):
    if args.path:
        u = load_field(args.path, args.oversample)
    elif args.ic:
        u = parse_ic(args.ic, _grid(args), args.s)
    else:
        raise UsageError("field-info needs a path or --ic")
    info = {
        "grid": list(u.grid.shape),
        "real": u.real,
        "l2": sc.l2_norm(u),
        "hs": sc.sobolev_norm(u, args.s),
        "s": args.s,
        "linf": sc.linf_norm(u),
        "x_mean_zero": sc.x_mean_zero(u),
        "shell_norms": {str(k): v for k, v in dyadic.shell_norms(u).items()},
    }
    with open(os.path.join(run_dir, "field_info.json"), "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
    return info, EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, grid_default: int | None = 64, s_default: float = 2.0) -> None:
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--output-dir", default="runs", help="parent directory for run directories")
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")
    p.add_argument("--grid", type=int, default=grid_default, help="modes per direction (power of two)")
    p.add_argument("--oversample", type=int, default=4)
    p.add_argument("--s", type=float, default=s_default, help="Sobolev index")


def _solver_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ic", default="random:s=3.5:seed=0:norm=0.5", help="initial condition (see README)")
    p.add_argument("--T", type=float, default=None, help="horizon; default is the existence time")
    p.add_argument("--A-s", dest="A_s", type=float, default=10.0, help="constant in the existence time")
    p.add_argument("--integrator", choices=["IFRK4", "STRANG"], default="IFRK4")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="shrira-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="integrate the IVP and export the trajectory")
    _common(p, 128)
    _solver_opts(p)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--record-stride", type=int, default=1)
    p.add_argument("--no-dealias", action="store_true")
    p.add_argument("--c-cfl", type=float, default=0.5)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probe-strichartz", help="local (or --global) Strichartz probe")
    _common(p, None, 0.8)
    p.add_argument("--Nmax", type=int, default=64)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--global", dest="global_", action="store_true", help="probe over [0, 1] against H^s")
    p.add_argument("--decay", type=float, default=4.0)
    p.set_defaults(func=cmd_probe_strichartz, oversample=2)

    p = sub.add_parser("probe-kernel", help="dyadic kernel-sum scan")
    _common(p)
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--jmax", type=int, default=12)
    p.add_argument("--draws", type=int, default=20)
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_probe_kernel)

    for name, fn, s0 in (("probe-commutator", cmd_probe_commutator, 2.0), ("probe-product", cmd_probe_product, 1.0)):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} estimate sweep over random pairs")
        _common(p, 32, s0)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--decay", type=float, default=3.0)
        p.set_defaults(func=fn)

    for name, fn in (("probe-energy", cmd_probe_energy), ("probe-gt", cmd_probe_gt)):
        p = sub.add_parser(name, help="probe along a solver trajectory")
        _common(p, 128)
        _solver_opts(p)
        p.add_argument("--steps", type=int, default=64)
        p.set_defaults(func=fn)

    p = sub.add_parser("probe-lemma52", help="bootstrap conclusions at the existence time")
    _common(p, 128)
    _solver_opts(p)
    p.add_argument("--C-s", dest="C_s", type=float, default=None)
    p.add_argument("--steps", type=int, default=64)
    p.set_defaults(func=cmd_probe_lemma52)

    p = sub.add_parser("bona-smith", help="mollification convergence experiment")
    _common(p, 256, 1.75)
    p.add_argument("--s-data", dest="s_data", type=float, default=2.5)
    p.add_argument("--n", default="4,8,16,32", help="comma-separated mollification scales")
    p.add_argument("--ic", default=None, help="use this field instead of synthetic data (no slope check)")
    p.add_argument("--export-fields", action="store_true")
    p.set_defaults(func=cmd_bona_smith)

    p = sub.add_parser("dirichlet", help="rational approximation a/q of alpha with q <= Q")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--Q", type=float, required=True)
    p.set_defaults(func=cmd_dirichlet)

    p = sub.add_parser("weyl", help="quadratic Weyl sum against its bound")
    _common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--Q", type=float, default=None, help="Dirichlet parameter (default N)")
    p.add_argument("--samples", type=int, default=0, help="random (alpha, beta) pairs instead of --alpha")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("poisson", help="both sides of the Poisson summation formula")
    _common(p)
    p.add_argument("--family", choices=["gaussian", "bump"], default="gaussian")
    p.add_argument("--truncation", type=int, default=20)
    p.add_argument("--sigma", type=float, default=1.0)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("field-info", help="norms and shell decomposition of a field")
    _common(p)
    p.add_argument("path", nargs="?", default=None, help="SPF2 file")
    p.add_argument("--ic", default=None)
    p.set_defaults(func=cmd_field_info)
    return ap


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0) if isinstance(exc.code, int) else EXIT_USAGE
    run_dir = None
    try:
        run_dir = _make_run_dir(args.output_dir, args.command)
        _write_manifest(run_dir, argv, args)
        summary, code = args.func(args, run_dir)
    except (BlowUpError, es.ResolutionError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, SPF2FormatError, arith.PreconditionError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    summary = {"command": args.command, "run_dir": run_dir, "exit_code": code, **summary}
    print(json.dumps(es._jsonable(summary), sort_keys=True))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
