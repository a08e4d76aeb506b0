"""Command-line front end.

Subcommands: ``kernel`` (build/export a kernel), ``run`` (execute a
preset or config file), ``fit`` (post-hoc decay fit on a CSV column),
``sweep`` (vary the decay rate over a list).  Exit codes: 0 ok,
2 configuration error, 3 kernel failure, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

from .errors import ConfigError, HosstabError, KernelError, SolverError
from .experiments import (PRESETS, ExperimentConfig, read_csv, run_experiment,
                          sweep_rates)
from .fitting import fit_decay
from .kernels import PhysicsParams, observer_kernel, save_kernel, solve_kernel

EXIT_CONFIG = 2
EXIT_KERNEL = 3
EXIT_SOLVER = 4


def _params_from_args(args) -> PhysicsParams:
    return PhysicsParams(beta=args.beta, alpha=args.alpha, delta=args.delta,
                         r=args.r, L=args.L, bc_family=args.family)


def cmd_kernel(args) -> int:
    params = _params_from_args(args)
    if args.role == "observer":
        kern = observer_kernel(params, args.family, tol=args.tol, max_iter=args.max_iter)
    else:
        kern = solve_kernel(params, args.family, tol=args.tol, max_iter=args.max_iter)
    save_kernel(kern, args.out)
    print(json.dumps({
        "role": kern.role, "iterations": kern.iterations,
        "last_increment": kern.last_increment,
        "pde_sup": kern.residual.pde_sup, "bc_sup": kern.residual.bc_sup,
        "out": args.out,
    }, indent=2))
    return 0


def parse_config_file(path: str) -> ExperimentConfig:
    """Flat ``key = value`` text file; '#' starts a comment."""
    raw: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (tok.strip() for tok in line.split("=", 1))
                raw[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc

    def fget(key, default=None, cast=float):
        if key in raw:
            try:
                return cast(raw.pop(key))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from exc
        if default is None:
            raise ConfigError(f"config file misses required key {key!r}")
        return default

    params = PhysicsParams(
        beta=fget("beta"), alpha=fget("alpha"), delta=fget("delta"),
        r=fget("r"), L=fget("L", math.pi),
        p_power=fget("p", 0.0), bc_family=fget("family", "A", str))
    window = None
    if "fit_lo" in raw or "fit_hi" in raw:
        window = (fget("fit_lo"), fget("fit_hi"))
    cfg = ExperimentConfig(
        params=params, ic=fget("ic", "stationary_mix", str),
        M=fget("M", 201, int), N=fget("N", 1000, int), T=fget("T", 4.0),
        run_kind=fget("run", "controlled", str),
        scheme=fget("scheme", "auto", str),
        kernel_tol=fget("tol", 1e-12), inner_tol=fget("inner_tol", 1e-10),
        max_inner=fget("max_inner", 25, int),
        fit_window=window, ic_hat=fget("ic_hat", "zero", str),
        outdir=fget("outdir", "out", str), name=fget("name", "run", str))
    if raw:
        raise ConfigError(f"unknown config keys: {sorted(raw)}")
    return cfg


def _config_from_run_args(args) -> ExperimentConfig:
    if args.config:
        cfg = parse_config_file(args.config)
    elif args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; "
                              f"choices: {sorted(PRESETS)}")
        cfg = PRESETS[args.preset]
    else:
        raise ConfigError("run needs --preset or --config")
    if args.paper_scale:
        cfg = cfg.paper_scale()
    over = {}
    for key in ("M", "N"):
        val = getattr(args, key)
        if val is not None:
            over[key] = val
    if args.T is not None:
        over["T"] = args.T
    if args.scheme is not None:
        over["scheme"] = args.scheme
    if args.outdir is not None:
        over["outdir"] = args.outdir
    if over:
        cfg = replace(cfg, **over)
    return cfg


def cmd_run(args) -> int:
    cfg = _config_from_run_args(args)
    summary = run_experiment(cfg, kernel_cache=args.kernel_cache)
    print(json.dumps({"name": summary["name"], "outdir": cfg.outdir,
                      "fits": summary.get("fits", {})}, indent=2))
    return 0


def cmd_fit(args) -> int:
    cols = read_csv(args.csv)
    if args.column not in cols:
        raise ConfigError(f"column {args.column!r} not in {sorted(cols)}")
    window = tuple(args.window) if args.window else None
    fit = fit_decay(cols["t"], cols[args.column], window)
    print(json.dumps(fit.as_dict(), indent=2))
    return 0


def cmd_sweep(args) -> int:
    base = PRESETS.get(args.preset)
    if base is None:
        raise ConfigError(f"unknown preset {args.preset!r}")
    rates = [float(tok) for tok in args.values.split(",") if tok]
    if not rates:
        raise ConfigError("sweep needs a nonempty comma list of rates")
    result = sweep_rates(base, rates, args.outdir,
                         kernel_cache=args.kernel_cache, workers=args.workers)
    print(json.dumps(result, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hosstab",
                                 description="Backstepping stabilization of "
                                             "higher-order Schrodinger equations")
    sub = ap.add_subparsers(dest="command", required=True)

    pk = sub.add_parser("kernel", help="build a kernel and export it as text")
    pk.add_argument("--beta", type=float, required=True)
    pk.add_argument("--alpha", type=float, required=True)
    pk.add_argument("--delta", type=float, required=True)
    pk.add_argument("--r", type=float, required=True)
    pk.add_argument("--L", type=float, default=math.pi)
    pk.add_argument("--family", choices=("A", "B"), default="A")
    pk.add_argument("--role", choices=("control", "observer"), default="control")
    pk.add_argument("--tol", type=float, default=1e-12)
    pk.add_argument("--max-iter", type=int, default=60)
    pk.add_argument("--out", required=True)
    pk.set_defaults(func=cmd_kernel)

    pr = sub.add_parser("run", help="execute a preset or config-file experiment")
    pr.add_argument("--preset", choices=sorted(PRESETS))
    pr.add_argument("--config")
    pr.add_argument("--M", type=int)
    pr.add_argument("--N", type=int)
    pr.add_argument("--T", type=float)
    pr.add_argument("--scheme", choices=("auto", "taylor", "picard"))
    pr.add_argument("--outdir")
    pr.add_argument("--paper-scale", action="store_true",
                    help="use the full production sizes M=1001, N=5000")
    pr.add_argument("--kernel-cache", help="directory for kernel text caching")
    pr.set_defaults(func=cmd_run)

    pf = sub.add_parser("fit", help="decay fit on a column of a norms CSV")
    pf.add_argument("--csv", required=True)
    pf.add_argument("--column", default="l2_u")
    pf.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    pf.set_defaults(func=cmd_fit)

    ps = sub.add_parser("sweep", help="run a preset over a list of decay rates")
    ps.add_argument("--preset", required=True)
    ps.add_argument("--values", required=True, help="comma list, e.g. 0.5,1,2")
    ps.add_argument("--outdir", default="sweep_out")
    ps.add_argument("--workers", type=int, default=1)
    ps.add_argument("--kernel-cache")
    ps.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KernelError as exc:
        print(f"kernel failure: {exc}", file=sys.stderr)
        return EXIT_KERNEL
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HosstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
