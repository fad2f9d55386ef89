"""Command-line driver: ``signtests {test,simulate,sample,moments}``.

Exit codes: 0 success, 2 usage error, 3 data/config error, 4 capacity error.
The default worker count for ``simulate`` can be set with the environment
variable ``SIGNTESTS_WORKERS``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import statistics as stats
from .distributions import rho_even_moment
from .errors import CapacityError, DomainError, GridError, ModelError, SignTestError
from .harness import FULL_GRID, FULL_M, DESK_GRID, DESK_M, SimulationConfig, run_grid
from .inference import FAMILIES, evaluate
from .report import ReportIOError, emit_histogram_data, write_report
from .sampling import RotationalModel, derive_stream, sample_gaussian_matrix, sample_rotsym, sample_uniform_sphere

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CAPACITY = 0, 2, 3, 4
WORKERS_ENV = "SIGNTESTS_WORKERS"


class UsageError(SignTestError):
    pass


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_workers():
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signtests",
        description="High-dimensional sign tests: single tests, null simulations, samplers, moments.",
        epilog=f"Exit codes: 0 ok, 2 usage, 3 data, 4 capacity. "
               f"{WORKERS_ENV} sets the default --workers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    t = sub.add_parser("test", help="evaluate one sign test on a CSV data file")
    t.add_argument("family", choices=FAMILIES)
    t.add_argument("data", type=Path, help="CSV file, one observation per row")
    t.add_argument("--data2", type=Path, help="second block for the independence test")
    t.add_argument("--split", type=int, help="independence: columns [0, K) vs [K, end) of DATA")
    t.add_argument("--theta0", type=_float_list, help="location: null direction, comma separated")
    t.add_argument("--H", type=int, default=3, help="serial families: maximal lag (default 3)")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--normalize", action="store_true",
                   help="replace each row by its sign X/||X|| (otherwise rows must be unit vectors)")

    s = sub.add_parser("simulate", help="Monte-Carlo null distributions over an (n, p) grid")
    s.add_argument("--config", type=Path, help="JSON SimulationConfig; flags override its fields")
    s.add_argument("--family", choices=FAMILIES)
    s.add_argument("--grid-n", type=_int_list)
    s.add_argument("--grid-p", type=_int_list, help="total dimension (p + q for independence)")
    s.add_argument("--M", type=int, help=f"replicates per cell (default {DESK_M})")
    s.add_argument("--seed", type=int, help="master seed (default 0)")
    s.add_argument("--alpha", type=float)
    s.add_argument("--H", type=int, help="serial families: maximal lag (default 3)")
    s.add_argument("--null-model", choices=("uniform_sphere", "gaussian_directions", "rotsym"))
    s.add_argument("--rotsym-kind", choices=("uniform", "vmf", "linear"))
    s.add_argument("--kappa", type=float, help="vMF concentration for --rotsym-kind vmf")
    s.add_argument("--a", type=float, help="slope for --rotsym-kind linear")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--full", action="store_true",
                   help=f"grid {{{','.join(map(str, FULL_GRID))}}}^2 with M = {FULL_M} (batch scale)")
    s.add_argument("--out", type=Path, help="report path (default: standard output)")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--histograms", type=Path, help="directory for per-cell histogram tables")

    g = sub.add_parser("sample", help="draw a null sample and write it as CSV")
    g.add_argument("--kind", choices=("uniform", "gaussian", "vmf", "linear"), default="uniform")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--kappa", type=float, default=0.0)
    g.add_argument("--a", type=float, default=0.0)
    g.add_argument("--out", type=Path)

    m = sub.add_parser("moments", help="exact E[rho^m] for two independent uniform unit p-vectors")
    m.add_argument("p", type=int)
    m.add_argument("m", type=int)
    return parser


# -- verbs --------------------------------------------------------------------

def _load_csv(path: Path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise DomainError(f"cannot parse {path} as numeric CSV: {exc}") from exc
    if data.size == 0:
        raise DomainError(f"{path} contains no observations")
    return data


def cmd_test(args) -> dict:
    X = _load_csv(args.data)
    fam = args.family
    n, p = X.shape
    meta = {"n": n, "p": p}
    norm = args.normalize
    if fam == "uniformity":
        pair = stats.rayleigh(X, normalize=norm)
    elif fam == "location":
        if args.theta0 is None:
            raise UsageError("the location test requires --theta0")
        pair = stats.location(X, args.theta0, normalize=norm)
        meta["theta0"] = list(args.theta0)
    elif fam in ("serial", "serial_lowrank"):
        fn = stats.portmanteau if fam == "serial" else stats.portmanteau_lowrank
        pair = fn(X, args.H, normalize=norm)
        meta["H"] = args.H
    elif fam == "independence":
        if args.data2 is not None:
            Y = _load_csv(args.data2)
        elif args.split is not None:
            if not 1 <= args.split < p:
                raise UsageError(f"--split must lie in [1, {p - 1}], got {args.split}")
            X, Y = X[:, : args.split], X[:, args.split:]
        else:
            raise UsageError("the independence test requires --data2 or --split")
        pair = stats.independence(X, Y, normalize=norm)
        meta.update(p=X.shape[1], q=Y.shape[1])
    else:
        pair = stats.sphericity(X, normalize=norm)
    return evaluate(pair, args.alpha, family=fam, **meta).to_dict()


def _simulation_config(args) -> SimulationConfig:
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise DomainError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise DomainError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(base, dict):
            raise DomainError(f"config {args.config} must hold a JSON object")
    if args.full:
        base.setdefault("grid_n", list(FULL_GRID))
        base.setdefault("grid_p", list(FULL_GRID))
        base.setdefault("M", FULL_M)
    else:
        base.setdefault("grid_n", list(DESK_GRID))
        base.setdefault("grid_p", list(DESK_GRID))
    overrides = {
        "family": args.family, "grid_n": args.grid_n, "grid_p": args.grid_p, "M": args.M,
        "master_seed": args.seed, "alpha": args.alpha, "H": args.H, "null_model": args.null_model,
        "workers": args.workers,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    base.setdefault("workers", _default_workers())
    if args.rotsym_kind is not None:
        rs = {"kind": args.rotsym_kind}
        if args.kappa is not None:
            rs["kappa"] = args.kappa
        if args.a is not None:
            rs["a"] = args.a
        base["rotsym"] = rs
        base.setdefault("null_model", "rotsym")
    if "family" not in base:
        raise UsageError("simulate needs --family (or a config file with a family field)")
    return SimulationConfig.from_dict(base)


def _progress(cell, n, p, err):
    if err is not None:
        print(f"cell n={n} p={p}: FAILED {err}", file=sys.stderr)
    else:
        print(f"cell n={n} p={p}: mean={cell.mean:+.4f} var={cell.variance:.4f} "
              f"ks={cell.ks_normal.d:.4f} rej={cell.rejection_rate_universal:.4f}", file=sys.stderr)


def _emit(report, args):
    if args.out is None:
        from .report import render_csv, render_json

        sys.stdout.write(render_json(report) if args.format == "json" else render_csv(report))
    else:
        write_report(report, args.format, args.out)
    if args.histograms is not None:
        args.histograms.mkdir(parents=True, exist_ok=True)
        for c in report.cells:
            emit_histogram_data(c, args.histograms / f"{c.family}_n{c.n}_p{c.p}.dat")


def cmd_simulate(args) -> int:
    config = _simulation_config(args)
    try:
        report = run_grid(config, progress=_progress)
    except GridError as exc:
        _emit(exc.report, args)
        print("partial results; failed cells:", file=sys.stderr)
        for n, p, msg in exc.failures:
            print(f"  n={n} p={p}: {msg}", file=sys.stderr)
        capacity = any(isinstance(e, CapacityError) for e in getattr(exc, "errors", []))
        return EXIT_CAPACITY if capacity else EXIT_DATA
    _emit(report, args)
    return EXIT_OK


def cmd_sample(args) -> np.ndarray:
    stream = derive_stream(args.seed, [])
    if args.kind == "uniform":
        return sample_uniform_sphere(stream, args.n, args.p)
    if args.kind == "gaussian":
        return sample_gaussian_matrix(stream, args.n, args.p)
    theta = np.zeros(args.p)
    theta[0] = 1.0
    model = (RotationalModel.von_mises_fisher(theta, args.kappa) if args.kind == "vmf"
             else RotationalModel.linear(theta, args.a))
    return sample_rotsym(stream, args.n, model)


def cmd_moments(args) -> dict:
    mv = rho_even_moment(args.p, args.m)
    a, b = mv.beta_parameters
    return {
        "p": mv.p, "m": mv.m, "product": mv.product_form(),
        "exact": f"{mv.exact.numerator}/{mv.exact.denominator}", "value": mv.value,
        "beta_parameters": [a, b],
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "test":
            print(json.dumps(cmd_test(args), indent=2))
        elif args.verb == "simulate":
            return cmd_simulate(args)
        elif args.verb == "sample":
            X = cmd_sample(args)
            buf = args.out.open("w") if args.out else sys.stdout
            try:
                np.savetxt(buf, X, delimiter=",", fmt="%.17g")
            finally:
                if args.out:
                    buf.close()
        else:
            mv = cmd_moments(args)
            print(f"E[rho^{mv['m']}] (p={mv['p']}) = {mv['product']} = {mv['exact']} = {mv['value']:.12g}")
            print(f"rho^2 ~ Beta({mv['beta_parameters'][0]:g}, {mv['beta_parameters'][1]:g})")
    except UsageError as exc:
        parser.error(str(exc))
    except CapacityError as exc:
        print(f"signtests: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, ModelError, ReportIOError) as exc:
        print(f"signtests: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
