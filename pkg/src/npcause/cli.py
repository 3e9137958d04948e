"""Command-line front end.

Subcommands: ``estimate`` (full pipeline on a data file), ``simulate``
(ground-truth generators), ``oracle`` (exact exponential-copula effect
curve), and ``bench`` (mean-absolute-deviation benchmark). Exit codes: 0 on
success, 2 for input problems, 3 for estimation or numerical failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import DataError, load_table, trim
from .effects import (EstimationError, bootstrap_sd, nce_curve, write_curve)
from .graph import (Cpdag, GraphError, enumerate_extensions, format_edge_list,
                    parse_edge_list)
from .marginals import MarginalError, default_kernel, fit_marginal
from .normal import CLAMP_BAND
from .rpc import CiTestConfig, CorrelationError, estimate_cpdag
from .simulate import (ExpCopulaModel, QuadratureError, exp_causal_effect_oracle,
                       mad_experiment, npn_transform, population_effect,
                       random_dag, sample_exp_model, sample_gaussian)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3

_INPUT_ERRORS = (DataError, GraphError, ValueError, OSError)
_ESTIMATION_ERRORS = (EstimationError, MarginalError, CorrelationError,
                      GraphError, QuadratureError, np.linalg.LinAlgError,
                      ArithmeticError)

_DELIMITERS = {"comma": ",", "tab": "\t"}

BENCH_PRESETS = {
    "smoke": dict(p=6, s=0.4, n=200, reps=2, dag_mode="known", ci_alpha=0.01),
    "table1-p10-n100-known": dict(p=10, s=3 / 9, n=100, reps=100,
                                  dag_mode="known", ci_alpha=0.01),
    "table1-p10-n1000-known": dict(p=10, s=3 / 9, n=1000, reps=100,
                                   dag_mode="known", ci_alpha=0.01),
    "table1-p50-n100-known": dict(p=50, s=3 / 49, n=100, reps=100,
                                  dag_mode="known", ci_alpha=0.01),
    "table1-p50-n1000-known": dict(p=50, s=3 / 49, n=1000, reps=100,
                                   dag_mode="known", ci_alpha=0.01),
    "table1-p10-n100-learned-a0.01": dict(p=10, s=3 / 9, n=100, reps=100,
                                          dag_mode="learned", ci_alpha=0.01),
    "table1-p10-n100-learned-a0.1": dict(p=10, s=3 / 9, n=100, reps=100,
                                         dag_mode="learned", ci_alpha=0.1),
    "table1-p10-n1000-learned-a0.01": dict(p=10, s=3 / 9, n=1000, reps=100,
                                           dag_mode="learned", ci_alpha=0.01),
    "table1-p10-n1000-learned-a0.1": dict(p=10, s=3 / 9, n=1000, reps=100,
                                          dag_mode="learned", ci_alpha=0.1),
}


def _fail(code: int, message: str) -> int:
    print(f"npcause: error: {message}", file=sys.stderr)
    return code


def _sanitize(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_table(path: Path, header, rows, delimiter: str = ",") -> None:
    lines = [delimiter.join(header)]
    for row in rows:
        lines.append(delimiter.join(
            f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- estimate -------------------------------------------------------------------


def _load_inputs(args):
    data = load_table(args.input, args.response, _DELIMITERS[args.delimiter])
    trimmed = trim(data, args.alpha_trim)
    if args.graph is not None:
        try:
            text = Path(args.graph).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read graph file: {exc}") from None
        cpdag = parse_edge_list(text, p=data.p)
        graph_source = "file"
    else:
        cpdag = None
        graph_source = "learned"
    return data, trimmed, cpdag, graph_source


def cmd_estimate(args) -> int:
    try:
        data, trimmed, cpdag, graph_source = _load_inputs(args)
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, str(exc))

    try:
        if cpdag is None:
            cfg = CiTestConfig(alpha_ci=args.ci_alpha, max_order=args.max_order)
            cpdag = estimate_cpdag(trimmed, cfg, source=args.corr)
        dags = enumerate_extensions(cpdag, cap=args.extension_cap)

        values = trimmed.values
        kernels = [default_kernel(values[:, j], args.alpha_trim,
                                  bandwidth_cdf=args.bandwidth_cdf,
                                  bandwidth_quantile=args.bandwidth_quantile)
                   for j in range(data.p)]
        fits = [fit_marginal(values[:, j], data.n, args.alpha_trim,
                             kernel=kernels[j], grid_size=args.iso_grid)
                for j in range(data.p)]

        y = data.response_index
        curves = []
        for i in range(data.p):
            if i == y:
                continue
            for dag_id, g in enumerate(dags):
                curve = nce_curve(fits, values, g, i, y,
                                  grid_size=args.grid_points, dag_id=dag_id)
                if args.bootstrap > 0:
                    def fit_col(col_values, j):
                        return fit_marginal(col_values, data.n, args.alpha_trim,
                                            kernel=kernels[j],
                                            grid_size=args.iso_grid)

                    sd = bootstrap_sd(fit_col, values, g, i, y, curve.grid,
                                      B=args.bootstrap,
                                      seed=(args.seed, i, dag_id))
                    curve = dataclasses.replace(curve, sd=sd)
                curves.append(curve)
    except _ESTIMATION_ERRORS as exc:
        return _fail(EXIT_ESTIMATION, str(exc))

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cpdag_path = outdir / "cpdag.txt"
    with open(cpdag_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(cpdag))

    curve_files = []
    for curve in curves:
        name = (f"curve_{_sanitize(data.names[curve.cause])}_"
                f"{_sanitize(data.names[curve.target])}_dag{curve.dag_id}.csv")
        write_curve(outdir / name, curve)
        curve_files.append(name)

    plot_files = []
    if not args.no_plots:
        from .plots import save_effect_plot

        y = data.response_index
        for i in range(data.p):
            if i == y:
                continue
            subset = [c for c in curves if c.cause == i]
            name = (f"effect_{_sanitize(data.names[i])}_"
                    f"{_sanitize(data.names[y])}.png")
            save_effect_plot(outdir / name, subset, data.names[i], data.names[y])
            plot_files.append(name)

    manifest = {
        "command": "estimate",
        "version": __version__,
        "input": str(args.input),
        "response": args.response,
        "delimiter": args.delimiter,
        "seed": args.seed,
        "alpha_trim": args.alpha_trim,
        "ci_alpha": args.ci_alpha,
        "corr": args.corr,
        "max_order": args.max_order,
        "grid_points": args.grid_points,
        "iso_grid": args.iso_grid,
        "bootstrap": args.bootstrap,
        "sd_method": "row bootstrap over retained rows; bands are 1.96*sd",
        "extension_cap": args.extension_cap,
        "clamp_band": CLAMP_BAND,
        "graph_source": graph_source,
        "extensions": len(dags),
        "n_total": data.n,
        "n_retained": trimmed.n_retained,
        "trim_lower": [float(v) for v in trimmed.lower],
        "trim_upper": [float(v) for v in trimmed.upper],
        "kernel": {
            "family": "triweight",
            "per_column": [
                {"name": data.names[j],
                 "bandwidth_cdf": kernels[j].bandwidth_cdf,
                 "bandwidth_quantile": kernels[j].bandwidth_quantile}
                for j in range(data.p)],
        },
        "cpdag_file": cpdag_path.name,
        "curve_files": curve_files,
        "plot_files": plot_files,
    }
    _write_json(outdir / "manifest.json", manifest)

    print(f"estimate: {len(dags)} DAG(s) in the equivalence class, "
          f"{len(curve_files)} curve file(s) -> {outdir}")
    return EXIT_OK


# -- simulate ---------------------------------------------------------------------


def _write_data_matrix(path: Path, data) -> None:
    _write_table(path, data.names,
                 [tuple(float(v) for v in row) for row in data.values])


def cmd_simulate(args) -> int:
    outdir = Path(args.outdir)
    try:
        if args.model == "sem":
            if args.p < 2:
                raise ValueError("p must be at least 2")
            sem = random_dag(args.p, args.s, args.seed)
            data = sample_gaussian(sem, args.n, args.seed + 1)
            if args.marginal != "none":
                data = npn_transform(data, marginal=args.marginal, rate=args.rate)
            dag = sem.dag()
            effects_rows = [(i, y, population_effect(sem, i, y))
                            for i in range(args.p) for y in range(args.p) if i != y]
        else:
            data = sample_exp_model(args.n, args.seed)
            dag = None
            effects_rows = None
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, str(exc))

    outdir.mkdir(parents=True, exist_ok=True)
    _write_data_matrix(outdir / "data.csv", data)
    if args.model == "sem":
        cpdag = Cpdag(dag.p, dag.edges, ())
        with open(outdir / "true_dag.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_edge_list(cpdag))
        _write_table(outdir / "true_effects.csv",
                     ("cause", "target", "effect"), effects_rows)
    else:
        with open(outdir / "true_dag.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("0 -> 1\n")
    manifest = {
        "command": "simulate",
        "version": __version__,
        "model": args.model,
        "p": args.p if args.model == "sem" else 2,
        "s": args.s if args.model == "sem" else None,
        "n": args.n,
        "seed": args.seed,
        "marginal": args.marginal if args.model == "sem" else "exponential",
        "rate": args.rate,
    }
    _write_json(outdir / "manifest.json", manifest)
    print(f"simulate: wrote {data.n} x {data.p} table -> {outdir}")
    return EXIT_OK


# -- oracle -----------------------------------------------------------------------


def cmd_oracle(args) -> int:
    try:
        model = ExpCopulaModel(rho=args.rho, lambda_x=args.lambda_x,
                               lambda_y=args.lambda_y)
        if not 0 < args.x_min < args.x_max:
            raise ValueError("need 0 < x-min < x-max")
        if args.grid_points < 2:
            raise ValueError("grid must have at least 2 points")
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, str(exc))

    grid = np.linspace(args.x_min, args.x_max, args.grid_points)
    try:
        values = np.array([exp_causal_effect_oracle(model, float(x)) for x in grid])
    except _ESTIMATION_ERRORS as exc:
        return _fail(EXIT_ESTIMATION, str(exc))

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_table(outdir / "oracle_curve.csv", ("x", "effect"),
                 [(float(x), float(v)) for x, v in zip(grid, values)])
    plot_files = []
    if not args.no_plots:
        from .plots import save_curve_plot

        save_curve_plot(outdir / "oracle_curve.png", grid, values,
                        "x", "exact effect on Y")
        plot_files.append("oracle_curve.png")
    _write_json(outdir / "manifest.json", {
        "command": "oracle",
        "version": __version__,
        "rho": args.rho,
        "lambda_x": args.lambda_x,
        "lambda_y": args.lambda_y,
        "x_min": args.x_min,
        "x_max": args.x_max,
        "grid_points": args.grid_points,
        "plot_files": plot_files,
    })
    print(f"oracle: wrote {args.grid_points}-point curve -> {outdir}")
    return EXIT_OK


# -- bench ------------------------------------------------------------------------


def cmd_bench(args) -> int:
    if args.preset is not None:
        if args.preset not in BENCH_PRESETS:
            names = ", ".join(sorted(BENCH_PRESETS))
            return _fail(EXIT_INPUT, f"unknown preset {args.preset!r}; "
                                     f"available: {names}")
        cfg = dict(BENCH_PRESETS[args.preset])
        methods = ("ida", "nce")
    else:
        missing = [f for f in ("p", "s", "n", "reps") if getattr(args, f) is None]
        if missing:
            return _fail(EXIT_INPUT,
                         f"custom bench needs --{', --'.join(missing)} (or use --preset)")
        cfg = dict(p=args.p, s=args.s, n=args.n, reps=args.reps,
                   dag_mode=args.dag_mode, ci_alpha=args.ci_alpha)
        methods = ("ida", "nce") if args.method == "both" else (args.method,)

    outdir = Path(args.outdir)
    summary = {"config": {**cfg, "seed": args.seed, "preset": args.preset,
                          "corr": args.corr}}
    try:
        for method in methods:
            summary[method] = mad_experiment(
                cfg["p"], cfg["s"], cfg["n"], cfg["reps"], method,
                dag_mode=cfg["dag_mode"], ci_alpha=cfg["ci_alpha"],
                seed=args.seed, corr_source=args.corr)
    except _ESTIMATION_ERRORS as exc:
        return _fail(EXIT_ESTIMATION, str(exc))

    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "bench.json", summary)
    shown = ", ".join(f"{m} MAD={summary[m]['mad_mean']:.4f}" for m in methods)
    print(f"bench: {shown} -> {outdir / 'bench.json'}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npcause",
        description="Functional causal effects from nonparanormal observational data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    est = sub.add_parser("estimate", help="estimate effect curves from a data file")
    est.add_argument("input", help="delimited data file with one header row")
    est.add_argument("--response", "-y", required=True,
                     help="name of the response column")
    est.add_argument("--delimiter", choices=sorted(_DELIMITERS), default="comma")
    est.add_argument("--alpha-trim", type=float, default=0.05)
    est.add_argument("--ci-alpha", type=float, default=0.01,
                     help="significance level of the independence tests")
    est.add_argument("--corr", choices=("kendall", "spearman", "pearson"),
                     default="kendall")
    est.add_argument("--max-order", type=int, default=None,
                     help="largest conditioning-set size (default p-2)")
    est.add_argument("--grid-points", type=int, default=101,
                     help="points per effect curve")
    est.add_argument("--iso-grid", type=int, default=501,
                     help="nodes in the monotonizing evaluation grids")
    est.add_argument("--bandwidth-cdf", type=float, default=None,
                     help="override the CDF smoother bandwidth for all columns")
    est.add_argument("--bandwidth-quantile", type=float, default=None,
                     help="override the quantile smoother bandwidth")
    est.add_argument("--bootstrap", type=int, default=100,
                     help="bootstrap replicates for curve sd (0 disables)")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--graph", default=None,
                     help="edge-list file fixing the causal graph (known-DAG mode)")
    est.add_argument("--extension-cap", type=int, default=256)
    est.add_argument("--no-plots", action="store_true")
    est.add_argument("--outdir", default="npcause-out")
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="generate ground-truth data")
    sim.add_argument("--model", choices=("sem", "exp-pair"), default="sem")
    sim.add_argument("--p", type=int, default=10)
    sim.add_argument("--s", type=float, default=3 / 9,
                     help="edge probability of the random DAG")
    sim.add_argument("--n", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--marginal", choices=("none", "identity", "exponential"),
                     default="none",
                     help="copula transform applied to the Gaussian sample")
    sim.add_argument("--rate", type=float, default=1.0,
                     help="rate of the exponential marginal")
    sim.add_argument("--outdir", default="npcause-out")
    sim.set_defaults(func=cmd_simulate)

    orc = sub.add_parser("oracle", help="exact exponential-copula effect curve")
    orc.add_argument("--rho", type=float, required=True)
    orc.add_argument("--lambda-x", type=float, default=1.0)
    orc.add_argument("--lambda-y", type=float, default=1.0)
    orc.add_argument("--x-min", type=float, default=0.05)
    orc.add_argument("--x-max", type=float, default=3.0)
    orc.add_argument("--grid-points", type=int, default=101)
    orc.add_argument("--no-plots", action="store_true")
    orc.add_argument("--outdir", default="npcause-out")
    orc.set_defaults(func=cmd_oracle)

    ben = sub.add_parser("bench", help="mean-absolute-deviation benchmark")
    ben.add_argument("--preset", default=None,
                     help=f"one of: {', '.join(sorted(BENCH_PRESETS))}")
    ben.add_argument("--p", type=int, default=None)
    ben.add_argument("--s", type=float, default=None)
    ben.add_argument("--n", type=int, default=None)
    ben.add_argument("--reps", type=int, default=None)
    ben.add_argument("--method", choices=("ida", "nce", "both"), default="both")
    ben.add_argument("--dag-mode", choices=("known", "learned"), default="known")
    ben.add_argument("--ci-alpha", type=float, default=0.01)
    ben.add_argument("--corr", choices=("kendall", "spearman", "pearson"),
                     default="kendall")
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--outdir", default="npcause-out")
    ben.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
