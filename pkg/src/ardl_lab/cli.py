"""Command-line front end: ``ardl-lab <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 estimation error.
Global flags (--config, --seed, --out, --threads) are accepted before or
after the subcommand.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .ardl import ArdlSpec, fit_ardl_ecm, reduce_ardl, select_lags
from .bounds import BootstrapParams, bounds_test
from .dgp import derive_seed, simulate_panel
from .diagnostics import BATTERY_ORDER, run_battery
from .dlm import DlmSpec, fit_dlm, reduce_model
from .estat import EstimationError
from .frame import (DataError, align_panel, align_pooled, convert_wb_wide, describe,
                    load_long_csv, write_long_csv)
from .imputation import ForestParams, impute_panel
from .pipeline import (PRESETS, TABLE_HEADERS, ConfigError, ReportError, RunConfig, StageError,
                       dump_json, emit_report, run_pipeline, write_csv)
from .rollcorr import CSV_HEADER, screen_pairs

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_ESTIMATION = 0, 2, 3, 4


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--config", default=d, help="JSON run configuration")
    g.add_argument("--seed", type=int, default=d, help="global seed (overrides config and ARDLLAB_SEED)")
    g.add_argument("--out", default=d, help="output directory (default: print to stdout)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)
    return g


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="complete long CSV (country,indicator,year,value)")
    p.add_argument("--rq", choices=sorted(PRESETS), help="research-question preset")
    p.add_argument("--dep", help="dependent indicator (instead of --rq)")
    p.add_argument("--x", nargs="+", help="regressor indicators (instead of --rq)")
    p.add_argument("--entity", help="single country code; default pools all countries")
    p.add_argument("--pool", action="store_true", help="pool all countries (the default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ardl-lab", parents=[_global_flags(False)],
                                     description="Bootstrap ARDL-ECM toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    g = _global_flags(True)

    p = sub.add_parser("ingest", parents=[g], help="load a long or World Bank wide CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("long", "wb_wide"), default="long")
    p.add_argument("--passthrough", action="store_true", help="keep unknown indicator codes")

    p = sub.add_parser("impute", parents=[g], help="random-forest imputation of missing cells")
    p.add_argument("--input", required=True)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--min-leaf", type=int, default=2)
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--cross-entity", action="store_true", help="pool countries in one forest")

    p = sub.add_parser("rollcorr", parents=[g], help="rolling-correlation screening")
    _model_flags(p)
    p.add_argument("--widths", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--null", choices=("gaussian", "permutation"), default="gaussian")

    p = sub.add_parser("dlm", parents=[g], help="finite distributed-lag model, full and reduced")
    _model_flags(p)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--whole-series", action="store_true")

    p = sub.add_parser("ardl", parents=[g], help="ARDL-ECM fit or lag search")
    _model_flags(p)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--pmax", type=int, default=5)
    p.add_argument("--qmax", type=int, default=1)
    p.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    p.add_argument("--contemporaneous", action="store_true")
    p.add_argument("--alpha", type=float, default=0.05)

    for name, text in (("bounds", "bounds F test with bootstrap critical values"),
                       ("diagnose", "diagnostics battery on the ARDL-ECM")):
        p = sub.add_parser(name, parents=[g], help=text)
        _model_flags(p)
        p.add_argument("--p", type=int, default=2)
        p.add_argument("--q", type=int, default=1)
        p.add_argument("--B", type=int, default=2000)
        p.add_argument("--levels", type=float, nargs="+", default=[0.9, 0.95, 0.99])
        p.add_argument("--contemporaneous", action="store_true")
        if name == "bounds":
            p.add_argument("--dump-sample", action="store_true", help="write bootstrap F sample CSV")
        else:
            p.add_argument("--bg-order", type=int, default=1)
            p.add_argument("--lb-lags", type=int)

    p = sub.add_parser("simulate", parents=[g], help="synthetic G20-like panel as long CSV")
    p.add_argument("--missing-fraction", type=float, default=0.0)

    p = sub.add_parser("run", parents=[g], help="full seven-stage pipeline")
    p.add_argument("--input", help="input CSV (default: simulated panel)")

    p = sub.add_parser("report", parents=[g], help="emit report tables from a run directory")
    p.add_argument("run_dir")
    return parser


# --------------------------------------------------------------------------

def _emit(args, files: dict[str, str]) -> None:
    """Write ``{name: text}`` into --out, or print the JSON part to stdout."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text, "utf-8")
    else:
        for name, text in files.items():
            if name.endswith(".json"):
                sys.stdout.write(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    if args.config:
        return RunConfig.load(args.config)["seed"]
    env = os.environ.get("ARDLLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"ARDLLAB_SEED must be an integer, got {env!r}") from None
    return 0


def _variables(args) -> tuple[str, str, tuple[str, ...]]:
    if args.rq:
        if args.dep or args.x:
            raise ConfigError("use either --rq or --dep/--x, not both")
        pr = PRESETS[args.rq]
        return pr.name, pr.dependent, pr.regressors
    if not args.dep or not args.x:
        raise ConfigError("give --rq or both --dep and --x")
    return "custom", args.dep, tuple(args.x)


def _load(path: str):
    if not Path(path).is_file():
        raise ConfigError(f"input file not found: {path}")
    return load_long_csv(path)


def _data(args):
    name, dep, regs = _variables(args)
    panel = _load(args.input)
    if args.entity and args.pool:
        raise ConfigError("--entity and --pool are mutually exclusive")
    data = align_panel(panel, args.entity, dep, regs) if args.entity else align_pooled(panel, dep, regs)
    return name, dep, regs, panel, data


def _fit_row(ols) -> dict:
    return {"f": ols.f_stat, "p": ols.f_pvalue, "adj_r2": ols.adj_r2}


def cmd_ingest(args) -> None:
    if not Path(args.input).is_file():
        raise ConfigError(f"input file not found: {args.input}")
    if args.format == "long":
        panel = load_long_csv(args.input, passthrough=args.passthrough)
    else:
        panel = convert_wb_wide(args.input, passthrough=args.passthrough)
    stats = {k: (v.as_dict() if v else None) for k, v in describe(panel).items()}
    summary = dump_json({"entities": panel.entities, "years": panel.years, "columns": panel.columns,
                         "n_missing": panel.n_missing, "summary": stats})
    files = {"ingest.json": summary}
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_long_csv(panel, Path(args.out) / "panel.csv")
    _emit(args, files)


def cmd_impute(args) -> None:
    panel = _load(args.input)
    params = ForestParams(trees=args.trees, min_leaf=args.min_leaf, max_rounds=args.rounds,
                          tol=args.tol, seed=derive_seed(_seed(args), "impute"),
                          cross_entity=args.cross_entity, threads=args.threads)
    done, report = impute_panel(panel, params)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_long_csv(done, Path(args.out) / "imputed.csv")
    _emit(args, {"impute.json": dump_json(report.as_dict())})


def cmd_rollcorr(args) -> None:
    name, dep, regs = _variables(args)
    panel = _load(args.input)
    if args.entity:
        s = align_panel(panel, args.entity, dep, regs)
        y, xs = s.dependent, s.regressors
    else:
        segs = align_pooled(panel, dep, regs)
        y = sum(s.dependent for s in segs) / len(segs)
        xs = {r: sum(s.regressors[r] for s in segs) / len(segs) for r in regs}
    rows = screen_pairs(y, xs, dep, tuple(args.widths), args.B,
                        derive_seed(_seed(args), "screen"), args.threads, args.null)
    seqs = [[r.label, r.width, j, v] for r in rows for j, v in enumerate(r.correlations)]
    _emit(args, {
        "rollcorr.csv": write_csv(CSV_HEADER, (r.csv_row() for r in rows)),
        "rollcorr_sequences.csv": write_csv(("variables", "width", "window", "correlation"), seqs),
        "rollcorr.json": dump_json({"rq": name, "rows": [
            {"variables": r.label, "width": r.width, "sd_rolcor": r.sd_rolcor, "band_95": r.band_95,
             "band_05": r.band_05, "inside_band": r.inside_band, "n_degenerate": r.n_degenerate}
            for r in rows]}),
    })


def cmd_dlm(args) -> None:
    name, dep, regs, _, data = _data(args)
    full = fit_dlm(data, DlmSpec(q=args.q))
    red = reduce_model(full, args.alpha, args.whole_series)
    _emit(args, {"dlm.json": dump_json({
        "rq": name, "test": "DLM", "full": _fit_row(full.ols), "reduced": _fit_row(red.ols),
        "dropped": list(red.dropped), "kept": list(red.terms), "intercept_only": red.intercept_only})})


def cmd_ardl(args) -> None:
    name, dep, regs, _, data = _data(args)
    base = ArdlSpec(p=1, q=0, contemporaneous=args.contemporaneous)
    out = {"rq": name}
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise ConfigError("--p and --q go together")
        spec = ArdlSpec(p=args.p, q=args.q, contemporaneous=args.contemporaneous)
        fit = fit_ardl_ecm(data, spec)
    else:
        search = select_lags(data, base, args.pmax, args.qmax, args.criterion)
        p, q = search.selected
        spec = ArdlSpec(p=p, q=q, contemporaneous=args.contemporaneous)
        fit = fit_ardl_ecm(data, spec, start=search.start)
        out["lag_search"] = {"criterion": search.criterion, "selected": {"p": p, "q": q},
                             "table8": [dict(zip(TABLE_HEADERS["table8"], [name, r["p"], r["q"], r["aic"],
                                                                            r["bic"], r["mase"], r["gmrae"]]))
                                        for r in search.grid]}
    red, dropped = reduce_ardl(fit, args.alpha)
    out.update(test="ARDL-ECM", p=spec.p, q=spec.q, full=_fit_row(fit.ols), reduced=_fit_row(red),
               dropped=list(dropped), fit=fit.summary())
    _emit(args, {"ardl.json": dump_json(out)})


def _bootstrap(args) -> BootstrapParams:
    return BootstrapParams(B=args.B, seed=derive_seed(_seed(args), "bounds"),
                           levels=tuple(args.levels), threads=args.threads)


def cmd_bounds(args) -> None:
    name, dep, regs, _, data = _data(args)
    spec = ArdlSpec(p=args.p, q=args.q, contemporaneous=args.contemporaneous)
    res = bounds_test(data, spec, _bootstrap(args), keep_sample=True)
    files = {"bounds.json": dump_json(dict(res.as_dict(), rq=name))}
    if args.dump_sample:
        files["bounds_sample.csv"] = write_csv(("replication", "f_stat"),
                                               enumerate(res.bootstrap_sample.tolist()))
    _emit(args, files)


def cmd_diagnose(args) -> None:
    name, dep, regs, _, data = _data(args)
    spec = ArdlSpec(p=args.p, q=args.q, contemporaneous=args.contemporaneous)
    rep = run_battery(data, spec, _bootstrap(args), args.bg_order, args.lb_lags)
    row = [name, args.p, args.q, *[t.statistic for t in rep.tests]]
    _emit(args, {"diagnostics.json": dump_json(dict(rep.as_dict(), rq=name, order=list(BATTERY_ORDER))),
                 "table9.csv": write_csv(TABLE_HEADERS["table9"], [row])})


def cmd_simulate(args) -> None:
    panel = simulate_panel(derive_seed(_seed(args), "simulate"), missing_fraction=args.missing_fraction)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_long_csv(panel, out / "panel.csv")
    else:
        from .pipeline import _panel_rows
        sys.stdout.write(write_csv(("country", "indicator", "year", "value"), _panel_rows(panel)))


def cmd_run(args) -> None:
    cfg = RunConfig.load(args.config, args.seed) if args.config else RunConfig.from_dict({}, args.seed)
    if args.input:
        cfg = RunConfig.from_dict(dict(cfg.data, input=args.input), args.seed)
    if not args.out:
        raise ConfigError("run needs --out")
    run_pipeline(cfg, args.out, args.threads)
    emit_report(args.out)


def cmd_report(args) -> None:
    if not Path(args.run_dir).is_dir():
        raise ConfigError(f"run directory not found: {args.run_dir}")
    emit_report(args.run_dir)


COMMANDS = {
    "ingest": cmd_ingest, "impute": cmd_impute, "rollcorr": cmd_rollcorr, "dlm": cmd_dlm,
    "ardl": cmd_ardl, "bounds": cmd_bounds, "diagnose": cmd_diagnose, "simulate": cmd_simulate,
    "run": cmd_run, "report": cmd_report,
}


def _code_for(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, (ConfigError, ReportError)):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, (EstimationError, ArithmeticError)):
        return EXIT_ESTIMATION
    return EXIT_CONFIG  # remaining ValueErrors come from parameter validation


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ConfigError, ReportError, StageError, DataError, EstimationError,
            ValueError, ArithmeticError) as exc:
        print(f"ardl-lab {args.command}: {exc}", file=sys.stderr)
        return _code_for(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
