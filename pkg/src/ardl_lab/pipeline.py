"""Research-question presets, run configuration and the seven-stage batch pipeline.

Stages run in order: ingest, impute, screen, dlm, ardl, bounds, diagnostics.
Each stage writes ``<stage>.json`` plus CSV tables into the run directory.
Files are written with a ``.partial`` suffix and renamed once the stage
finishes, so a failed stage leaves its partial output visibly marked.
``manifest.json`` pins versions, seeds, the config hash and a sha256 of every
artifact; it holds no timestamps or thread counts, so identical configs give
byte-identical manifests.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import __version__
from .ardl import ArdlSpec, fit_ardl_ecm, reduce_ardl, select_lags
from .bounds import BootstrapParams, bounds_test
from .dgp import GENERATOR_VERSION, derive_seed, simulate_panel
from .diagnostics import BATTERY_ORDER, breusch_pagan, run_battery
from .dlm import DlmSpec, fit_dlm, reduce_model
from .estat import EstimationError
from .frame import (CODE_MAP_VERSION, AlignedSeriesSet, DataError, PanelTable, align_panel,
                    align_pooled, convert_wb_wide, describe, load_long_csv)
from .imputation import ForestParams, impute_panel
from .rollcorr import CSV_HEADER as ROLLCORR_HEADER
from .rollcorr import screen_pairs

__all__ = [
    "ConfigError", "StageError", "ReportError", "RqPreset", "PRESETS", "PRESET_NOTE",
    "RunConfig", "STAGES", "SCHEMA_VERSION", "run_pipeline", "emit_report",
    "TABLE_HEADERS", "write_csv", "dump_json", "jsonable",
]

SCHEMA_VERSION = 1
STAGES = ("ingest", "impute", "screen", "dlm", "ardl", "bounds", "diagnostics")

TABLE_HEADERS = {
    "table2": ("rq", "p_value", "homoscedasticity"),
    "table7": ("rq", "test", "full_f", "full_p", "full_adj_r2",
               "reduced_f", "reduced_p", "reduced_adj_r2"),
    "table8": ("rq", "p", "q", "aic", "bic", "mase", "gmrae"),
    "table9": ("rq", "p", "q", "test1", "test2", "test3", "test4", "test5", "test6"),
    "rollcorr": ROLLCORR_HEADER,
}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (exit code 2)."""


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


class ReportError(RuntimeError):
    def __init__(self, missing: list[str]):
        super().__init__(f"incomplete run, missing stages: {', '.join(missing)}")
        self.missing = missing


# --------------------------------------------------------------------------
# presets

@dataclass(frozen=True)
class RqPreset:
    name: str
    dependent: str
    regressors: tuple[str, ...]
    hypotheses: tuple[tuple[str, str], ...]  # (label, single regressor)


def _hyp(prefix: str, regs) -> tuple[tuple[str, str], ...]:
    return tuple((f"{prefix}{chr(ord('a') + i)}", r) for i, r in enumerate(regs))


_LPI = ("LPI1", "LPI2", "LPI3", "LPI4", "LPI5", "LPI6")

PRESETS = {
    "RQ1": RqPreset("RQ1", "TRD", _LPI, _hyp("H1", _LPI)),
    "RQ2": RqPreset("RQ2", "LPI3", ("TRD", "TRF"), _hyp("H2", ("TRD", "TRF"))),
    "RQ3": RqPreset("RQ3", "ENS", _LPI, _hyp("H3", _LPI)),
    "RQ4": RqPreset("RQ4", "ECG", ("ENS", "LPI1", "TRD", "LPI3", "TRF"),
                    _hyp("H4", ("ENS", "LPI1", "TRD", "LPI3", "TRF"))),
}

PRESET_NOTE = ("H1b-H1f and H3b-H3f are written with LPI1 as the regressor in the source "
               "hypothesis tables while their prose names LPI2..LPI6; presets follow the prose.")


# --------------------------------------------------------------------------
# configuration

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "input": None,
    "input_format": "long",
    "passthrough_codes": False,
    "simulate": {"missing_fraction": 0.05},
    "rqs": ["RQ1", "RQ2", "RQ3", "RQ4"],
    "variables": None,
    "entity": None,
    "seed": 0,
    "imputation": {"trees": 100, "min_leaf": 2, "rounds": 10, "tol": 1e-3, "cross_entity": False},
    "rollcorr": {"widths": [2, 3, 4], "B": 1000, "null": "gaussian"},
    "dlm": {"q": 2, "alpha": 0.05, "whole_series": False},
    "ardl": {"p_max": 5, "q_max": 1, "criterion": "aic", "contemporaneous": False,
             "entity_dummies": False, "alpha": 0.05},
    "bounds": {"p": 2, "q": 1, "B": 2000, "levels": [0.9, 0.95, 0.99]},
    "diagnostics": {"bg_order": 1, "lb_lags": None},
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path}{k}")
        if isinstance(base[k], dict) and v is not None:
            if not isinstance(v, dict):
                raise ConfigError(f"config key {path}{k} must be an object")
            out[k] = _merge(base[k], v, f"{path}{k}.")
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``data`` holds the full canonical dictionary."""

    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    @classmethod
    def from_dict(cls, raw: dict | None = None, seed: int | None = None) -> "RunConfig":
        merged = _merge(DEFAULTS, raw or {})
        env = os.environ.get("ARDLLAB_SEED")
        if env is not None:
            try:
                merged["seed"] = int(env)
            except ValueError:
                raise ConfigError(f"ARDLLAB_SEED must be an integer, got {env!r}") from None
        if seed is not None:
            merged["seed"] = int(seed)
        cfg = cls(merged)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path, seed: int | None = None) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw, seed)

    def __getitem__(self, key):
        return self.data[key]

    def validate(self) -> None:
        d = self.data
        if d["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {d['schema_version']}")
        if d["input"] is not None and not Path(d["input"]).is_file():
            raise ConfigError(f"input file not found: {d['input']}")
        if d["input_format"] not in ("long", "wb_wide"):
            raise ConfigError("input_format must be 'long' or 'wb_wide'")
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            raise ConfigError("seed must be a non-negative integer")
        if d["variables"] is None:
            bad = [r for r in d["rqs"] if r not in PRESETS]
            if bad or not d["rqs"]:
                raise ConfigError(f"unknown research-question presets: {bad or 'none given'}")
        else:
            v = d["variables"]
            if not isinstance(v, dict) or set(v) != {"dependent", "regressors"} or not v["regressors"]:
                raise ConfigError("variables must be {'dependent': str, 'regressors': [str, ...]}")
        try:
            self.forest_params(1)
            BootstrapParams(B=d["bounds"]["B"], levels=tuple(d["bounds"]["levels"]))
            ArdlSpec(p=d["bounds"]["p"], q=d["bounds"]["q"])
            DlmSpec(q=d["dlm"]["q"])
            if d["ardl"]["criterion"] not in ("aic", "bic"):
                raise ValueError("ardl.criterion must be 'aic' or 'bic'")
            if d["ardl"]["p_max"] < 1 or d["ardl"]["q_max"] < 0:
                raise ValueError("ardl needs p_max >= 1 and q_max >= 0")
            if d["rollcorr"]["B"] < 100 or any(int(w) < 2 for w in d["rollcorr"]["widths"]):
                raise ValueError("rollcorr needs B >= 100 and widths >= 2")
            if d["rollcorr"]["null"] not in ("gaussian", "permutation"):
                raise ValueError("rollcorr.null must be 'gaussian' or 'permutation'")
            if not 0 <= d["simulate"]["missing_fraction"] < 1:
                raise ValueError("simulate.missing_fraction must lie in [0, 1)")
        except (ValueError, TypeError, KeyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def canonical(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def seed_for(self, stage: str) -> int:
        return derive_seed(self.data["seed"], stage)

    def forest_params(self, threads: int) -> ForestParams:
        b = self.data["imputation"]
        return ForestParams(trees=b["trees"], min_leaf=b["min_leaf"], max_rounds=b["rounds"],
                            tol=b["tol"], seed=self.seed_for("impute"),
                            cross_entity=b["cross_entity"], threads=threads)

    def models(self) -> list[RqPreset]:
        v = self.data["variables"]
        if v is not None:
            regs = tuple(v["regressors"])
            return [RqPreset("custom", v["dependent"], regs, _hyp("Hx", regs))]
        return [PRESETS[r] for r in self.data["rqs"]]


# --------------------------------------------------------------------------
# serialization helpers

def jsonable(obj):
    """Plain JSON types; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else "NA"
    return str(v)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


class _Writer:
    """Stage artifact writer: ``name.partial`` until :meth:`commit`."""

    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, str] = {}

    def put(self, name: str, text: str) -> None:
        (self.out / f"{name}.partial").write_text(text, "utf-8")
        self.files[name] = _sha(text)

    def commit(self) -> dict[str, str]:
        for name in self.files:
            os.replace(self.out / f"{name}.partial", self.out / name)
        done, self.files = self.files, {}
        return done


# --------------------------------------------------------------------------
# stages

@dataclass
class _Context:
    config: RunConfig
    threads: int
    log: Callable[[str, str], None]
    raw: PanelTable | None = None
    panel: PanelTable | None = None
    results: dict = field(default_factory=dict)

    def data_for(self, rq: RqPreset):
        ent = self.config["entity"]
        if ent is None:
            return align_pooled(self.panel, rq.dependent, rq.regressors)
        return align_panel(self.panel, ent, rq.dependent, rq.regressors)

    def screen_series(self, rq: RqPreset) -> AlignedSeriesSet:
        """Per-year cross-entity mean (pooled runs) or the chosen entity's series."""
        ent = self.config["entity"]
        if ent is not None:
            return align_panel(self.panel, ent, rq.dependent, rq.regressors)
        p = self.panel
        if p.missing.any():
            raise DataError("screening needs a complete panel")
        mean = lambda k: p.values[:, p.columns.index(k), :].mean(axis=0)  # noqa: E731
        return AlignedSeriesSet(mean(rq.dependent), {r: mean(r) for r in rq.regressors},
                                np.asarray(p.years), "mean", rq.dependent)


def _panel_rows(panel: PanelTable):
    for e, ent in enumerate(panel.entities):
        for c, col in enumerate(panel.columns):
            for t, yr in enumerate(panel.years):
                yield [ent, col, yr, None if panel.missing[e, c, t] else float(panel.values[e, c, t])]


def _stage_ingest(ctx: _Context, w: _Writer) -> None:
    cfg = ctx.config
    if cfg["input"] is None:
        frac = cfg["simulate"]["missing_fraction"]
        ctx.raw = simulate_panel(cfg.seed_for("simulate"), missing_fraction=frac)
        source = {"simulated": True, "missing_fraction": frac}
    elif cfg["input_format"] == "long":
        ctx.raw = load_long_csv(cfg["input"], passthrough=cfg["passthrough_codes"])
        source = {"simulated": False}
    else:
        ctx.raw = convert_wb_wide(cfg["input"], passthrough=cfg["passthrough_codes"])
        source = {"simulated": False}
    p = ctx.raw
    stats = {k: (v.as_dict() if v is not None else None) for k, v in describe(p).items()}
    w.put("ingest.json", dump_json({
        "source": source, "entities": p.entities, "years": p.years, "columns": p.columns,
        "n_missing": p.n_missing, "summary": stats}))
    w.put("ingest.csv", write_csv(("country", "indicator", "year", "value"), _panel_rows(p)))
    ctx.log("ingest", f"{len(p.entities)} entities, {len(p.columns)} indicators, "
                      f"{len(p.years)} years, {p.n_missing} missing cells")


def _stage_impute(ctx: _Context, w: _Writer) -> None:
    panel, report = impute_panel(ctx.raw, ctx.config.forest_params(ctx.threads))
    if panel.n_missing:
        raise DataError(f"{panel.n_missing} cells could not be imputed: {report.warnings}")
    ctx.panel = panel
    w.put("impute.json", dump_json(report.as_dict()))
    w.put("impute.csv", write_csv(("country", "indicator", "year", "value"), _panel_rows(panel)))
    ctx.log("impute", f"{report.total_imputed} cells in {report.rounds} rounds "
                      f"({report.mode}), final change {report.final_change:.3g}")


def _stage_screen(ctx: _Context, w: _Writer) -> None:
    b = ctx.config["rollcorr"]
    out, seqs = {}, []
    for i, rq in enumerate(ctx.config.models()):
        s = ctx.screen_series(rq)
        rows = screen_pairs(s.dependent, s.regressors, rq.dependent, tuple(b["widths"]), b["B"],
                            derive_seed(ctx.config.seed_for("screen"), rq.name), ctx.threads, b["null"])
        out[rq.name] = [{"variables": r.label, "width": r.width, "sd_rolcor": r.sd_rolcor,
                         "band_95": r.band_95, "band_05": r.band_05, "inside_band": r.inside_band,
                         "n_degenerate": r.n_degenerate} for r in rows]
        w.put(f"screen_{rq.name}.csv", write_csv(ROLLCORR_HEADER, (r.csv_row() for r in rows)))
        for r in rows:
            seqs += [[rq.name, r.label, r.width, j, v] for j, v in enumerate(r.correlations)]
        flagged = sum(not r.inside_band for r in rows)
        ctx.log("screen", f"{rq.name}: {len(rows)} rows, {flagged} outside the white-noise band")
    series = "mean" if ctx.config["entity"] is None else ctx.config["entity"]
    w.put("screen.json", dump_json({"series": series, "null": b["null"], "results": out}))
    w.put("screen_sequences.csv",
          write_csv(("rq", "variables", "width", "window", "correlation"), seqs))
    ctx.results["screen"] = out


def _fit_row(ols) -> dict:
    return {"f": ols.f_stat, "p": ols.f_pvalue, "adj_r2": ols.adj_r2}


def _stage_dlm(ctx: _Context, w: _Writer) -> None:
    b = ctx.config["dlm"]
    out = {}
    for rq in ctx.config.models():
        full = fit_dlm(ctx.data_for(rq), DlmSpec(q=b["q"]))
        red = reduce_model(full, b["alpha"], b["whole_series"])
        bp = breusch_pagan(full.ols, full.X)
        out[rq.name] = {"full": _fit_row(full.ols), "reduced": _fit_row(red.ols),
                        "dropped": list(red.dropped), "kept": list(red.terms),
                        "intercept_only": red.intercept_only,
                        "breusch_pagan": {"statistic": bp.statistic, "p_value": bp.p_value}}
        ctx.log("dlm", f"{rq.name}: full adj R2 {full.ols.adj_r2:.4f}, "
                       f"reduced adj R2 {red.ols.adj_r2:.4f} ({len(red.dropped)} terms dropped)")
    w.put("dlm.json", dump_json(out))
    w.put("dlm.csv", write_csv(("rq", "full_f", "full_p", "full_adj_r2",
                                "reduced_f", "reduced_p", "reduced_adj_r2"),
                               ([k, v["full"]["f"], v["full"]["p"], v["full"]["adj_r2"],
                                 v["reduced"]["f"], v["reduced"]["p"], v["reduced"]["adj_r2"]]
                                for k, v in out.items())))
    ctx.results["dlm"] = out


def _ardl_spec(ctx: _Context, p: int, q: int) -> ArdlSpec:
    a = ctx.config["ardl"]
    return ArdlSpec(p=p, q=q, contemporaneous=a["contemporaneous"],
                    entity_dummies=a["entity_dummies"] and ctx.config["entity"] is None)


def _stage_ardl(ctx: _Context, w: _Writer) -> None:
    a = ctx.config["ardl"]
    out = {}
    for rq in ctx.config.models():
        data = ctx.data_for(rq)
        search = select_lags(data, _ardl_spec(ctx, 1, 0), a["p_max"], a["q_max"], a["criterion"])
        p, q = search.selected
        fit = fit_ardl_ecm(data, _ardl_spec(ctx, p, q), start=search.start)
        red, dropped = reduce_ardl(fit, a["alpha"])
        sel = next(r for r in search.grid if (r["p"], r["q"]) == (p, q))
        out[rq.name] = {"selected": {"p": p, "q": q, "aic": sel["aic"], "bic": sel["bic"],
                                     "mase": sel["mase"], "gmrae": sel["gmrae"]},
                        "grid": search.grid, "full": _fit_row(fit.ols), "reduced": _fit_row(red),
                        "dropped": list(dropped), "long_run": fit.long_run,
                        "adjustment_speed": fit.adjustment_speed,
                        "adjustment_p": fit.adjustment_p}
        ctx.log("ardl", f"{rq.name}: selected p={p}, q={q} by {a['criterion']}")
    w.put("ardl.json", dump_json(out))
    w.put("ardl.csv", write_csv(TABLE_HEADERS["table8"],
                                ([k, v["selected"]["p"], v["selected"]["q"], v["selected"]["aic"],
                                  v["selected"]["bic"], v["selected"]["mase"], v["selected"]["gmrae"]]
                                 for k, v in out.items())))
    ctx.results["ardl"] = out


def _bounds_params(ctx: _Context, rq: RqPreset) -> BootstrapParams:
    b = ctx.config["bounds"]
    return BootstrapParams(B=b["B"], seed=derive_seed(ctx.config.seed_for("bounds"), rq.name),
                           levels=tuple(b["levels"]), threads=ctx.threads)


def _stage_bounds(ctx: _Context, w: _Writer) -> None:
    b = ctx.config["bounds"]
    out, objs = {}, {}
    for rq in ctx.config.models():
        res = bounds_test(ctx.data_for(rq), _ardl_spec(ctx, b["p"], b["q"]), _bounds_params(ctx, rq))
        objs[rq.name] = res
        out[rq.name] = res.as_dict()
        ctx.log("bounds", f"{rq.name}: {res.narrative}")
    levels = [f"{lv:g}" for lv in b["levels"]]
    w.put("bounds.json", dump_json(out))
    w.put("bounds.csv", write_csv(("rq", "f_stat", "p_value", *[f"cv_{lv}" for lv in levels]),
                                  ([k, v["f_stat"], v["p_value"], *[v["critical_values"][lv] for lv in levels]]
                                   for k, v in out.items())))
    ctx.results["bounds"] = objs


def _stage_diagnostics(ctx: _Context, w: _Writer) -> None:
    b, d = ctx.config["bounds"], ctx.config["diagnostics"]
    out = {}
    for rq in ctx.config.models():
        rep = run_battery(ctx.data_for(rq), _ardl_spec(ctx, b["p"], b["q"]), _bounds_params(ctx, rq),
                          d["bg_order"], d["lb_lags"], bounds_result=ctx.results["bounds"][rq.name])
        out[rq.name] = rep.as_dict()
        failed = [t.name for t in rep.tests if t.error]
        ctx.log("diagnostics", f"{rq.name}: {len(rep.tests)} tests"
                               + (f", failed: {failed}" if failed else ""))
    w.put("diagnostics.json", dump_json(out))
    w.put("diagnostics.csv", write_csv(("rq", "p", "q", *BATTERY_ORDER),
                                       ([k, v["p"], v["q"], *[t["statistic"] for t in v["tests"]]]
                                        for k, v in out.items())))


_RUNNERS = {
    "ingest": _stage_ingest, "impute": _stage_impute, "screen": _stage_screen,
    "dlm": _stage_dlm, "ardl": _stage_ardl, "bounds": _stage_bounds,
    "diagnostics": _stage_diagnostics,
}


def _default_log(stage: str, msg: str) -> None:
    print(f"[{stage}] {msg}", file=sys.stderr, flush=True)


def _manifest(cfg: RunConfig, stages: list[dict], complete: bool) -> dict:
    inp = cfg["input"]
    source = ({"simulated": True} if inp is None else
              {"name": Path(inp).name, "sha256": hashlib.sha256(Path(inp).read_bytes()).hexdigest()})
    canon = json.loads(cfg.canonical())
    if inp is not None:
        canon["input"] = Path(inp).name  # keep the manifest independent of the checkout location
    return {
        "schema_version": SCHEMA_VERSION,
        "package": "ardl-lab", "version": __version__,
        "numpy": np.__version__, "scipy": scipy.__version__,
        "generator_version": GENERATOR_VERSION, "code_map_version": CODE_MAP_VERSION,
        "config_hash": cfg.config_hash(), "config": canon,
        "global_seed": cfg["seed"], "seeds": {s: cfg.seed_for(s) for s in ("simulate", *STAGES)},
        "input": source, "pooling": "pooled" if cfg["entity"] is None else f"entity:{cfg['entity']}",
        "notes": [PRESET_NOTE,
                  "rolling-correlation screening uses the per-year cross-entity mean in pooled runs",
                  "Table 2 reports the Breusch-Pagan test of the full DLM"],
        "stages": stages, "complete": complete,
    }


def run_pipeline(config: RunConfig, out: str | Path, threads: int = 1,
                 log: Callable[[str, str], None] = _default_log) -> dict:
    """Execute all stages into ``out``; returns the manifest dict.

    Raises :class:`StageError` naming the failed stage. Input problems are
    caught by :meth:`RunConfig.validate` before anything is written.
    """
    config.validate()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = _Context(config, max(1, int(threads)), log)
    done = []
    for stage in STAGES:
        w = _Writer(out)
        try:
            _RUNNERS[stage](ctx, w)
        except (DataError, EstimationError, ValueError, ArithmeticError) as exc:
            (out / "manifest.json.partial").write_text(
                dump_json(_manifest(config, done + [{"name": stage, "status": "failed",
                                                     "error": str(exc)}], False)), "utf-8")
            log(stage, f"failed: {exc}")
            raise StageError(stage, exc) from exc
        done.append({"name": stage, "status": "ok", "artifacts": w.commit()})
    manifest = _manifest(config, done, True)
    (out / "manifest.json").write_text(dump_json(manifest), "utf-8")
    stale = out / "manifest.json.partial"
    if stale.exists():
        stale.unlink()
    return manifest


# --------------------------------------------------------------------------
# report

def emit_report(run_dir: str | Path) -> dict:
    """Write table2/7/8/9 CSVs, rollcorr CSVs and ``report.json``; returns the report dict."""
    run = Path(run_dir)
    missing = [s for s in ("screen", "dlm", "ardl", "bounds", "diagnostics")
               if not (run / f"{s}.json").is_file()]
    if not (run / "manifest.json").is_file():
        missing = ["manifest", *missing]
    if missing:
        raise ReportError(missing)
    load = lambda s: json.loads((run / f"{s}.json").read_text("utf-8"))  # noqa: E731
    screen, dlm, ardl, diag = load("screen"), load("dlm"), load("ardl"), load("diagnostics")
    t2 = [[rq, v["breusch_pagan"]["p_value"], v["breusch_pagan"]["statistic"]] for rq, v in dlm.items()]
    t7 = []
    for rq in dlm:
        for label, src in (("DLM", dlm), ("ARDL-ECM", ardl)):
            f, r = src[rq]["full"], src[rq]["reduced"]
            t7.append([rq, label, f["f"], f["p"], f["adj_r2"], r["f"], r["p"], r["adj_r2"]])
    t8 = [[rq, s["p"], s["q"], s["aic"], s["bic"], s["mase"], s["gmrae"]]
          for rq, s in ((k, v["selected"]) for k, v in ardl.items())]
    t9 = [[rq, v["p"], v["q"], *[t["statistic"] for t in v["tests"]]] for rq, v in diag.items()]
    tables = {"table2": t2, "table7": t7, "table8": t8, "table9": t9}
    for name, rows in tables.items():
        (run / f"{name}.csv").write_text(write_csv(TABLE_HEADERS[name], rows), "utf-8")
    rc = {}
    for rq, rows in screen["results"].items():
        body = [[r["variables"], r["width"], r["sd_rolcor"], r["band_95"], r["band_05"]] for r in rows]
        (run / f"rollcorr_{rq}.csv").write_text(write_csv(ROLLCORR_HEADER, body), "utf-8")
        rc[rq] = body
    manifest = json.loads((run / "manifest.json").read_text("utf-8"))
    report = {"schema_version": SCHEMA_VERSION, "config_hash": manifest["config_hash"],
              "headers": {k: list(v) for k, v in TABLE_HEADERS.items()},
              "tables": {**tables, "rollcorr": rc},
              "test_labels": {f"test{i}": n for i, n in enumerate(BATTERY_ORDER, 1)},
              "variables_note": "rollcorr rows are labelled '<dependent> vs <regressor>' in preset order"}
    (run / "report.json").write_text(dump_json(report), "utf-8")
    return report
