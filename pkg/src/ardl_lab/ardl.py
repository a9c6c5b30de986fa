"""ARDL models in error-correction form.

For a dependent series y and regressors x_j the estimated equation is

    dy_t = a0 + sum_{i=1..p} a_i dy_{t-i} + sum_j sum_{i=1..q} b_ji dx_{j,t-i}
           + l_1 y_{t-1} + sum_j l_{j+1} x_{j,t-1} + u_t

with an optional contemporaneous dx_{j,t} term and optional linear trend.
Long-run coefficients are ``theta_j = -l_{j+1} / l_1``.

Data may be a single :class:`AlignedSeriesSet` or a list of them (one per
entity). Lists are stacked row-wise after lags and differences are taken
inside each entity, so no lag ever crosses an entity boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .estat import DesignMatrix, EstimationError, OlsFit, backward_eliminate, ols_fit
from .frame import AlignedSeriesSet

__all__ = [
    "ArdlSpec",
    "EcmDesign",
    "ArdlFit",
    "LagSearchResult",
    "ForecastMetrics",
    "build_ecm_design",
    "build_levels_design",
    "fit_ardl_ecm",
    "reduce_ardl",
    "select_lags",
    "long_run_coefficients",
    "forecast_metrics",
    "as_segments",
    "LAMBDA_TOL",
]

LAMBDA_TOL = 1e-10
GMRAE_EPS = 1e-12

SeriesData = Union[AlignedSeriesSet, Sequence[AlignedSeriesSet]]


def as_segments(data: SeriesData) -> list[AlignedSeriesSet]:
    if isinstance(data, AlignedSeriesSet):
        return [data]
    segs = list(data)
    if not segs:
        raise EstimationError("no data segments")
    names = segs[0].regressor_names
    if any(s.regressor_names != names for s in segs):
        raise EstimationError("all entity segments must carry the same regressors")
    return segs


@dataclass(frozen=True)
class ArdlSpec:
    """Lag structure of an ECM regression.

    ``q`` is the number of lagged differences per regressor (uniform int, or a
    dict keyed by regressor). ``regressors=None`` takes every regressor in the
    data, in data order.
    """

    p: int = 1
    q: int | dict = 1
    regressors: tuple[str, ...] | None = None
    include_intercept: bool = True
    trend: bool = False
    contemporaneous: bool = False
    entity_dummies: bool = False

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        qs = self.q.values() if isinstance(self.q, dict) else [self.q]
        if any(int(v) < 0 for v in qs):
            raise ValueError("q must be non-negative")
        if self.regressors is not None:
            object.__setattr__(self, "regressors", tuple(self.regressors))

    def q_for(self, name: str) -> int:
        if isinstance(self.q, dict):
            return int(self.q.get(name, 0))
        return int(self.q)

    def max_lag(self, names: Sequence[str]) -> int:
        return max([self.p, *[self.q_for(n) for n in names]])


@dataclass(frozen=True)
class EcmDesign:
    """ECM design plus the bookkeeping needed to rebuild it from simulated data."""

    X: DesignMatrix
    dy: np.ndarray
    y_lag: np.ndarray  # y_{t-1} per row, for level-scale metrics
    segment: np.ndarray  # entity index per row
    time: np.ndarray  # position within the entity per row
    start: int
    level_names: tuple[str, ...]
    dependent: str
    regressors: tuple[str, ...]


def _regressor_names(segs: list[AlignedSeriesSet], spec: ArdlSpec) -> tuple[str, ...]:
    avail = segs[0].regressor_names
    if spec.regressors is None:
        return tuple(avail)
    missing = [r for r in spec.regressors if r not in avail]
    if missing:
        raise EstimationError(f"regressors not in data: {missing}")
    return spec.regressors


def _labels(dep: str, regs: Sequence[str], spec: ArdlSpec):
    short = [f"D.{dep}@{i}" for i in range(1, spec.p + 1)]
    for r in regs:
        if spec.contemporaneous:
            short.append(f"D.{r}@0")
        short += [f"D.{r}@{i}" for i in range(1, spec.q_for(r) + 1)]
    levels = [f"L1.{dep}", *[f"L1.{r}" for r in regs]]
    return short, levels


def _segment_columns(y: np.ndarray, xs: dict[str, np.ndarray], regs, spec: ArdlSpec,
                     start: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Short-run and level columns for rows ``start..n-1`` of one entity."""
    n = len(y)
    t = np.arange(start, n)
    dy = np.diff(y, prepend=np.nan)  # dy[t] = y[t] - y[t-1]
    cols = [dy[t - i] for i in range(1, spec.p + 1)]
    for r in regs:
        dx = np.diff(xs[r], prepend=np.nan)
        if spec.contemporaneous:
            cols.append(dx[t])
        cols += [dx[t - i] for i in range(1, spec.q_for(r) + 1)]
    levels = [y[t - 1], *[xs[r][t - 1] for r in regs]]
    return (np.column_stack(cols) if cols else np.empty((len(t), 0)),
            np.column_stack(levels), dy[t])


def build_ecm_design(data: SeriesData, spec: ArdlSpec, start: int | None = None) -> EcmDesign:
    """ECM design with columns: intercept, dy lags, dx lags, [trend], [entity dummies], levels.

    ``start`` forces the first usable row (per entity) so that several lag
    structures can be compared on one common sample.
    """
    segs = as_segments(data)
    regs = _regressor_names(segs, spec)
    dep = segs[0].dependent_name
    min_start = spec.max_lag(regs) + 1
    if start is None:
        start = min_start
    elif start < min_start:
        raise ValueError(f"start {start} is before the first valid row {min_start}")
    short_lbl, level_lbl = _labels(dep, regs, spec)
    blocks, levels, dys, ylag, seg_id, times = [], [], [], [], [], []
    for s_idx, seg in enumerate(segs):
        if seg.n <= start:
            raise EstimationError(f"entity {seg.entity or s_idx}: series length {seg.n} leaves no rows "
                                  f"after trimming {start} leading observations")
        sr, lv, d = _segment_columns(seg.dependent, seg.regressors, regs, spec, start)
        blocks.append(sr)
        levels.append(lv)
        dys.append(d)
        ylag.append(seg.dependent[start - 1:-1])
        seg_id.append(np.full(seg.n - start, s_idx))
        times.append(np.arange(start, seg.n))
    short = np.vstack(blocks)
    lev = np.vstack(levels)
    dy = np.concatenate(dys)
    seg_arr = np.concatenate(seg_id)
    t_arr = np.concatenate(times)
    nrows = len(dy)
    cols, names = [], []
    if spec.include_intercept:
        cols.append(np.ones((nrows, 1)))
        names.append("const")
    cols.append(short)
    names += short_lbl
    if spec.trend:
        cols.append(t_arr.astype(float).reshape(-1, 1))
        names.append("trend")
    if spec.entity_dummies and len(segs) > 1:
        for s_idx in range(1, len(segs)):
            cols.append((seg_arr == s_idx).astype(float).reshape(-1, 1))
            names.append(f"entity[{segs[s_idx].entity or s_idx}]")
    for j, nm in enumerate(level_lbl):
        if np.ptp(lev[:, j]) == 0:
            raise EstimationError(f"level column {nm} is constant over the estimation sample")
    cols.append(lev)
    names += level_lbl
    k = sum(c.shape[1] for c in cols)
    if nrows <= k:
        raise EstimationError(f"insufficient sample: {nrows} usable rows for {k} parameters")
    X = DesignMatrix(np.hstack(cols), tuple(names), spec.include_intercept)
    return EcmDesign(X, dy, np.concatenate(ylag), seg_arr, t_arr, start,
                     tuple(level_lbl), dep, tuple(regs))


def build_levels_design(data: SeriesData, spec: ArdlSpec, start: int | None = None):
    """Levels-form ARDL with the same lag content as the ECM design.

    Returns ``(X, y)`` with ``y_t`` regressed on ``y_{t-1..t-p-1}`` and
    ``x_{j,t-1..t-q-1}`` (plus ``x_{j,t}`` when contemporaneous).
    """
    segs = as_segments(data)
    regs = _regressor_names(segs, spec)
    dep = segs[0].dependent_name
    if start is None:
        start = spec.max_lag(regs) + 1
    rows, ys = [], []
    for seg in segs:
        t = np.arange(start, seg.n)
        cols = [seg.dependent[t - i] for i in range(1, spec.p + 2)]
        for r in regs:
            x = seg.regressors[r]
            first = 0 if spec.contemporaneous else 1
            cols += [x[t - i] for i in range(first, spec.q_for(r) + 2)]
        if spec.trend:
            cols.append(t.astype(float))
        rows.append(np.column_stack(cols))
        ys.append(seg.dependent[t])
    body = np.vstack(rows)
    names = [f"{dep}@{i}" for i in range(1, spec.p + 2)]
    for r in regs:
        first = 0 if spec.contemporaneous else 1
        names += [f"{r}@{i}" for i in range(first, spec.q_for(r) + 2)]
    if spec.trend:
        names.append("trend")
    if spec.include_intercept:
        body = np.hstack([np.ones((body.shape[0], 1)), body])
        names.insert(0, "const")
    return DesignMatrix(body, tuple(names), spec.include_intercept), np.concatenate(ys)


@dataclass(frozen=True)
class ArdlFit:
    ols: OlsFit
    spec: ArdlSpec
    design: EcmDesign
    lambdas: dict[str, float]
    short_run: dict[str, float]
    long_run: dict[str, float] | None
    adjustment_speed: float
    adjustment_t: float
    adjustment_p: float

    @property
    def regressors(self) -> tuple[str, ...]:
        return self.design.regressors

    def summary(self) -> dict:
        return {
            "p": self.spec.p, "q": self.spec.q,
            "ols": self.ols.summary(),
            "lambdas": self.lambdas,
            "short_run": self.short_run,
            "long_run": self.long_run,
            "adjustment_speed": self.adjustment_speed,
            "adjustment_t": self.adjustment_t,
            "adjustment_p": self.adjustment_p,
        }


def long_run_coefficients(fit_or_lambdas, names: Sequence[str] | None = None) -> dict[str, float]:
    """``theta_j = -lambda_{j+1} / lambda_1`` named by regressor.

    Accepts an :class:`ArdlFit` or a plain lambda sequence (``names`` then
    labels the regressors). Raises ``ValueError`` when ``|lambda_1| <= 1e-10``.
    """
    if isinstance(fit_or_lambdas, ArdlFit):
        lam = list(fit_or_lambdas.lambdas.values())
        names = list(fit_or_lambdas.regressors)
    else:
        lam = [float(v) for v in fit_or_lambdas]
        names = list(names) if names is not None else [f"x{j}" for j in range(1, len(lam))]
    if len(names) != len(lam) - 1:
        raise ValueError("need one name per regressor level term")
    l1 = lam[0]
    if not abs(l1) > LAMBDA_TOL:
        raise ValueError("long-run coefficients undefined: lambda_1 is zero (no error correction)")
    return {nm: -lj / l1 for nm, lj in zip(names, lam[1:])}


def _fit_from_design(design: EcmDesign, spec: ArdlSpec) -> ArdlFit:
    fit = ols_fit(design.X, design.dy)
    lambdas = {nm: fit.coef_of(nm) for nm in design.level_names}
    short = {nm: fit.coef_of(nm) for nm in fit.names if nm not in design.level_names}
    try:
        lr = long_run_coefficients(list(lambdas.values()), design.regressors)
    except ValueError:
        lr = None
    l1 = design.level_names[0]
    i = fit.names.index(l1)
    return ArdlFit(fit, spec, design, lambdas, short, lr, float(fit.coef[i]),
                   float(fit.t_values[i]), float(fit.p_values[i]))


def fit_ardl_ecm(data: SeriesData, spec: ArdlSpec, start: int | None = None) -> ArdlFit:
    return _fit_from_design(build_ecm_design(data, spec, start), spec)


def reduce_ardl(fit: ArdlFit, alpha: float = 0.05, keep_levels: bool = False):
    """Backward elimination of insignificant ECM terms; returns ``(OlsFit, dropped)``."""
    protected = ["const", *(fit.design.level_names if keep_levels else [])]
    red, _, dropped = backward_eliminate(fit.design.X, fit.design.dy, alpha, protected)
    return red, dropped


@dataclass(frozen=True)
class ForecastMetrics:
    mase: float
    gmrae: float
    n_used: int
    n_excluded: int  # GMRAE terms dropped by the epsilon guard
    defined: bool


def _scaled_metrics(errors: np.ndarray, naive: np.ndarray, scale: float) -> ForecastMetrics:
    ae, an = np.abs(errors), np.abs(naive)
    eps = GMRAE_EPS * scale
    denom = an.mean() if len(an) else 0.0
    if len(an) == 0 or not np.any(an > eps):
        return ForecastMetrics(math.nan, math.nan, 0, len(an), False)
    mase = float(ae.mean() / denom)
    ok = an > eps
    with np.errstate(divide="ignore"):
        logs = np.log(ae[ok] / an[ok])
    gmrae = float(np.exp(logs.mean()))
    return ForecastMetrics(mase, gmrae, int(ok.sum()), int((~ok).sum()), True)


def forecast_metrics(actual, fitted) -> ForecastMetrics:
    """MASE and GMRAE against the one-step naive forecast ``y_{t-1}``.

    Both use periods t >= 2 (index 1 onwards). GMRAE skips periods whose naive
    error is below ``1e-12 * max|y|`` and reports how many were skipped.
    """
    a = np.asarray(actual, dtype=float)
    f = np.asarray(fitted, dtype=float)
    if a.shape != f.shape:
        raise ValueError("actual and fitted must be aligned")
    if len(a) < 3:
        raise ValueError("need at least 3 observations")
    errors = a[1:] - f[1:]
    naive = a[1:] - a[:-1]
    return _scaled_metrics(errors, naive, float(np.max(np.abs(a))))


@dataclass(frozen=True)
class LagSearchResult:
    grid: list[dict]
    selected: tuple[int, int]
    criterion: str
    start: int

    def as_rows(self) -> list[dict]:
        return [dict(r) for r in self.grid]


def select_lags(data: SeriesData, spec: ArdlSpec, p_max: int, q_max: int,
                criterion: str = "aic") -> LagSearchResult:
    """Evaluate every (p, q) with 1 <= p <= p_max, 0 <= q <= q_max on a common sample.

    The selected pair minimizes ``criterion``; ties go to smaller p, then
    smaller q. MASE/GMRAE are in-sample on the level scale: the fitted level
    is ``y_{t-1} + fitted dy_t`` and the naive forecast is ``y_{t-1}``.
    """
    if criterion not in ("aic", "bic"):
        raise ValueError("criterion must be 'aic' or 'bic'")
    if p_max < 1 or q_max < 0:
        raise ValueError("need p_max >= 1 and q_max >= 0")
    segs = as_segments(data)
    _regressor_names(segs, spec)
    start = max(p_max, q_max) + 1
    grid = []
    for p in range(1, p_max + 1):
        for q in range(0, q_max + 1):
            cell = replace(spec, p=p, q=q)
            row = {"p": p, "q": q}
            try:
                fit = fit_ardl_ecm(segs, cell, start=start)
            except EstimationError as exc:
                row.update(aic=math.nan, bic=math.nan, mase=math.nan, gmrae=math.nan,
                           error=str(exc))
                grid.append(row)
                continue
            d = fit.design
            scale = float(np.max(np.abs(d.y_lag + d.dy)))
            m = _scaled_metrics(fit.ols.residuals, d.dy, scale)
            row.update(aic=fit.ols.aic, bic=fit.ols.bic, mase=m.mase, gmrae=m.gmrae)
            grid.append(row)
    ok = [r for r in grid if "error" not in r]
    if not ok:
        raise EstimationError("no estimable (p, q) cell in the search grid")
    best = min(ok, key=lambda r: (r[criterion], r["p"], r["q"]))
    return LagSearchResult(grid, (best["p"], best["q"]), criterion, start)
