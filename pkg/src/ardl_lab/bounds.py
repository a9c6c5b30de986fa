"""Bounds F test for a levels relationship, calibrated by a residual bootstrap.

The statistic is the Wald F that every lagged-level coefficient in the ECM is
zero. Critical values come from re-estimating that F on data regenerated
under the restricted (no levels) model:

1. fit the restricted ECM and center its residuals;
2. for replication b (own RNG stream keyed by ``(seed, b)``) draw residuals
   iid with replacement, rebuild dy recursively with the restricted
   coefficients while regressor paths stay fixed, and cumulate y from the
   observed pre-sample level;
3. compute the F statistic on the rebuilt data;
4. critical values are nearest-rank quantiles ``F_(ceil(level * B))``.

Replications run in fixed chunks of ``CHUNK`` so that results do not depend
on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ardl import ArdlSpec, EcmDesign, SeriesData, as_segments, build_ecm_design
from .dgp import rng_for
from .estat import (DesignMatrix, EstimationError, OlsFit, degenerate_rss, ols_fit, rss_batch,
                    wald_f)

__all__ = [
    "BootstrapParams",
    "PssResult",
    "BoundsResult",
    "pss_f_statistic",
    "bootstrap_critical_values",
    "bounds_test",
    "nearest_rank_quantile",
]

CHUNK = 64


@dataclass(frozen=True)
class BootstrapParams:
    B: int = 2000
    seed: int = 0
    levels: tuple[float, ...] = (0.90, 0.95, 0.99)
    threads: int = 1

    def __post_init__(self):
        if self.B < 99:
            raise ValueError("bootstrap needs at least 99 replications")
        lv = tuple(float(v) for v in self.levels)
        if not lv or any(not 0 < v < 1 for v in lv) or any(b <= a for a, b in zip(lv, lv[1:])):
            raise ValueError("levels must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "levels", lv)


@dataclass(frozen=True)
class PssResult:
    f_stat: float
    m: int
    unrestricted: OlsFit
    restricted: OlsFit
    f_summed: float | None = None  # single-restriction form sum(lambda) = 0
    p_summed: float | None = None


@dataclass(frozen=True)
class BoundsResult:
    f_stat: float
    m: int
    critical_values: dict[float, float]
    p_value: float
    decisions: dict[float, bool]
    B: int
    seed: int
    narrative: str
    f_summed: float | None = None
    bootstrap_sample: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self, include_sample: bool = False) -> dict:
        d = {
            "f_stat": self.f_stat, "m": self.m,
            "critical_values": {f"{k:g}": v for k, v in self.critical_values.items()},
            "p_value": self.p_value,
            "decisions": {f"{k:g}": ("reject" if v else "fail to reject")
                          for k, v in self.decisions.items()},
            "B": self.B, "seed": self.seed, "narrative": self.narrative,
        }
        if self.f_summed is not None:
            d["f_summed"] = self.f_summed
        if include_sample and self.bootstrap_sample is not None:
            d["bootstrap_sample"] = self.bootstrap_sample.tolist()
        return d


def nearest_rank_quantile(sorted_sample: np.ndarray, level: float) -> float:
    B = len(sorted_sample)
    r = max(1, math.ceil(level * B - 1e-9))
    return float(sorted_sample[min(r, B) - 1])


def _restricted_design(design: EcmDesign) -> DesignMatrix:
    return design.X.drop(design.level_names)


def pss_f_statistic(data: SeriesData, spec: ArdlSpec, summed: bool = False) -> PssResult:
    """Joint F that all lagged-level coefficients are zero (m = 1 + #regressors).

    With ``summed`` the single restriction ``sum(lambda) = 0`` is also tested,
    by replacing the levels with ``x_{j,t-1} - y_{t-1}``.
    """
    design = build_ecm_design(data, spec)
    unres = ols_fit(design.X, design.dy)
    res = ols_fit(_restricted_design(design), design.dy)
    m = len(design.level_names)
    f, _ = wald_f(unres, res, m)
    fs = ps = None
    if summed:
        X = design.X
        ylag = X.column(design.level_names[0])
        diffs = np.column_stack([X.column(nm) - ylag for nm in design.level_names[1:]]) \
            if m > 1 else np.empty((X.n, 0))
        Xs = _restricted_design(design).append(diffs, [f"{nm}-y" for nm in design.level_names[1:]])
        fit_s = ols_fit(Xs, design.dy)
        fs, ps = wald_f(unres, fit_s, 1)
    return PssResult(f, m, unres, res, fs, ps)


def _bootstrap_chunk(design: EcmDesign, segs, coef: np.ndarray, fixed: np.ndarray,
                     resid: np.ndarray, dy_cols: list[int], lag_of: list[int],
                     seed: int, reps: Sequence[int]) -> np.ndarray:
    nrows = len(design.dy)
    B = len(reps)
    draws = np.empty((B, nrows))
    for i, b in enumerate(reps):
        draws[i] = resid[rng_for(seed, b).integers(0, nrows, nrows)]
    alpha = coef[dy_cols]
    X_u = np.broadcast_to(design.X.values, (B, *design.X.values.shape)).copy()
    dy_star = np.empty((B, nrows))
    lvl_y = design.X.names.index(design.level_names[0])
    start = design.start
    row0 = 0
    for s_idx, seg in enumerate(segs):
        n = seg.n
        obs_dy = np.diff(seg.dependent, prepend=np.nan)
        path = np.broadcast_to(obs_dy, (B, n)).copy()
        for t in range(start, n):
            r = row0 + t - start
            acc = fixed[r] + draws[:, r]
            for a, lag in zip(alpha, lag_of):
                acc = acc + a * path[:, t - lag]
            path[:, t] = acc
        rows = slice(row0, row0 + n - start)
        t_idx = np.arange(start, n)
        dy_star[:, rows] = path[:, start:]
        for c, lag in zip(dy_cols, lag_of):
            X_u[:, rows, c] = path[:, t_idx - lag]
        # y_{t-1} = y_{start-1} + cumulated simulated differences
        y_prev = seg.dependent[start - 1] + np.concatenate(
            [np.zeros((B, 1)), np.cumsum(path[:, start:n - 1], axis=1)], axis=1)
        X_u[:, rows, lvl_y] = y_prev
        row0 += n - start
    level_idx = [design.X.names.index(nm) for nm in design.level_names]
    keep = [j for j in range(design.X.k) if j not in level_idx]
    rss_u = rss_batch(X_u, dy_star)
    rss_r = rss_batch(np.ascontiguousarray(X_u[:, :, keep]), dy_star)
    m = len(level_idx)
    df_u = nrows - design.X.k
    out = np.empty(B)
    for i in range(B):
        if degenerate_rss(rss_u[i], rss_r[i], dy_star[i]):
            out[i] = 0.0
        elif rss_u[i] == 0:
            out[i] = math.inf
        else:
            out[i] = max(((rss_r[i] - rss_u[i]) / m) / (rss_u[i] / df_u), 0.0)
    return out


def bootstrap_critical_values(data: SeriesData, spec: ArdlSpec, params: BootstrapParams):
    """Return ``(critical_values: {level: cv}, sorted F sample)`` from the null bootstrap."""
    segs = as_segments(data)
    design = build_ecm_design(segs, spec)
    Xr = _restricted_design(design)
    try:
        rfit = ols_fit(Xr, design.dy)
    except EstimationError as exc:
        raise EstimationError(f"restricted model not estimable: {exc}") from None
    resid = rfit.residuals - rfit.residuals.mean()
    dep = design.dependent
    dy_names = [f"D.{dep}@{i}" for i in range(1, spec.p + 1)]
    dy_cols = [design.X.names.index(nm) for nm in dy_names]
    lag_of = list(range(1, spec.p + 1))
    r_dy = [Xr.names.index(nm) for nm in dy_names]
    other = [j for j in range(Xr.k) if j not in r_dy]
    fixed = Xr.values[:, other] @ rfit.coef[other]
    coef_full = np.zeros(design.X.k)
    for j, nm in enumerate(Xr.names):
        coef_full[design.X.names.index(nm)] = rfit.coef[j]
    chunks = [range(s, min(s + CHUNK, params.B)) for s in range(0, params.B, CHUNK)]
    job = lambda reps: _bootstrap_chunk(design, segs, coef_full, fixed, resid,  # noqa: E731
                                        dy_cols, lag_of, params.seed, reps)
    if params.threads > 1:
        with ThreadPoolExecutor(params.threads) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    sample = np.concatenate(parts)
    srt = np.sort(sample)
    cvs = {lv: nearest_rank_quantile(srt, lv) for lv in params.levels}
    return cvs, sample


def bounds_test(data: SeriesData, spec: ArdlSpec, params: BootstrapParams = BootstrapParams(),
                summed: bool = False, keep_sample: bool = False) -> BoundsResult:
    pss = pss_f_statistic(data, spec, summed=summed)
    cvs, sample = bootstrap_critical_values(data, spec, params)
    f = pss.f_stat
    p = (1 + int(np.sum(sample >= f))) / (params.B + 1)
    decisions = {lv: bool(f > cv) for lv, cv in cvs.items()}
    parts = []
    for lv, rej in decisions.items():
        pct = f"{round((1 - lv) * 100, 6):g}%"
        verb = "reject" if rej else "fail to reject"
        parts.append(f"{verb} the null hypothesis of no cointegration at the {pct} level")
    narrative = f"F = {f:.4f}: " + "; ".join(parts)
    return BoundsResult(f, pss.m, cvs, p, decisions, params.B, params.seed, narrative,
                        pss.f_summed, sample if keep_sample else None)
