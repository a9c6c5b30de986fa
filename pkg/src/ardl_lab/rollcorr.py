"""Rolling-window correlation screening against white-noise bands.

For a pair of series the rolling Pearson correlation over every window of
width ``w`` is summarized by its sample standard deviation (SDrolCor). The
same statistic computed on pairs of independent Gaussian white-noise series
of equal length gives 5% and 95% bands; an SDrolCor outside the bands marks
a co-movement signal.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .bounds import nearest_rank_quantile
from .dgp import rng_for

__all__ = [
    "RollCorrResult",
    "rolling_correlation",
    "sd_rolcor",
    "whitenoise_band",
    "screen_pairs",
    "CSV_HEADER",
]

CSV_HEADER = ("Variables", "Width", "SDrolCor", "95%", "5%")
CHUNK = 256


def _windowed_corr(x: np.ndarray, y: np.ndarray, w: int) -> np.ndarray:
    """Correlations over the last axis; NaN where a window has zero variance."""
    xw = sliding_window_view(x, w, axis=-1)
    yw = sliding_window_view(y, w, axis=-1)
    xc = xw - xw.mean(axis=-1, keepdims=True)
    yc = yw - yw.mean(axis=-1, keepdims=True)
    sxy = (xc * yc).sum(axis=-1)
    sxx = (xc * xc).sum(axis=-1)
    syy = (yc * yc).sum(axis=-1)
    denom = np.sqrt(sxx * syy)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, sxy / np.where(denom > 0, denom, 1.0), np.nan)
    return np.clip(r, -1.0, 1.0)


def rolling_correlation(x, y, w: int) -> np.ndarray:
    """Pearson correlation per contiguous window; degenerate windows are NaN."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and equally long")
    if w < 2:
        raise ValueError("window width must be at least 2")
    if len(x) < w:
        raise ValueError(f"series length {len(x)} shorter than window {w}")
    r = _windowed_corr(x, y, w)
    if w == 2:
        # two points are always perfectly (anti-)correlated
        r = np.where(np.isnan(r), r, np.sign(r))
    return r


def sd_rolcor(seq) -> float:
    """Sample standard deviation (divisor m - 1) of the non-degenerate entries."""
    s = np.asarray(seq, dtype=float)
    s = s[~np.isnan(s)]
    if len(s) < 2:
        raise ValueError("need at least two usable correlations")
    return float(np.std(s, ddof=1))


def _sd_batch(r: np.ndarray) -> np.ndarray:
    ok = ~np.isnan(r)
    m = ok.sum(axis=-1)
    rz = np.where(ok, r, 0.0)
    mean = rz.sum(axis=-1) / np.maximum(m, 1)
    ss = (np.where(ok, r - mean[..., None], 0.0) ** 2).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(m >= 2, np.sqrt(ss / (m - 1)), np.nan)


def _band_chunk(n, w, seed, reps, null, data):
    x = np.empty((len(reps), n))
    y = np.empty((len(reps), n))
    for i, b in enumerate(reps):
        g = rng_for(seed, b)
        if null == "gaussian":
            x[i] = g.standard_normal(n)
            y[i] = g.standard_normal(n)
        else:
            x[i] = g.permutation(data[0])
            y[i] = g.permutation(data[1])
    r = _windowed_corr(x, y, w)
    if w == 2:
        r = np.where(np.isnan(r), r, np.sign(r))
    return _sd_batch(r)


def whitenoise_band(n: int, w: int, B: int = 1000, seed: int = 0, threads: int = 1,
                    null: str = "gaussian", data: tuple | None = None) -> tuple[float, float]:
    """Empirical (95th, 5th) percentiles of SDrolCor under independent white noise.

    ``null="permutation"`` instead shuffles the two observed series in ``data``.
    """
    if B < 100:
        raise ValueError("need at least 100 replications")
    if n < w + 1:
        raise ValueError("series too short for the window")
    if null not in ("gaussian", "permutation"):
        raise ValueError("null must be 'gaussian' or 'permutation'")
    if null == "permutation" and data is None:
        raise ValueError("permutation null needs the observed series")
    chunks = [range(s, min(s + CHUNK, B)) for s in range(0, B, CHUNK)]
    job = lambda reps: _band_chunk(n, w, seed, reps, null, data)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    sds = np.concatenate(parts)
    sds = np.sort(sds[~np.isnan(sds)])
    return nearest_rank_quantile(sds, 0.95), nearest_rank_quantile(sds, 0.05)


@dataclass(frozen=True)
class RollCorrResult:
    dependent: str
    regressor: str
    width: int
    correlations: np.ndarray
    sd_rolcor: float
    band_95: float
    band_05: float
    inside_band: bool
    n_degenerate: int

    @property
    def label(self) -> str:
        return f"{self.dependent} vs {self.regressor}"

    def csv_row(self) -> list:
        return [self.label, self.width, self.sd_rolcor, self.band_95, self.band_05]


def screen_pairs(dependent: np.ndarray, regressors: dict[str, np.ndarray], dependent_name: str = "y",
                 widths: Sequence[int] = (2, 3, 4), B: int = 1000, seed: int = 0,
                 threads: int = 1, null: str = "gaussian") -> list[RollCorrResult]:
    """One row per (regressor, width), regressors in the given order."""
    y = np.asarray(dependent, dtype=float)
    rows = []
    for j, (name, x) in enumerate(regressors.items()):
        x = np.asarray(x, dtype=float)
        for w in widths:
            r = rolling_correlation(y, x, w)
            n_deg = int(np.isnan(r).sum())
            try:
                sd = sd_rolcor(r)
            except ValueError:
                sd = math.nan
            # one band stream per (pair, width) so rows do not share draws
            band_seed = int(rng_for(seed, j, w).integers(0, 2 ** 63 - 1))
            hi, lo = whitenoise_band(len(y), w, B, band_seed, threads, null,
                                     (y, x) if null == "permutation" else None)
            inside = bool(lo <= sd <= hi) if not math.isnan(sd) else False
            rows.append(RollCorrResult(dependent_name, name, int(w), r, sd, hi, lo, inside, n_deg))
    return rows
