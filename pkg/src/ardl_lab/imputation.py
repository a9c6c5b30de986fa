"""Random-forest imputation of missing panel cells.

Missing cells start at their column median. Each round re-trains, for every
indicator with holes, a regression forest on the rows where that indicator
is observed (features: the other indicators in the same year plus the
normalized year) and re-predicts the holes. Rounds stop when the relative
change of the imputed cells falls below ``tol`` or after ``max_rounds``.
Observed cells are never written.

Trees use greedy variance-reduction splits over a random feature subset at
each node; each tree draws from its own RNG stream keyed by
``(seed, round, entity, column, tree)`` so results do not depend on the
order or parallelism of training.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dgp import rng_for
from .frame import DataError, PanelTable

__all__ = [
    "ForestParams",
    "RegressionTree",
    "ImputationReport",
    "train_regression_tree",
    "train_forest",
    "forest_predict",
    "impute_panel",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForestParams:
    trees: int = 100
    min_leaf: int = 2
    max_rounds: int = 10
    tol: float = 1e-3
    seed: int = 0
    bootstrap: bool = True
    cross_entity: bool = False  # pool all countries into one forest per indicator
    threads: int = 1

    def __post_init__(self):
        if self.trees < 1:
            raise ValueError("trees must be at least 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")

    def features_per_split(self, n_features: int) -> int:
        return max(1, math.ceil(math.sqrt(n_features)))


@dataclass(frozen=True)
class RegressionTree:
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    def predict(self, rows) -> np.ndarray:
        X = np.atleast_2d(np.asarray(rows, dtype=float))
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))


def _best_split(X: np.ndarray, y: np.ndarray, feats: np.ndarray, min_leaf: int):
    """Best (gain, feature, threshold) over ``feats``; feature -1 when no valid split."""
    n = len(y)
    total = y.sum()
    base = total * total / n
    Xf = X[:, feats]
    order = np.argsort(Xf, axis=0, kind="stable")
    xs = np.take_along_axis(Xf, order, axis=0)
    csum = np.cumsum(y[order], axis=0)[:-1]
    i = np.arange(1, n)[:, None]
    valid = (i >= min_leaf) & (n - i >= min_leaf) & (xs[1:] > xs[:-1])
    score = np.where(valid, csum ** 2 / i + (total - csum) ** 2 / (n - i) - base, -np.inf)
    # first feature (in draw order) wins ties, first position within a feature
    best_pos = np.argmax(score, axis=0)
    best_val = score[best_pos, np.arange(len(feats))]
    if not np.isfinite(best_val).any():
        return 0.0, -1, 0.0
    j = int(np.argmax(best_val))
    gain = float(best_val[j])
    if gain <= 1e-12 * abs(base):
        return 0.0, -1, 0.0
    r = int(best_pos[j])
    return gain, int(feats[j]), 0.5 * (xs[r, j] + xs[r + 1, j])


def train_regression_tree(rows, targets, params: ForestParams,
                          rng: np.random.Generator) -> RegressionTree:
    """Grow one tree; leaves predict the mean of their training targets."""
    X = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("tree needs at least one feature")
    if len(X) != len(y) or len(y) == 0:
        raise ValueError("rows and targets must be non-empty and aligned")
    mtry = params.features_per_split(X.shape[1])
    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].sum() / len(idx)))
        count.append(len(idx))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        yi = y[idx]
        if len(idx) < 2 * params.min_leaf or yi.max() == yi.min():
            continue
        feats = rng.choice(X.shape[1], size=min(mtry, X.shape[1]), replace=False)
        gain, f, thr = _best_split(X[idx], yi, feats, params.min_leaf)
        if f < 0:
            continue
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return RegressionTree(np.array(feature, dtype=np.int64), np.array(threshold),
                          np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                          np.array(value), np.array(count, dtype=np.int64))


def train_forest(rows, targets, params: ForestParams, key: tuple[int, ...] = ()) -> list[RegressionTree]:
    X = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)

    def grow(t: int) -> RegressionTree:
        rng = rng_for(params.seed, *key, t)
        if params.bootstrap and len(y) > 1:
            pick = rng.integers(0, len(y), len(y))
            return train_regression_tree(X[pick], y[pick], params, rng)
        return train_regression_tree(X, y, params, rng)

    if params.threads > 1:
        with ThreadPoolExecutor(params.threads) as pool:
            return list(pool.map(grow, range(params.trees)))
    return [grow(t) for t in range(params.trees)]


def forest_predict(forest, row) -> float | np.ndarray:
    """Mean of the tree predictions; a 1-D row gives a float, a 2-D block an array."""
    if not forest:
        raise ValueError("empty forest")
    r = np.asarray(row, dtype=float)
    preds = np.mean([t.predict(r) for t in forest], axis=0)
    return float(preds[0]) if r.ndim == 1 else preds


@dataclass(frozen=True)
class ImputationReport:
    imputed: dict[str, int]
    rounds: int
    final_change: float
    mode: str
    skipped: list[tuple[str, str, int]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def total_imputed(self) -> int:
        return sum(self.imputed.values())

    def as_dict(self) -> dict:
        return {
            "imputed": self.imputed, "total_imputed": self.total_imputed,
            "rounds": self.rounds, "final_change": self.final_change, "mode": self.mode,
            "skipped": [list(s) for s in self.skipped], "warnings": self.warnings,
        }


def _blocks(panel: PanelTable, cross_entity: bool):
    """Yield (block_id, entity indices) - one block per entity, or one pooled block."""
    if cross_entity:
        return [(0, list(range(len(panel.entities))))]
    return [(e, [e]) for e in range(len(panel.entities))]


def impute_panel(panel: PanelTable, params: ForestParams = ForestParams()):
    """Fill every missing cell; returns ``(completed_panel, ImputationReport)``."""
    n_e, n_c, n_t = panel.values.shape
    for c, col in enumerate(panel.columns):
        if panel.missing[:, c, :].all():
            raise DataError(f"indicator {col} has no observed values")
    values = panel.values.copy()
    miss = panel.missing
    mode = "cross_entity" if params.cross_entity else "per_entity"
    if not miss.any():
        return panel, ImputationReport({c: 0 for c in panel.columns}, 0, 0.0, mode)
    tnorm = (np.arange(n_t) / max(n_t - 1, 1))
    skipped, warnings = [], []
    # each block: rows = (entity, year) pairs, matrix rows x columns
    work = []
    for b, ents in _blocks(panel, params.cross_entity):
        M = np.concatenate([values[e].T for e in ents])  # (len(ents)*n_t, n_c)
        Mm = np.concatenate([miss[e].T for e in ents])
        tcol = np.tile(tnorm, len(ents))
        active = []
        for c in range(n_c):
            holes = Mm[:, c]
            if not holes.any():
                continue
            n_obs = int((~holes).sum())
            if n_obs < 3:
                where = panel.entities[ents[0]] if len(ents) == 1 else "pooled"
                msg = f"{panel.columns[c]} ({where}): only {n_obs} observed values, left missing"
                warnings.append(msg)
                log.warning(msg)
                for r in np.flatnonzero(holes):
                    e = ents[r // n_t]
                    skipped.append((panel.entities[e], panel.columns[c], int(panel.years[r % n_t])))
                continue
            M[holes, c] = np.median(M[~holes, c])
            active.append(c)
        # columns that stay missing are filled with the pooled median for use as features only
        for c in range(n_c):
            if np.isnan(M[:, c]).any():
                allobs = values[:, c, :][~miss[:, c, :]]
                M[np.isnan(M[:, c]), c] = np.median(allobs)
        # impute columns with fewer holes first
        active.sort(key=lambda c: (int(Mm[:, c].sum()), c))
        work.append((b, ents, M, Mm, tcol, active))

    rounds, change = 0, math.inf
    for rnd in range(params.max_rounds):
        num = den = 0.0
        for b, ents, M, Mm, tcol, active in work:
            for c in active:
                holes = Mm[:, c]
                feats = np.column_stack([np.delete(M, c, axis=1), tcol])
                forest = train_forest(feats[~holes], M[~holes, c], params, (rnd, b, c))
                new = forest_predict(forest, feats[holes])
                old = M[holes, c]
                num += float(((new - old) ** 2).sum())
                den += float((new ** 2).sum())
                M[holes, c] = new
        rounds = rnd + 1
        change = num / den if den > 0 else 0.0
        if change < params.tol:
            break

    out = values.copy()
    imputed_mask = np.zeros_like(miss)
    for b, ents, M, Mm, tcol, active in work:
        for c in active:
            for r in np.flatnonzero(Mm[:, c]):
                e, t = ents[r // n_t], r % n_t
                out[e, c, t] = M[r, c]
                imputed_mask[e, c, t] = True
    still_missing = miss & ~imputed_mask
    counts = {col: int(imputed_mask[:, c, :].sum()) for c, col in enumerate(panel.columns)}
    result = panel.replace_values(np.where(still_missing, np.nan, out), still_missing)
    return result, ImputationReport(counts, rounds, float(change), mode, skipped, warnings)
