"""Finite distributed-lag regressions and their backward-elimination reduction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ardl import SeriesData, as_segments
from .estat import DesignMatrix, EstimationError, OlsFit, backward_eliminate, ols_fit

__all__ = ["DlmSpec", "DlmFit", "build_dlm_design", "fit_dlm", "reduce_model"]


@dataclass(frozen=True)
class DlmSpec:
    """``q`` lags per regressor (int for all, or dict by name); ``regressors=None`` uses all."""

    q: int | dict = 1
    regressors: tuple[str, ...] | None = None
    include_intercept: bool = True

    def __post_init__(self):
        qs = self.q.values() if isinstance(self.q, dict) else [self.q]
        if any(int(v) < 0 for v in qs):
            raise ValueError("lag order must be non-negative")
        if self.regressors is not None:
            if not self.regressors:
                raise ValueError("at least one regressor required")
            object.__setattr__(self, "regressors", tuple(self.regressors))

    def q_for(self, name: str) -> int:
        return int(self.q.get(name, 0)) if isinstance(self.q, dict) else int(self.q)


@dataclass(frozen=True)
class DlmFit:
    ols: OlsFit
    X: DesignMatrix
    y: np.ndarray
    spec: DlmSpec
    reduced: bool = False
    dropped: tuple[str, ...] = ()
    intercept_only: bool = False
    series_terms: dict = field(default_factory=dict)

    @property
    def terms(self) -> tuple[str, ...]:
        return self.X.names

    def table_row(self) -> dict:
        return {"f_stat": self.ols.f_stat, "p_value": self.ols.f_pvalue, "adj_r2": self.ols.adj_r2}


def build_dlm_design(data: SeriesData, spec: DlmSpec):
    segs = as_segments(data)
    regs = spec.regressors or tuple(segs[0].regressor_names)
    missing = [r for r in regs if r not in segs[0].regressors]
    if missing:
        raise EstimationError(f"regressors not in data: {missing}")
    qmax = max(spec.q_for(r) for r in regs)
    names = [f"{r}@{i}" for r in regs for i in range(spec.q_for(r) + 1)]
    blocks, ys = [], []
    for seg in segs:
        if seg.n <= qmax:
            raise EstimationError(f"entity {seg.entity}: {seg.n} observations cannot carry {qmax} lags")
        t = np.arange(qmax, seg.n)
        blocks.append(np.column_stack([seg.regressors[r][t - i]
                                       for r in regs for i in range(spec.q_for(r) + 1)]))
        ys.append(seg.dependent[t])
    body = np.vstack(blocks)
    if spec.include_intercept:
        body = np.hstack([np.ones((body.shape[0], 1)), body])
        names.insert(0, "const")
    X = DesignMatrix(body, tuple(names), spec.include_intercept)
    groups = {r: [f"{r}@{i}" for i in range(spec.q_for(r) + 1)] for r in regs}
    return X, np.concatenate(ys), groups


def fit_dlm(data: SeriesData, spec: DlmSpec) -> DlmFit:
    """Regress y_t on x_{j,t-i}, i = 0..q_j, over the sample where every lag exists."""
    X, y, groups = build_dlm_design(data, spec)
    if X.n <= X.k:
        raise EstimationError(f"insufficient sample after lag trimming: {X.n} rows for {X.k} terms")
    return DlmFit(ols_fit(X, y), X, y, spec, series_terms=groups)


def reduce_model(fit: DlmFit, alpha: float = 0.05, whole_series: bool = False) -> DlmFit:
    """Backward elimination: drop the term with the largest p-value above ``alpha`` and refit.

    Ties break on the term label. With ``whole_series`` a regressor's lags
    leave together, once even its most significant lag has p > alpha.
    """
    non_const = [t for t in fit.terms if t != "const"]
    if not non_const:
        raise ValueError("model has no terms to eliminate")
    groups = fit.series_terms if whole_series else None
    red, X, dropped = backward_eliminate(fit.X, fit.y, alpha, ("const",), groups)
    if not dropped:
        return fit
    only_const = X.names == ("const",)
    return DlmFit(red, X, fit.y, fit.spec, True, tuple(dropped), only_const,
                  {k: [t for t in v if t in X.names] for k, v in fit.series_terms.items()})
