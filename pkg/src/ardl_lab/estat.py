"""Ordinary least squares with full fit statistics, and Wald F comparisons.

Estimation uses a column-pivoted Householder QR factorization. A column whose
pivot falls below ``1e-10 * max column norm`` is reported as linearly
dependent instead of silently dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .distributions import f_dist, sf_eval, student_t

__all__ = [
    "EstimationError",
    "DesignMatrix",
    "OlsFit",
    "ols_fit",
    "wald_f",
    "degenerate_rss",
    "RANK_TOL",
]

RANK_TOL = 1e-10
DEGENERATE_TOL = 1e-12


class EstimationError(RuntimeError):
    """A regression could not be estimated (rank deficiency, too few rows, ...)."""


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    names: tuple[str, ...]
    intercept: bool = True  # whether column 0 is a constant

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("design matrix must be 2-D")
        names = tuple(self.names)
        if len(names) != v.shape[1]:
            raise ValueError("one name per column required")
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        if not np.all(np.isfinite(v)):
            raise ValueError("design matrix has non-finite entries")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def drop(self, names: Sequence[str]) -> "DesignMatrix":
        keep = [i for i, c in enumerate(self.names) if c not in set(names)]
        intercept = self.intercept and 0 in keep
        return DesignMatrix(self.values[:, keep], tuple(self.names[i] for i in keep), intercept)

    def append(self, cols: np.ndarray, names: Sequence[str]) -> "DesignMatrix":
        cols = np.asarray(cols, dtype=float).reshape(self.n, -1)
        return DesignMatrix(np.hstack([self.values, cols]), self.names + tuple(names), self.intercept)

    def rows(self, idx) -> "DesignMatrix":
        return DesignMatrix(self.values[idx], self.names, self.intercept)

    @classmethod
    def from_columns(cls, columns: dict[str, np.ndarray], intercept: bool = True) -> "DesignMatrix":
        arrays = [np.asarray(v, dtype=float) for v in columns.values()]
        n = len(arrays[0]) if arrays else 0
        names = list(columns)
        if intercept:
            arrays.insert(0, np.ones(n))
            names.insert(0, "const")
        return cls(np.column_stack(arrays), tuple(names), intercept)


@dataclass(frozen=True)
class OlsFit:
    names: tuple[str, ...]
    coef: np.ndarray
    stderr: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float
    rss: float
    tss: float
    r2: float
    adj_r2: float
    f_stat: float
    f_pvalue: float
    loglik: float
    aic: float
    bic: float
    leverage: np.ndarray
    n: int
    k: int
    intercept: bool

    @property
    def df_resid(self) -> int:
        return self.n - self.k

    @property
    def y(self) -> np.ndarray:
        return self.fitted + self.residuals

    def coef_of(self, name: str) -> float:
        return float(self.coef[self.names.index(name)])

    def pvalue_of(self, name: str) -> float:
        return float(self.p_values[self.names.index(name)])

    def summary(self) -> dict:
        return {
            "n": self.n, "k": self.k,
            "coefficients": {nm: {"coef": float(c), "stderr": float(s), "t": float(t), "p": float(p)}
                             for nm, c, s, t, p in zip(self.names, self.coef, self.stderr,
                                                        self.t_values, self.p_values)},
            "sigma2": self.sigma2, "r2": self.r2, "adj_r2": self.adj_r2,
            "f_stat": self.f_stat, "f_pvalue": self.f_pvalue,
            "loglik": self.loglik, "aic": self.aic, "bic": self.bic,
        }


def degenerate_rss(rss_u: float, rss_r: float, y: np.ndarray) -> bool:
    """Both fits numerically perfect: the F statistic is then defined as 0 with p = 1."""
    y = np.asarray(y, dtype=float)
    thresh = DEGENERATE_TOL * float(np.var(y)) * len(y)
    return rss_u <= thresh and rss_r <= thresh


def _dependent_columns(X: np.ndarray, names: Sequence[str], tol: float) -> list[str]:
    """Columns that are (numerically) combinations of the columns before them."""
    out, kept = [], []
    for j in range(X.shape[1]):
        trial = X[:, kept + [j]]
        r = np.abs(np.diag(scipy.linalg.qr(trial, mode="r", pivoting=True)[0]))
        if np.sum(r > tol) < len(kept) + 1:
            out.append(names[j])
        else:
            kept.append(j)
    return out


def _qr_solve(X: np.ndarray, names: Sequence[str], y: np.ndarray):
    n, k = X.shape
    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = RANK_TOL * max(float(np.max(np.linalg.norm(X, axis=0))), 1e-300)
    rank = int(np.sum(diag > tol))
    if rank < k:
        dependent = _dependent_columns(X, names, tol)
        raise EstimationError(f"design is rank deficient: column(s) {dependent} linearly dependent "
                              f"on the others")
    qty = Q.T @ y
    beta_p = scipy.linalg.solve_triangular(R, qty)
    beta = np.empty(k)
    beta[piv] = beta_p
    rinv = scipy.linalg.solve_triangular(R, np.eye(k))
    cov_p = rinv @ rinv.T  # (X'X)^{-1} in pivoted order
    xtx_inv = np.empty((k, k))
    xtx_inv[np.ix_(piv, piv)] = cov_p
    leverage = np.einsum("ij,ij->i", Q, Q)
    return beta, xtx_inv, leverage


def ols_fit(X: DesignMatrix, y) -> OlsFit:
    """Least-squares fit of ``y`` on the columns of ``X``.

    AIC/BIC count the error variance as a parameter (k + 1 in total) and use
    the concentrated Gaussian log-likelihood. The overall F statistic tests
    every non-intercept coefficient equal to zero.
    """
    y = np.asarray(y, dtype=float)
    n, k = X.values.shape
    if len(y) != n:
        raise EstimationError(f"response has {len(y)} rows, design has {n}")
    if not np.all(np.isfinite(y)):
        raise EstimationError("response contains non-finite values")
    if n <= k:
        raise EstimationError(f"need more observations than parameters (n={n}, k={k})")
    beta, xtx_inv, leverage = _qr_solve(X.values, X.names, y)
    fitted = X.values @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    df_resid = n - k
    sigma2 = rss / df_resid
    stderr = np.sqrt(np.maximum(np.diag(xtx_inv), 0.0) * sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = np.where(stderr > 0, beta / np.where(stderr > 0, stderr, 1.0),
                         np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    tdist = student_t(df_resid)
    pvals = np.array([min(1.0, 2.0 * sf_eval(tdist, abs(t))) for t in tvals])

    if X.intercept:
        ybar = y.mean()
        tss = float(((y - ybar) ** 2).sum())
    else:
        tss = float(y @ y)
    r2 = 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else 0.0)
    dfm = k - 1 if X.intercept else k
    denom_df = n - 1 if X.intercept else n
    adj_r2 = 1.0 - (1.0 - r2) * denom_df / df_resid
    if dfm >= 1:
        if degenerate_rss(rss, tss, y):
            f_stat, f_p = 0.0, 1.0
        elif rss == 0:
            f_stat, f_p = math.inf, 0.0
        else:
            f_stat = ((tss - rss) / dfm) / (rss / df_resid)
            f_stat = max(f_stat, 0.0)
            f_p = sf_eval(f_dist(dfm, df_resid), f_stat)
    else:
        f_stat, f_p = math.nan, math.nan
    if rss > 0:
        loglik = -0.5 * n * (math.log(2.0 * math.pi) + math.log(rss / n) + 1.0)
    else:
        loglik = math.inf
    kp = k + 1
    aic = 2.0 * kp - 2.0 * loglik
    bic = kp * math.log(n) - 2.0 * loglik
    return OlsFit(
        names=X.names, coef=beta, stderr=stderr, t_values=tvals, p_values=pvals,
        residuals=resid, fitted=fitted, sigma2=sigma2, rss=rss, tss=tss, r2=r2,
        adj_r2=adj_r2, f_stat=f_stat, f_pvalue=f_p, loglik=loglik, aic=aic, bic=bic,
        leverage=leverage, n=n, k=k, intercept=X.intercept,
    )


def wald_f(unrestricted: OlsFit, restricted: OlsFit, m: int) -> tuple[float, float]:
    """F = ((RSS_r - RSS_u)/m) / (RSS_u/df_u) with p from F(m, df_u)."""
    if m < 1:
        raise ValueError("restriction count must be at least 1")
    df_u = unrestricted.df_resid
    if df_u < 1:
        raise EstimationError("unrestricted model has no residual degrees of freedom")
    if unrestricted.n != restricted.n:
        raise ValueError("fits must share the same sample")
    rss_u, rss_r = unrestricted.rss, restricted.rss
    if degenerate_rss(rss_u, rss_r, unrestricted.y):
        return 0.0, 1.0
    if rss_u == 0:
        return math.inf, 0.0
    f = max(((rss_r - rss_u) / m) / (rss_u / df_u), 0.0)
    return f, sf_eval(f_dist(m, df_u), f)


def f_from_rss(rss_r: float, rss_u: float, m: int, df_u: int, y=None) -> float:
    """Bare F statistic from two residual sums of squares (no p-value)."""
    if y is not None and degenerate_rss(rss_u, rss_r, y):
        return 0.0
    if rss_u == 0:
        return math.inf
    return max(((rss_r - rss_u) / m) / (rss_u / df_u), 0.0)


def backward_eliminate(X: DesignMatrix, y, alpha: float,
                       protected: Sequence[str] = ("const",),
                       groups: dict[str, Sequence[str]] | None = None):
    """Drop the least significant term (or term group) while its p-value exceeds ``alpha``.

    Ties on p break by label order. With ``groups`` a whole group goes at once,
    scored by the smallest p-value among its members.
    Returns ``(final_fit, final_design, dropped_labels_in_order)``.
    """
    dropped: list[str] = []
    cur = X
    fit = ols_fit(cur, y)
    while True:
        cands: list[tuple[float, str, list[str]]] = []
        if groups:
            for label, members in groups.items():
                present = [m for m in members if m in cur.names]
                if present:
                    p = min(_p_or_one(fit.pvalue_of(m)) for m in present)
                    cands.append((p, label, present))
        else:
            for nm in cur.names:
                if nm in protected:
                    continue
                cands.append((_p_or_one(fit.pvalue_of(nm)), nm, [nm]))
        cands = [c for c in cands if c[0] > alpha]
        if not cands:
            return fit, cur, dropped
        p, label, members = sorted(cands, key=lambda c: (-c[0], c[1]))[0]
        dropped.append(label)
        cur = cur.drop(members)
        if cur.k == 0:
            raise EstimationError("every term was eliminated")
        fit = ols_fit(cur, y)


def _p_or_one(p: float) -> float:
    return 1.0 if math.isnan(p) else p


def rss_batch(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Residual sums of squares for a stack of regressions.

    ``X`` has shape (B, n, k) and ``y`` shape (B, n). Used by Monte Carlo loops
    where only the RSS is needed.
    """
    if X.shape[2] == 0:
        return np.einsum("bi,bi->b", y, y)
    Q, _ = np.linalg.qr(X)
    qty = np.einsum("bik,bi->bk", Q, y)
    resid = y - np.einsum("bik,bk->bi", Q, qty)
    return np.einsum("bi,bi->b", resid, resid)
