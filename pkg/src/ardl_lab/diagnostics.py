"""Residual diagnostics for fitted regressions.

Every test returns a :class:`TestResult` holding the statistic, its reference
distribution and the upper-tail p-value. :func:`run_battery` runs the six
checks reported for an ARDL-ECM fit in a fixed order:
Breusch-Godfrey, Ljung-Box, Breusch-Pagan, Shapiro-Wilk, bounds F, RESET.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .ardl import ArdlSpec, SeriesData, fit_ardl_ecm
from .bounds import BootstrapParams, bounds_test
from .distributions import DistSpec, chi_square, f_dist, normal, sf_eval
from .estat import DesignMatrix, EstimationError, OlsFit, degenerate_rss, ols_fit, wald_f

__all__ = [
    "TestResult",
    "InfluenceReport",
    "DiagnosticsReport",
    "breusch_godfrey",
    "ljung_box",
    "breusch_pagan",
    "shapiro_wilk",
    "ramsey_reset",
    "rainbow",
    "influence_measures",
    "run_battery",
    "BATTERY_ORDER",
]

BATTERY_ORDER = ("breusch_godfrey", "ljung_box", "breusch_pagan", "shapiro_wilk",
                 "pss_bounds_f", "ramsey_reset")


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    p_value: float
    distribution: DistSpec | None = None
    details: dict = field(default_factory=dict)
    degenerate: bool = False
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "name": self.name, "statistic": self.statistic, "p_value": self.p_value,
            "distribution": self.distribution.as_dict() if self.distribution else None,
            "details": self.details, "degenerate": self.degenerate, "error": self.error,
        }


def _failed(name: str, exc: Exception) -> TestResult:
    return TestResult(name, math.nan, math.nan, error=f"{type(exc).__name__}: {exc}")


def _r2_centered(fit: OlsFit) -> float:
    y = fit.y
    tss = float(((y - y.mean()) ** 2).sum())
    return 1.0 - fit.rss / tss if tss > 0 else 0.0


def _with_intercept(X: DesignMatrix) -> DesignMatrix:
    if X.intercept:
        return X
    v = np.hstack([np.ones((X.n, 1)), X.values])
    return DesignMatrix(v, ("const",) + tuple(n for n in X.names if n != "const"), True)


def breusch_godfrey(fit: OlsFit, X: DesignMatrix, p: int = 1) -> TestResult:
    """LM test for serial correlation up to order ``p``: n * R^2 of the auxiliary
    regression of residuals on X and their own lags (pre-sample lags set to 0)."""
    if p < 1:
        raise ValueError("lag order must be at least 1")
    n = fit.n
    if n - X.k - p < 1:
        raise EstimationError("too few observations for the auxiliary regression")
    e = fit.residuals
    lags = np.zeros((n, p))
    for i in range(1, p + 1):
        lags[i:, i - 1] = e[:-i]
    aux = ols_fit(X.append(lags, [f"resid@{i}" for i in range(1, p + 1)]), e)
    lm = max(n * _r2_centered(aux), 0.0)
    dist = chi_square(p)
    return TestResult("breusch_godfrey", lm, sf_eval(dist, lm), dist, {"order": p})


def ljung_box(residuals, h: int | None = None) -> TestResult:
    """Q = n(n+2) sum_k r_k^2/(n-k), autocorrelations with divisor n (about the mean)."""
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if h is None:
        h = max(1, min(10, n // 5))
    if not 1 <= h < n:
        raise ValueError(f"need 1 <= h < n, got h={h}, n={n}")
    d = e - e.mean()
    denom = float(d @ d)
    if denom <= 0:
        return TestResult("ljung_box", math.nan, math.nan, chi_square(h), {"lags": h},
                          degenerate=True)
    acf = np.array([float(d[k:] @ d[:-k]) / denom for k in range(1, h + 1)])
    q = n * (n + 2) * float(np.sum(acf ** 2 / (n - np.arange(1, h + 1))))
    dist = chi_square(h)
    return TestResult("ljung_box", q, sf_eval(dist, q), dist, {"lags": h, "acf": acf.tolist()})


def breusch_pagan(fit: OlsFit, X: DesignMatrix, studentized: bool = True) -> TestResult:
    """Heteroskedasticity LM test against variance linear in the columns of X.

    The default (Koenker) form is n * R^2 from regressing squared residuals on
    X. ``studentized=False`` gives the original form: half the explained sum
    of squares after scaling squared residuals by their mean.
    """
    Xa = _with_intercept(X)
    k = Xa.k
    if k < 2:
        return TestResult("breusch_pagan", math.nan, math.nan, degenerate=True,
                          error="intercept-only design: test undefined")
    if fit.n <= k + 1:
        raise EstimationError("too few observations")
    e2 = fit.residuals ** 2
    if studentized:
        aux = ols_fit(Xa, e2)
        lm = fit.n * _r2_centered(aux)
    else:
        g = e2 / e2.mean()
        aux = ols_fit(Xa, g)
        lm = 0.5 * float(((aux.fitted - g.mean()) ** 2).sum())
    lm = max(lm, 0.0)
    dist = chi_square(k - 1)
    return TestResult("breusch_pagan", lm, sf_eval(dist, lm), dist,
                      {"variant": "koenker" if studentized else "classic"})


# Royston (1995) AS R94 polynomial coefficients, constant term first
_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(c: Sequence[float], x: float) -> float:
    out = 0.0
    for coef in reversed(c):
        out = out * x + coef
    return out


def _sw_coefficients(n: int) -> np.ndarray:
    """Weights for the lower half of the order statistics (positive)."""
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    inv = NormalDist().inv_cdf
    m = np.array([inv((i - 0.375) / (n + 0.25)) for i in range(1, nn2 + 1)])
    summ2 = 2.0 * float(m @ m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = -m / ssumm2
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        a = -m / fac
        a[0], a[1] = a1, a2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
        a = -m / fac
        a[0] = a1
    return a


def shapiro_wilk(residuals) -> TestResult:
    """Shapiro-Wilk W with Royston's AS R94 coefficient and p-value approximations."""
    x = np.sort(np.asarray(residuals, dtype=float))
    n = len(x)
    if not 3 <= n <= 5000:
        raise ValueError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    rng = x[-1] - x[0]
    if rng <= 0 or not np.isfinite(rng):
        raise ValueError("zero-variance sample")
    xs = (x - x.mean()) / rng
    a = _sw_coefficients(n)
    nn2 = n // 2
    num = float(a @ (xs[::-1][:nn2] - xs[:nn2]))
    w = min(num * num / float(xs @ xs), 1.0)
    if n == 3:
        pw = max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0))
        return TestResult("shapiro_wilk", w, min(pw, 1.0), None, {"n": n, "method": "exact n=3"})
    w1 = 1.0 - w
    if w1 <= 0:
        return TestResult("shapiro_wilk", w, 1.0, normal(), {"n": n, "z": -math.inf})
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return TestResult("shapiro_wilk", w, 1e-99, normal(), {"n": n, "z": math.inf})
        y = -math.log(gamma - y)
        mu, sd = _poly(_C3, n), math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        mu, sd = _poly(_C5, ln), math.exp(_poly(_C6, ln))
    z = (y - mu) / sd
    dist = normal()
    return TestResult("shapiro_wilk", w, sf_eval(dist, z), dist, {"n": n, "z": z})


def ramsey_reset(fit: OlsFit, X: DesignMatrix, powers: Sequence[int] = (2, 3)) -> TestResult:
    """F test of added powers of the (centered, unit-variance) fitted values."""
    powers = tuple(powers)
    if fit.n <= X.k + len(powers):
        raise EstimationError("too few observations for RESET")
    yhat = fit.fitted
    sd = yhat.std()
    if sd == 0:
        raise EstimationError("constant fitted values: RESET undefined")
    z = (yhat - yhat.mean()) / sd
    aug = X.append(np.column_stack([z ** p for p in powers]), [f"fitted^{p}" for p in powers])
    big = ols_fit(aug, fit.y)
    f, p = wald_f(big, fit, len(powers))
    dist = f_dist(len(powers), big.df_resid)
    return TestResult("ramsey_reset", f, p, dist, {"powers": list(powers)}, degenerate=(f == 0 and p == 1))


def rainbow(fit: OlsFit, X: DesignMatrix, fraction: float = 0.5) -> TestResult:
    """Utts' rainbow test: refit on the central ``fraction`` of rows (time order) and
    compare residual sums of squares."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    n, k = fit.n, X.k
    n_sub = int(math.floor(fraction * n + 0.5))
    if n_sub <= k:
        raise EstimationError(f"central subsample of {n_sub} rows does not exceed k={k}")
    lo = (n - n_sub) // 2
    details = {"fraction": fraction, "rows": [lo, lo + n_sub]}
    if n_sub == n:
        return TestResult("rainbow", 0.0, 1.0, None, details, degenerate=True)
    sub = ols_fit(X.rows(slice(lo, lo + n_sub)), fit.y[lo:lo + n_sub])
    dist = f_dist(n - n_sub, n_sub - k)
    if degenerate_rss(sub.rss, fit.rss, fit.y):
        return TestResult("rainbow", 0.0, 1.0, dist, details, degenerate=True)
    f = max(((fit.rss - sub.rss) / (n - n_sub)) / (sub.rss / (n_sub - k)), 0.0)
    return TestResult("rainbow", f, sf_eval(dist, f), dist, details)


@dataclass(frozen=True)
class InfluenceReport:
    leverage: np.ndarray
    cooks_distance: np.ndarray
    flagged: list[int]
    cook_threshold: float
    leverage_threshold: float
    infinite: list[int]

    def as_dict(self) -> dict:
        return {
            "leverage": self.leverage.tolist(),
            "cooks_distance": [None if math.isinf(d) else float(d) for d in self.cooks_distance],
            "flagged": self.flagged, "infinite": self.infinite,
            "cook_threshold": self.cook_threshold, "leverage_threshold": self.leverage_threshold,
        }


def influence_measures(fit: OlsFit, X: DesignMatrix | None = None,
                       cook_cut: float | None = None, leverage_cut: float | None = None) -> InfluenceReport:
    """Hat-matrix leverage and Cook's distance, flagging D_i > 4/n or h_ii > 2k/n by default."""
    n, k = fit.n, fit.k
    h = np.clip(fit.leverage, 0.0, 1.0)
    e = fit.residuals
    s2 = fit.sigma2
    one_minus = 1.0 - h
    infinite = [int(i) for i in np.flatnonzero(one_minus <= 1e-12)]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(one_minus > 1e-12, e ** 2 * h / (k * s2 * one_minus ** 2), np.inf)
    if s2 == 0:
        d = np.where(np.isinf(d), d, 0.0)
    cc = 4.0 / n if cook_cut is None else cook_cut
    lc = 2.0 * k / n if leverage_cut is None else leverage_cut
    flagged = [int(i) for i in np.flatnonzero((d > cc) | (h > lc))]
    return InfluenceReport(h, d, flagged, cc, lc, infinite)


@dataclass(frozen=True)
class DiagnosticsReport:
    tests: tuple[TestResult, ...]
    influence: InfluenceReport | None
    p: int
    q: int | dict
    bounds: dict | None = None

    def by_name(self, name: str) -> TestResult:
        return next(t for t in self.tests if t.name == name)

    def statistics_row(self) -> list[float]:
        return [t.statistic for t in self.tests]

    def as_dict(self) -> dict:
        return {
            "p": self.p, "q": self.q,
            "tests": [dict(t.as_dict(), label=f"test{i}") for i, t in enumerate(self.tests, 1)],
            "influence": self.influence.as_dict() if self.influence else None,
            "bounds": self.bounds,
        }


def run_battery(data: SeriesData, spec: ArdlSpec, bootstrap: BootstrapParams = BootstrapParams(),
                bg_order: int = 1, lb_lags: int | None = None,
                reset_powers: Sequence[int] = (2, 3), bounds_result=None) -> DiagnosticsReport:
    """Fit the ECM and run the six checks in fixed order; a failing check is recorded, not raised.

    ``bounds_result`` reuses an already computed :class:`BoundsResult` for
    the same data and spec instead of bootstrapping again.
    """
    fit = fit_ardl_ecm(data, spec)
    ols, X = fit.ols, fit.design.X
    results = []
    checks = [
        ("breusch_godfrey", lambda: breusch_godfrey(ols, X, bg_order)),
        ("ljung_box", lambda: ljung_box(ols.residuals, lb_lags)),
        ("breusch_pagan", lambda: breusch_pagan(ols, X)),
        ("shapiro_wilk", lambda: shapiro_wilk(ols.residuals)),
        ("pss_bounds_f", None),
        ("ramsey_reset", lambda: ramsey_reset(ols, X, reset_powers)),
    ]
    bounds_dict = None
    for name, run in checks:
        try:
            if run is None:
                b = bounds_result if bounds_result is not None else bounds_test(data, spec, bootstrap)
                bounds_dict = b.as_dict()
                results.append(TestResult(name, b.f_stat, b.p_value, None,
                                          {"m": b.m, "B": b.B, "seed": b.seed,
                                           "critical_values": bounds_dict["critical_values"],
                                           "p_value_kind": "bootstrap"}))
            else:
                results.append(run())
        except (EstimationError, ValueError) as exc:
            results.append(_failed(name, exc))
    try:
        infl = influence_measures(ols, X)
    except (EstimationError, ValueError):
        infl = None
    return DiagnosticsReport(tuple(results), infl, spec.p, spec.q, bounds_dict)
