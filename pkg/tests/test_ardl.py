import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ardl_lab.ardl import (ArdlSpec, build_ecm_design, build_levels_design, fit_ardl_ecm,
                           forecast_metrics, long_run_coefficients, reduce_ardl, select_lags)
from ardl_lab.dgp import gen_cointegrated_pair, rng_for
from ardl_lab.estat import EstimationError, ols_fit
from ardl_lab.frame import AlignedSeriesSet


def _pair(n=200, seed=0, slope=0.5, noise=0.1):
    x, y = gen_cointegrated_pair(n, slope, noise, seed)
    return AlignedSeriesSet.from_arrays(y, x=x)


def test_design_counts_and_order():
    rng = np.random.default_rng(0)
    d = AlignedSeriesSet.from_arrays(np.cumsum(rng.normal(size=10)), x=np.cumsum(rng.normal(size=10)))
    des = build_ecm_design(d, ArdlSpec(p=1, q=1))
    assert des.X.names == ("const", "D.y@1", "D.x@1", "L1.y", "L1.x")
    assert des.X.n == 8
    des2 = build_ecm_design(d, ArdlSpec(p=2, q=1))
    assert des2.X.k == des.X.k + 1
    # column L1.y at row r (time t) equals y_{t-1}
    t = des.time
    assert np.array_equal(des.X.column("L1.y"), d.dependent[t - 1])
    assert np.array_equal(des.dy, d.dependent[t] - d.dependent[t - 1])


def test_contemporaneous_trend_and_dummies_columns():
    rng = np.random.default_rng(1)
    segs = [AlignedSeriesSet.from_arrays(np.cumsum(rng.normal(size=15)), entity=e,
                                         x=np.cumsum(rng.normal(size=15))) for e in ("AAA", "BBB")]
    des = build_ecm_design(segs, ArdlSpec(p=1, q=1, contemporaneous=True, trend=True,
                                          entity_dummies=True))
    assert des.X.names == ("const", "D.y@1", "D.x@0", "D.x@1", "trend", "entity[BBB]", "L1.y", "L1.x")
    assert des.X.n == 2 * 13


def test_design_errors():
    rng = np.random.default_rng(2)
    short = AlignedSeriesSet.from_arrays(rng.normal(size=5), x=rng.normal(size=5))
    with pytest.raises(EstimationError):
        build_ecm_design(short, ArdlSpec(p=2, q=2))
    flat = AlignedSeriesSet.from_arrays(rng.normal(size=30), x=np.ones(30))
    with pytest.raises(EstimationError, match="L1.x"):
        build_ecm_design(flat, ArdlSpec(p=1, q=0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(0, 2), st.booleans())
def test_ecm_levels_residual_identity(seed, p, q, contemporaneous):
    g = rng_for(seed)
    n = 40
    x = np.cumsum(g.standard_normal(n))
    y = 0.4 * x + np.cumsum(g.standard_normal(n)) * 0.3
    d = AlignedSeriesSet.from_arrays(y, x=x)
    spec = ArdlSpec(p=p, q=q, contemporaneous=contemporaneous)
    ecm = fit_ardl_ecm(d, spec)
    X, yl = build_levels_design(d, spec, start=ecm.design.start)
    lev = ols_fit(X, yl)
    assert np.max(np.abs(ecm.ols.residuals - lev.residuals)) <= 1e-9


def test_long_run_arithmetic():
    assert long_run_coefficients([-0.5, 0.25], ["x"]) == {"x": 0.5}
    assert long_run_coefficients([-1, 0.3, -0.2], ["a", "b"]) == pytest.approx({"a": 0.3, "b": -0.2})
    assert long_run_coefficients([-1, 0.0], ["a"]) == {"a": 0.0}
    with pytest.raises(ValueError):
        long_run_coefficients([0.0, 0.3], ["a"])


@given(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3).filter(lambda v: abs(v[0]) > 1e-3))
def test_long_run_ratio_invariance(c, lam):
    a = long_run_coefficients(lam, ["u", "v"])
    b = long_run_coefficients([c * v for v in lam], ["u", "v"])
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_cointegrated_fit_recovers_slope():
    fit = fit_ardl_ecm(_pair(seed=3), ArdlSpec(p=1, q=1, contemporaneous=True))
    assert fit.long_run["x"] == pytest.approx(0.5, abs=0.1)
    assert fit.adjustment_speed < 0
    assert fit.lambdas.keys() == {"L1.y", "L1.x"}


def test_regressor_rescaling_divides_theta():
    d = _pair(seed=4)
    spec = ArdlSpec(p=1, q=1)
    base = fit_ardl_ecm(d, spec).long_run["x"]
    scaled = fit_ardl_ecm(AlignedSeriesSet.from_arrays(d.dependent, x=3 * d.regressors["x"]), spec)
    assert scaled.long_run["x"] == pytest.approx(base / 3, rel=1e-8)


def test_reduce_ardl_keeps_levels_when_asked():
    fit = fit_ardl_ecm(_pair(seed=5), ArdlSpec(p=3, q=2))
    red, dropped = reduce_ardl(fit, 0.05, keep_levels=True)
    assert {"L1.y", "L1.x"} <= set(red.names)
    assert set(dropped).isdisjoint({"L1.y", "L1.x", "const"})


def test_forecast_metrics_naive_and_perfect():
    y = np.array([1.0, 3.0, 2.0, 5.0, 4.0, 7.0])
    naive = np.r_[y[0], y[:-1]]
    m = forecast_metrics(y, naive)
    assert m.mase == 1.0 and m.gmrae == 1.0
    assert forecast_metrics(y, y).mase == 0.0


def test_forecast_metrics_fixture():
    y = np.array([2.0, 4.0, 3.0, 6.0, 5.0, 9.0])
    f = np.array([2.5, 3.5, 3.5, 5.0, 6.0, 8.0])
    e = np.abs(y[1:] - f[1:])
    nv = np.abs(np.diff(y))
    m = forecast_metrics(y, f)
    assert m.mase == pytest.approx(e.mean() / nv.mean(), abs=1e-12)
    assert m.gmrae == pytest.approx(math.exp(np.mean(np.log(e / nv))), abs=1e-12)


def test_forecast_metrics_undefined_on_flat_series():
    m = forecast_metrics(np.ones(5), np.ones(5))
    assert not m.defined and math.isnan(m.mase)


def test_forecast_metrics_errors():
    with pytest.raises(ValueError):
        forecast_metrics([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        forecast_metrics([1.0, 2.0, 3.0], [1.0, 2.0])


def test_single_cell_grid():
    res = select_lags(_pair(n=60, seed=1), ArdlSpec(), 1, 0)
    assert res.selected == (1, 0)
    assert len(res.grid) == 1


def test_selected_cell_is_the_minimum():
    res = select_lags(_pair(n=80, seed=2), ArdlSpec(), 3, 2, "aic")
    best = min(r["aic"] for r in res.grid)
    sel = next(r for r in res.grid if (r["p"], r["q"]) == res.selected)
    assert sel["aic"] == best
    assert all(r["mase"] >= 0 and r["gmrae"] >= 0 for r in res.grid)


def test_selection_invariant_to_scaling_y():
    d = _pair(n=80, seed=6)
    a = select_lags(d, ArdlSpec(), 3, 1, "bic").selected
    b = select_lags(d.with_dependent(7.5 * d.dependent), ArdlSpec(), 3, 1, "bic").selected
    assert a == b


def test_bic_picks_p1_for_ar1_dependent():
    hits = 0
    for trial in range(200):
        g = rng_for(77, trial)
        n = 80
        e = g.standard_normal(n)
        y = np.empty(n)
        y[0] = e[0]
        for t in range(1, n):
            y[t] = 0.9 * y[t - 1] + e[t]
        d = AlignedSeriesSet.from_arrays(y, x=g.standard_normal(n))
        hits += select_lags(d, ArdlSpec(), 3, 1, "bic").selected[0] == 1
    assert hits >= 0.7 * 200


def test_bad_criterion():
    with pytest.raises(ValueError):
        select_lags(_pair(n=40), ArdlSpec(), 2, 1, "hqic")
