import math

import numpy as np
import pytest

from ardl_lab.dgp import rng_for
from ardl_lab.rollcorr import CSV_HEADER, rolling_correlation, screen_pairs, sd_rolcor, whitenoise_band


def test_width_two_fixture():
    r = rolling_correlation([1, 2, 3], [5, 3, 8], 2)
    assert r.tolist() == [-1.0, 1.0]


@pytest.mark.parametrize("w", [2, 3, 5])
def test_identical_series_all_one(w):
    x = rng_for(1, w).standard_normal(12)
    r = rolling_correlation(x, x, w)
    assert len(r) == 12 - w + 1
    assert np.allclose(r, 1.0, atol=1e-12)


def test_six_point_fixture_against_direct_pearson():
    x = np.array([1.0, 4.0, 2.0, 8.0, 5.0, 7.0])
    y = np.array([2.0, 3.0, 9.0, 4.0, 6.0, 1.0])
    r = rolling_correlation(x, y, 3)
    ref = [np.corrcoef(x[i:i + 3], y[i:i + 3])[0, 1] for i in range(4)]
    assert np.max(np.abs(r - ref)) <= 1e-12


def test_degenerate_windows_are_nan_and_excluded():
    x = np.array([1.0, 1.0, 1.0, 2.0, 3.0, 1.0])
    y = np.arange(6.0)
    r = rolling_correlation(x, y, 3)
    assert math.isnan(r[0]) and not np.isnan(r[1:]).any()
    assert sd_rolcor(r) == pytest.approx(np.std(r[1:], ddof=1))


def test_sd_rolcor_values():
    assert sd_rolcor([-1.0, 1.0]) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert sd_rolcor([0.3, 0.3, 0.3]) == 0.0
    with pytest.raises(ValueError):
        sd_rolcor([0.5, np.nan])


def test_input_errors():
    with pytest.raises(ValueError):
        rolling_correlation([1, 2], [1, 2], 3)
    with pytest.raises(ValueError):
        rolling_correlation([1, 2, 3], [1, 2], 2)
    with pytest.raises(ValueError):
        rolling_correlation([1, 2, 3], [1, 2, 3], 1)


def test_positive_affine_invariance():
    g = rng_for(2)
    x, y = g.standard_normal(20), g.standard_normal(20)
    for w in (2, 3, 4):
        a = rolling_correlation(x, y, w)
        b = rolling_correlation(3 * x + 7, 0.2 * y - 1, w)
        assert np.allclose(a, b, atol=1e-12)


def test_band_order_determinism_and_threads():
    hi, lo = whitenoise_band(16, 3, B=500, seed=4)
    assert lo <= hi
    assert whitenoise_band(16, 3, B=500, seed=4, threads=4) == (hi, lo)
    assert whitenoise_band(16, 3, B=500, seed=5) != (hi, lo)


def test_band_errors():
    with pytest.raises(ValueError):
        whitenoise_band(16, 2, B=99)
    with pytest.raises(ValueError):
        whitenoise_band(16, 2, null="bootstrap")
    with pytest.raises(ValueError):
        whitenoise_band(16, 2, null="permutation")


def test_width_two_band_region():
    hi, lo = whitenoise_band(16, 2, B=10000, seed=0)
    assert hi == pytest.approx(1.0, abs=0.05)
    # the width-2 statistic is discrete; the 5% point sits just below 0.9
    assert 0.8 <= lo <= 0.96


def test_permutation_null_runs():
    g = rng_for(6)
    y, x = g.standard_normal(15), g.standard_normal(15)
    hi, lo = whitenoise_band(15, 3, B=200, seed=1, null="permutation", data=(y, x))
    assert lo <= hi


def test_screen_pairs_structure_and_signal():
    g = rng_for(3)
    y = g.standard_normal(17)
    regs = {"same": y.copy(), "noise": g.standard_normal(17)}
    rows = screen_pairs(y, regs, "dep", widths=(2, 3, 4), B=200, seed=1)
    assert len(rows) == 2 * 3
    assert [(r.regressor, r.width) for r in rows] == [(n, w) for n in regs for w in (2, 3, 4)]
    for r in rows[:3]:
        assert r.sd_rolcor == 0.0 and r.sd_rolcor < r.band_05 and not r.inside_band
    for r in rows:
        assert r.inside_band == (r.band_05 <= r.sd_rolcor <= r.band_95)
        assert len(r.correlations) == 17 - r.width + 1
    assert rows[0].csv_row()[:2] == ["dep vs same", 2]
    assert CSV_HEADER == ("Variables", "Width", "SDrolCor", "95%", "5%")


def test_null_coverage_roughly_ninety_percent():
    inside = total = 0
    for s in range(60):
        g = rng_for(8, s)
        rows = screen_pairs(g.standard_normal(20), {"x": g.standard_normal(20)}, widths=(3, 4),
                            B=200, seed=s)
        inside += sum(r.inside_band for r in rows)
        total += len(rows)
    assert 0.8 <= inside / total <= 0.98
