import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ardl_lab.frame import (AlignedSeriesSet, DataError, Observation, PanelTable, align_panel,
                            convert_wb_wide, describe, diff, indicator_map, lag, load_long_csv,
                            resolve_indicator, write_long_csv, write_wide_csv)


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def _panel(values, entities=("USA",), columns=("TRD",), years=None, missing=None):
    v = np.asarray(values, dtype=float)
    years = years or tuple(range(2007, 2007 + v.shape[-1]))
    m = np.zeros(v.shape, dtype=bool) if missing is None else missing
    return PanelTable(tuple(entities), tuple(years), tuple(columns), v, m)


def test_load_four_rows(tmp_path):
    p = _write(tmp_path, "country,indicator,year,value\n"
                         + "".join(f"USA,TRD,{y},{y - 2000}.5\n" for y in range(2007, 2011)))
    panel = load_long_csv(p)
    assert panel.entities == ("USA",)
    assert panel.columns == ("TRD",)
    assert panel.years == (2007, 2008, 2009, 2010)
    assert panel.values[0, 0, 0] == 7.5


def test_empty_value_is_missing(tmp_path):
    p = _write(tmp_path, "country,indicator,year,value\nUSA,TRD,2007,1\nUSA,TRD,2008,\nUSA,TRD,2009,3\n")
    panel = load_long_csv(p)
    assert panel.n_missing == 1
    assert panel.missing[0, 0, 1]
    assert np.isnan(panel.values[0, 0, 1])


def test_duplicate_row_names_second_row(tmp_path):
    p = _write(tmp_path, "country,indicator,year,value\nDEU,LPI1,2012,3.1\nDEU,LPI1,2013,3.2\n"
                         "DEU,LPI1,2012,3.3\n")
    with pytest.raises(DataError, match="row 4"):
        load_long_csv(p)


@pytest.mark.parametrize("text, match", [
    ("country,indicator,value,year\nUSA,TRD,1,2007\n", "header"),
    ("country,indicator,year,value\nUSA,TRD,20x7,1\n", "row 2.*year"),
    ("country,indicator,year,value\nUSA,TRD,2007,1\nUSA,NOPE.CODE,2008,1\n", "row 3"),
])
def test_load_rejects_bad_input(tmp_path, text, match):
    with pytest.raises(DataError, match=match):
        load_long_csv(_write(tmp_path, text))


def test_year_gap_rejected(tmp_path):
    p = _write(tmp_path, "country,indicator,year,value\nUSA,TRD,2007,1\nUSA,TRD,2009,2\n")
    with pytest.raises(DataError, match="2008"):
        load_long_csv(p)


def test_raw_code_resolves_to_key(tmp_path):
    p = _write(tmp_path, "country,indicator,year,value\nUSA,LP.LPI.OVRL.XQ,2007,3\nUSA,LP.LPI.OVRL.XQ,2008,3.1\n")
    assert load_long_csv(p).columns == ("LPI1",)


def test_code_map():
    m = indicator_map()
    assert m["LP.LPI.OVRL.XQ"] == "LPI1"
    assert m["NE.TRD.GNFS.ZS"] == "TRD"
    assert len(m) == 13
    assert resolve_indicator("LP.LPI.OVRL.XQ") == "LPI1"
    assert resolve_indicator("ENS") == "ENS"
    with pytest.raises(DataError):
        resolve_indicator("XX.UNKNOWN")
    assert resolve_indicator("XX.UNKNOWN", passthrough=True) == "XX.UNKNOWN"


def test_wb_wide_three_years(tmp_path):
    text = ('Country Name,Country Code,Series Name,Series Code,2007 [YR2007],2008 [YR2008],2009 [YR2009]\n'
            'Germany,DEU,Logistics performance index,LP.LPI.OVRL.XQ,4.1,..,4.3\n')
    panel = convert_wb_wide(_write(tmp_path, text))
    obs = list(panel.observations())
    assert len(obs) == 3
    assert panel.columns == ("LPI1",)
    assert obs[1].value is None
    assert obs[2] == Observation("DEU", "LPI1", 2009, 4.3)


def test_wb_wide_unknown_year_column(tmp_path):
    text = "Country Code,Series Code,2007,YR-bad\nDEU,LP.LPI.OVRL.XQ,1,2\n"
    with pytest.raises(DataError):
        convert_wb_wide(_write(tmp_path, text))


def test_wide_long_wide_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    vals = rng.normal(size=(2, 3, 4))
    miss = rng.random(vals.shape) < 0.2
    panel = PanelTable(("DEU", "USA"), (2010, 2011, 2012, 2013), ("LPI1", "TRD", "ENS"), vals, miss)
    write_wide_csv(panel, tmp_path / "w.csv")
    back = convert_wb_wide(tmp_path / "w.csv")
    write_long_csv(back, tmp_path / "l.csv")
    again = load_long_csv(tmp_path / "l.csv")
    assert np.array_equal(again.missing, panel.missing)
    assert np.array_equal(again.values[~miss], panel.values[~miss])


def test_align_lengths_and_order():
    v = np.arange(3 * 16, dtype=float).reshape(1, 3, 16)
    panel = _panel(v, columns=("TRD", "LPI1", "LPI3"))
    s = align_panel(panel, "USA", "TRD", ["LPI3", "LPI1"])
    assert s.n == 16
    assert s.regressor_names == ["LPI3", "LPI1"]
    assert all(len(x) == 16 for x in s.regressors.values())
    assert list(s.years) == list(range(2007, 2023))


def test_align_reports_holes():
    v = np.ones((1, 2, 5))
    m = np.zeros_like(v, dtype=bool)
    m[0, 0, 2] = True
    panel = _panel(v, columns=("TRD", "LPI1"), missing=m)
    with pytest.raises(DataError, match=r"\('TRD', 2009\)"):
        align_panel(panel, "USA", "TRD", ["LPI1"])


def test_aligned_set_validation():
    with pytest.raises(DataError):
        AlignedSeriesSet.from_arrays([1.0, 2.0])
    with pytest.raises(DataError):
        AlignedSeriesSet.from_arrays([1.0, 2.0, 3.0], x=[1.0, 2.0])
    with pytest.raises(DataError):
        AlignedSeriesSet.from_arrays([1.0, np.nan, 3.0])


def test_lag_examples():
    out = lag([1.0, 2.0, 3.0], 1)
    assert out.mask.tolist() == [True, False, False]
    assert out[1:].tolist() == [1.0, 2.0]
    s = np.array([4.0, 5.0, 6.0])
    assert np.array_equal(lag(s, 0).data, s)
    with pytest.raises(ValueError):
        lag(s, 3)


@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=30))
def test_lag_composition(xs):
    a = lag(lag(xs, 1), 1)
    b = lag(xs, 2)
    assert np.array_equal(a.mask, b.mask)
    ok = ~b.mask
    assert np.array_equal(a.data[ok], b.data[ok])
    assert ok.sum() <= len(xs)


def test_diff_examples():
    assert diff([1.0, 4.0, 9.0, 16.0]).tolist() == [3.0, 5.0, 7.0]
    assert np.all(diff(np.full(5, 2.5)) == 0)
    kept = diff([1.0, 4.0, 9.0], keep_length=True)
    assert kept.mask.tolist() == [True, False, False]
    with pytest.raises(ValueError):
        diff([1.0], 1)


@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=40))
def test_diff_cumsum_inverse(xs):
    s = np.asarray(xs, dtype=float)
    rebuilt = np.concatenate([[s[0]], s[0] + np.cumsum(diff(s))])
    assert np.array_equal(rebuilt, s)


def test_describe_constant_and_quartiles():
    st7 = describe(_panel(np.full((1, 1, 5), 7.0)))["TRD"]
    assert (st7.min, st7.q1, st7.median, st7.mean, st7.q3, st7.max) == (7, 7, 7, 7, 7, 7)
    s = describe(_panel([[[1.0, 2.0, 3.0, 4.0]]]))["TRD"]
    assert s.median == 2.5 and s.mean == 2.5
    assert (s.q1, s.q3) == (1.75, 3.25)  # linear interpolation between closest ranks


def test_describe_all_missing_is_absent():
    m = np.ones((1, 1, 3), dtype=bool)
    assert describe(_panel(np.zeros((1, 1, 3)), missing=m))["TRD"] is None


@settings(max_examples=30)
@given(st.lists(st.floats(-1e5, 1e5), min_size=4, max_size=4), st.randoms())
def test_describe_permutation_invariant(vals, rnd):
    perm = list(vals)
    rnd.shuffle(perm)
    a = describe(_panel([[vals]]))["TRD"]
    b = describe(_panel([[perm]]))["TRD"]
    assert a == b
    assert a.min <= a.q1 <= a.median <= a.q3 <= a.max


def test_panel_is_read_only():
    p = _panel([[[1.0, 2.0, 3.0]]])
    with pytest.raises(ValueError):
        p.values[0, 0, 0] = 5.0
