"""Indicator panels: ingestion, alignment, lag/difference transforms and summaries.

The canonical on-disk layout is a long CSV with the header
``country,indicator,year,value``. World Bank wide exports are converted on
ingest. Missingness is carried as an explicit boolean mask; the value array
holds NaN in masked cells only as a guard against accidental use.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "DataError",
    "Observation",
    "PanelTable",
    "AlignedSeriesSet",
    "SummaryStats",
    "indicator_map",
    "resolve_indicator",
    "load_long_csv",
    "write_long_csv",
    "convert_wb_wide",
    "write_wide_csv",
    "align_panel",
    "align_pooled",
    "lag",
    "diff",
    "describe",
]

LONG_HEADER = ("country", "indicator", "year", "value")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


# --------------------------------------------------------------------------
# indicator code map

def _read_code_map() -> tuple[int, dict[str, str], dict[str, str]]:
    text = resources.files("ardl_lab.resources").joinpath("indicator_codes.csv").read_text("utf-8")
    lines = text.splitlines()
    m = re.match(r"#.*version\s+(\d+)", lines[0])
    version = int(m.group(1)) if m else 0
    reader = csv.DictReader(line for line in lines if not line.startswith("#"))
    code_to_key, key_to_desc = {}, {}
    for row in reader:
        code_to_key[row["code"]] = row["key"]
        key_to_desc[row["key"]] = row["description"]
    return version, code_to_key, key_to_desc


CODE_MAP_VERSION, _CODE_TO_KEY, _KEY_DESC = _read_code_map()
KNOWN_KEYS = tuple(_KEY_DESC)


def indicator_map() -> dict[str, str]:
    """World Bank series code -> variable key (e.g. ``LP.LPI.OVRL.XQ -> LPI1``)."""
    return dict(_CODE_TO_KEY)


def resolve_indicator(name: str, passthrough: bool = False) -> str:
    """Map a variable key or WB series code to its variable key.

    Unknown names raise :class:`DataError` unless ``passthrough`` is set, in
    which case the raw name is returned unchanged.
    """
    name = name.strip()
    if name in _KEY_DESC:
        return name
    compact = name.replace(" ", "")
    if compact in _CODE_TO_KEY:
        return _CODE_TO_KEY[compact]
    if name.upper() in _KEY_DESC:
        return name.upper()
    if passthrough:
        return name
    raise DataError(f"unresolvable indicator code {name!r}")


# --------------------------------------------------------------------------
# data model

@dataclass(frozen=True)
class Observation:
    country: str
    indicator: str
    year: int
    value: float | None


@dataclass(frozen=True)
class PanelTable:
    """Country x indicator x year cells with an explicit missing mask.

    ``values`` and ``missing`` both have shape (entities, columns, years).
    """

    entities: tuple[str, ...]
    years: tuple[int, ...]
    columns: tuple[str, ...]
    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        shape = (len(self.entities), len(self.columns), len(self.years))
        values = np.array(self.values, dtype=float).reshape(shape)
        missing = np.array(self.missing, dtype=bool).reshape(shape)
        if len(set(self.entities)) != len(self.entities):
            raise DataError("duplicate entity labels")
        if len(set(self.columns)) != len(self.columns):
            raise DataError("duplicate indicator columns")
        yrs = np.asarray(self.years)
        if len(yrs) and np.any(np.diff(yrs) != 1):
            raise DataError(f"years must be consecutive without gaps, got {list(self.years)}")
        if np.any(~np.isfinite(values[~missing])):
            raise DataError("non-finite value in an observed cell")
        values[missing] = np.nan
        values.flags.writeable = False
        missing.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)

    @property
    def n_missing(self) -> int:
        return int(self.missing.sum())

    def series(self, entity: str, column: str) -> np.ma.MaskedArray:
        e, c = self.entities.index(entity), self.columns.index(column)
        return np.ma.MaskedArray(self.values[e, c].copy(), mask=self.missing[e, c].copy())

    def observations(self) -> Iterator[Observation]:
        for e, ent in enumerate(self.entities):
            for c, col in enumerate(self.columns):
                for t, yr in enumerate(self.years):
                    v = None if self.missing[e, c, t] else float(self.values[e, c, t])
                    yield Observation(ent, col, int(yr), v)

    def replace_values(self, values: np.ndarray, missing: np.ndarray | None = None) -> "PanelTable":
        return PanelTable(self.entities, self.years, self.columns, values,
                          self.missing if missing is None else missing)

    def subset(self, entities: Sequence[str] | None = None,
               columns: Sequence[str] | None = None) -> "PanelTable":
        ents = tuple(entities) if entities is not None else self.entities
        cols = tuple(columns) if columns is not None else self.columns
        ei = [self.entities.index(e) for e in ents]
        ci = [self.columns.index(c) for c in cols]
        return PanelTable(ents, self.years, cols,
                          self.values[np.ix_(ei, ci)], self.missing[np.ix_(ei, ci)])

    @classmethod
    def from_observations(cls, obs: Sequence[Observation],
                          years: Sequence[int] | None = None) -> "PanelTable":
        entities = tuple(dict.fromkeys(o.country for o in obs))
        columns = tuple(dict.fromkeys(o.indicator for o in obs))
        if years is None:
            seen = sorted({o.year for o in obs})
            if not seen:
                raise DataError("no observations")
            years = range(seen[0], seen[-1] + 1)
            absent = sorted(set(years) - set(seen))
            if absent:
                raise DataError(f"year gap: no rows for years {absent}")
        years = tuple(int(y) for y in years)
        ypos = {y: i for i, y in enumerate(years)}
        shape = (len(entities), len(columns), len(years))
        values = np.full(shape, np.nan)
        missing = np.ones(shape, dtype=bool)
        epos = {e: i for i, e in enumerate(entities)}
        cpos = {c: i for i, c in enumerate(columns)}
        for o in obs:
            if o.year not in ypos:
                raise DataError(f"year {o.year} outside configured range {years[0]}-{years[-1]}")
            idx = (epos[o.country], cpos[o.indicator], ypos[o.year])
            if o.value is not None:
                values[idx] = o.value
                missing[idx] = False
        return cls(entities, years, columns, values, missing)


@dataclass(frozen=True)
class AlignedSeriesSet:
    """Complete, equally long dependent and regressor vectors for one entity."""

    dependent: np.ndarray
    regressors: dict[str, np.ndarray]
    years: np.ndarray
    entity: str = ""
    dependent_name: str = "y"

    def __post_init__(self):
        y = np.asarray(self.dependent, dtype=float)
        regs = {k: np.asarray(v, dtype=float) for k, v in self.regressors.items()}
        years = np.asarray(self.years)
        n = len(y)
        if n < 3:
            raise DataError("aligned series need at least 3 observations")
        if len(years) != n or any(len(v) != n for v in regs.values()):
            raise DataError("aligned vectors differ in length")
        if not np.all(np.isfinite(y)) or not all(np.all(np.isfinite(v)) for v in regs.values()):
            raise DataError("aligned series contain missing or non-finite values")
        if self.dependent_name in regs:
            raise DataError("dependent name collides with a regressor name")
        object.__setattr__(self, "dependent", y)
        object.__setattr__(self, "regressors", regs)
        object.__setattr__(self, "years", years)

    @property
    def n(self) -> int:
        return len(self.dependent)

    @property
    def regressor_names(self) -> list[str]:
        return list(self.regressors)

    def with_dependent(self, y: np.ndarray) -> "AlignedSeriesSet":
        return AlignedSeriesSet(y, self.regressors, self.years, self.entity, self.dependent_name)

    @classmethod
    def from_arrays(cls, y, entity: str = "", years=None, dependent_name: str = "y",
                    **regressors) -> "AlignedSeriesSet":
        y = np.asarray(y, dtype=float)
        if years is None:
            years = np.arange(len(y))
        return cls(y, regressors, np.asarray(years), entity, dependent_name)


@dataclass(frozen=True)
class SummaryStats:
    indicator: str
    count: int
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("indicator", "count", "min", "q1", "median", "mean", "q3", "max")}


# --------------------------------------------------------------------------
# ingestion

def _parse_value(text: str) -> float | None:
    text = text.strip()
    if text in ("", "..", "NA", "NaN", "nan"):
        return None
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("non-finite")
    return v


def load_long_csv(path: str | Path, years: Sequence[int] | None = None,
                  passthrough: bool = False) -> PanelTable:
    """Read a long CSV with header exactly ``country,indicator,year,value``.

    Empty ``value`` fields become missing cells. Errors name the offending
    row (1-based, header is row 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != LONG_HEADER:
            raise DataError(f"{path}: malformed header {header!r}, expected {','.join(LONG_HEADER)}")
        obs, seen = [], {}
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"row {rowno}: expected 4 fields, got {len(row)}")
            country, ind, year_txt, val_txt = row
            try:
                year = int(year_txt)
            except ValueError:
                raise DataError(f"row {rowno}: non-numeric year {year_txt!r}") from None
            try:
                key = resolve_indicator(ind, passthrough)
            except DataError as exc:
                raise DataError(f"row {rowno}: {exc}") from None
            try:
                value = _parse_value(val_txt)
            except ValueError:
                raise DataError(f"row {rowno}: bad value {val_txt!r}") from None
            ident = (country.strip(), key, year)
            if ident in seen:
                raise DataError(f"row {rowno}: duplicate {ident} (first seen on row {seen[ident]})")
            seen[ident] = rowno
            obs.append(Observation(country.strip(), key, year, value))
    try:
        return PanelTable.from_observations(obs, years)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_long_csv(panel: PanelTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LONG_HEADER)
        for o in panel.observations():
            w.writerow([o.country, o.indicator, o.year, "" if o.value is None else repr(o.value)])


_YEAR_COL = re.compile(r"^\s*(\d{4})(?:\s*\[YR\d{4}\])?\s*$")
_COUNTRY_COLS = ("country code", "country")
_CODE_COLS = ("series code", "indicator code", "indicator")
_META_COLS = {"country name", "series name", "indicator name", "unnamed"}


def convert_wb_wide(path: str | Path, passthrough: bool = False,
                    years: Sequence[int] | None = None) -> PanelTable:
    """Convert a World Bank wide export (one column per year) to a panel.

    Preamble lines before the header (as in WB bulk downloads) are skipped.
    Series codes are mapped to variable keys; unknown codes are rejected
    unless ``passthrough`` is set.
    """
    text = Path(path).read_text(encoding="utf-8-sig")
    rows = [r for r in csv.reader(io.StringIO(text))]
    hdr_idx = None
    for i, r in enumerate(rows):
        low = [c.strip().lower() for c in r]
        if any(c in _COUNTRY_COLS for c in low) and any(c in _CODE_COLS for c in low):
            hdr_idx = i
            break
    if hdr_idx is None:
        raise DataError(f"{path}: no country/indicator-code header found")
    header = [c.strip() for c in rows[hdr_idx]]
    low = [c.lower() for c in header]
    ccol = next(low.index(c) for c in _COUNTRY_COLS if c in low)
    icol = next(low.index(c) for c in _CODE_COLS if c in low)
    ycols = {}
    for j, name in enumerate(header):
        if j in (ccol, icol) or low[j] in _META_COLS or name == "":
            continue
        m = _YEAR_COL.match(name)
        if not m:
            raise DataError(f"{path}: unknown year column label {name!r}")
        ycols[j] = int(m.group(1))
    obs, seen = [], set()
    for rowno, r in enumerate(rows[hdr_idx + 1:], start=hdr_idx + 2):
        if not r or all(c.strip() == "" for c in r):
            continue
        if len(r) <= max(icol, ccol):
            continue  # WB footer lines ("Data from database: ...")
        country = r[ccol].strip()
        if not country or not r[icol].strip():
            continue
        try:
            key = resolve_indicator(r[icol], passthrough)
        except DataError as exc:
            raise DataError(f"{path} row {rowno}: {exc}") from None
        for j, yr in ycols.items():
            ident = (country, key, yr)
            if ident in seen:
                raise DataError(f"{path} row {rowno}: duplicate {ident}")
            seen.add(ident)
            try:
                v = _parse_value(r[j]) if j < len(r) else None
            except ValueError:
                raise DataError(f"{path} row {rowno}: bad value {r[j]!r}") from None
            obs.append(Observation(country, key, yr, v))
    return PanelTable.from_observations(obs, years)


def write_wide_csv(panel: PanelTable, path: str | Path) -> None:
    """Write ``country,indicator,<year>...`` rows; missing cells are empty."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "indicator", *[str(y) for y in panel.years]])
        for e, ent in enumerate(panel.entities):
            for c, col in enumerate(panel.columns):
                cells = ["" if panel.missing[e, c, t] else repr(float(panel.values[e, c, t]))
                         for t in range(len(panel.years))]
                w.writerow([ent, col, *cells])


# --------------------------------------------------------------------------
# alignment and transforms

def align_panel(panel: PanelTable, entity: str, dependent: str,
                regressors: Sequence[str], years: Sequence[int] | None = None) -> AlignedSeriesSet:
    """Extract complete dependent/regressor vectors for one entity.

    Any missing cell in the requested slice is an error listing every
    (indicator, year) hole; impute first.
    """
    if entity not in panel.entities:
        raise DataError(f"unknown entity {entity!r}")
    keys = [dependent, *regressors]
    absent = [k for k in keys if k not in panel.columns]
    if absent:
        raise DataError(f"indicators not in panel: {absent}")
    if len(set(keys)) != len(keys):
        raise DataError("dependent and regressor names must be unique")
    yrs = list(panel.years) if years is None else [int(y) for y in years]
    ti = [panel.years.index(y) for y in yrs]
    e = panel.entities.index(entity)
    holes = []
    for k in keys:
        c = panel.columns.index(k)
        holes += [(k, yrs[i]) for i, t in enumerate(ti) if panel.missing[e, c, t]]
    if holes:
        raise DataError(f"{entity}: missing cells {holes}")
    get = lambda k: panel.values[e, panel.columns.index(k), ti]  # noqa: E731
    return AlignedSeriesSet(get(dependent), {k: get(k) for k in regressors},
                            np.asarray(yrs), entity, dependent)


def align_pooled(panel: PanelTable, dependent: str, regressors: Sequence[str],
                 entities: Sequence[str] | None = None,
                 years: Sequence[int] | None = None) -> list[AlignedSeriesSet]:
    """One aligned set per entity; model code stacks them without crossing entity borders."""
    ents = panel.entities if entities is None else entities
    return [align_panel(panel, e, dependent, regressors, years) for e in ents]


def lag(series, k: int) -> np.ma.MaskedArray:
    """Shift forward by ``k``; the first ``k`` slots are masked."""
    s = np.ma.asarray(series, dtype=float)
    n = len(s)
    if k < 0:
        raise ValueError("lag order must be non-negative")
    if k >= n and k > 0:
        raise ValueError(f"lag {k} >= series length {n}")
    if k == 0:
        return np.ma.MaskedArray(s.data.copy(), mask=np.ma.getmaskarray(s).copy())
    data = np.empty(n)
    mask = np.ones(n, dtype=bool)
    data[:k] = np.nan
    data[k:] = s.data[:-k]
    mask[k:] = np.ma.getmaskarray(s)[:-k]
    return np.ma.MaskedArray(data, mask=mask)


def diff(series, k: int = 1, keep_length: bool = False):
    """``s_t - s_{t-k}``; shrinks by ``k`` unless ``keep_length`` (then leading slots are masked)."""
    s = np.ma.asarray(series, dtype=float)
    n = len(s)
    if k < 1:
        raise ValueError("difference order must be positive")
    if n <= k:
        raise ValueError(f"series of length {n} too short for difference of order {k}")
    d = s[k:] - s[:-k]
    if keep_length:
        out = np.ma.masked_all(n)
        out[k:] = d
        return out
    if np.ma.is_masked(d):
        return d
    return np.asarray(d.data if isinstance(d, np.ma.MaskedArray) else d, dtype=float)


def describe(panel: PanelTable) -> dict[str, SummaryStats | None]:
    """Min, quartiles (linear interpolation), mean and max per indicator.

    All-missing indicators map to ``None`` rather than zeros.
    """
    out: dict[str, SummaryStats | None] = {}
    for c, col in enumerate(panel.columns):
        vals = panel.values[:, c, :][~panel.missing[:, c, :]]
        if vals.size == 0:
            out[col] = None
            continue
        vals = np.sort(vals)
        q1, med, q3 = np.quantile(vals, [0.25, 0.5, 0.75])
        out[col] = SummaryStats(col, int(vals.size), float(vals[0]), float(q1), float(med),
                                float(math.fsum(vals) / vals.size), float(q3), float(vals[-1]))
    return out
