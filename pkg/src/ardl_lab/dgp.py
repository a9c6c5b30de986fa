"""Synthetic data generators for calibration studies and the tutorial panel.

Generator contract (version 1): every draw comes from numpy's ``PCG64`` bit
generator seeded through ``numpy.random.SeedSequence``; Gaussian variates use
``Generator.standard_normal`` (ziggurat). Where one call needs several
independent streams they are the ``SeedSequence(seed).spawn(k)`` children in
the documented order, so a seed reproduces the same vectors on any machine
running numpy >= 1.17.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .frame import PanelTable

__all__ = [
    "GENERATOR_VERSION",
    "DgpSpec",
    "rng_for",
    "derive_seed",
    "gen_white_noise",
    "gen_random_walk",
    "gen_ar1",
    "gen_cointegrated_pair",
    "generate",
    "simulate_panel",
]

GENERATOR_VERSION = 1


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream keyed by ``(seed, *keys)``, e.g. one per bootstrap replication."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def derive_seed(global_seed: int, name: str) -> int:
    """Stable 63-bit child seed: first 8 bytes of sha256(f"{global_seed}:{name}")."""
    digest = hashlib.sha256(f"{int(global_seed)}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class DgpSpec:
    kind: str
    n: int
    seed: int = 0
    rho: float = 0.0
    slope: float = 0.5
    noise: float = 1.0

    def __post_init__(self):
        if self.kind not in ("white_noise", "random_walk", "ar1", "cointegrated_pair"):
            raise ValueError(f"unknown DGP kind {self.kind!r}")
        if self.n < 10:
            raise ValueError("n must be at least 10")
        if self.kind == "ar1" and not abs(self.rho) < 1:
            raise ValueError("ar1 requires |rho| < 1")
        if self.noise <= 0:
            raise ValueError("noise scale must be positive")


def gen_white_noise(n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    return rng_for(seed).standard_normal(n)


def gen_random_walk(n: int, seed: int) -> np.ndarray:
    """Cumulative sum of ``gen_white_noise(n, seed)``; element 0 is the first draw."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return np.cumsum(gen_white_noise(n, seed))


def gen_ar1(n: int, rho: float, seed: int, burn: int = 100) -> np.ndarray:
    if not abs(rho) < 1:
        raise ValueError("|rho| must be below 1")
    e = rng_for(seed).standard_normal(n + burn)
    out = np.empty(n + burn)
    out[0] = e[0] / np.sqrt(1 - rho * rho)
    for t in range(1, n + burn):
        out[t] = rho * out[t - 1] + e[t]
    return out[burn:]


def gen_cointegrated_pair(n: int, slope: float, noise: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``x`` a random walk, ``y = slope * x + noise * eps`` with iid Gaussian ``eps``.

    ``x`` and ``eps`` come from the first and second spawned child streams.
    """
    ss_x, ss_e = np.random.SeedSequence(int(seed)).spawn(2)
    x = np.cumsum(np.random.Generator(np.random.PCG64(ss_x)).standard_normal(n))
    eps = np.random.Generator(np.random.PCG64(ss_e)).standard_normal(n)
    return x, slope * x + noise * eps


def generate(spec: DgpSpec):
    if spec.kind == "white_noise":
        return spec.noise * gen_white_noise(spec.n, spec.seed)
    if spec.kind == "random_walk":
        return spec.noise * gen_random_walk(spec.n, spec.seed)
    if spec.kind == "ar1":
        return spec.noise * gen_ar1(spec.n, spec.rho, spec.seed)
    return gen_cointegrated_pair(spec.n, spec.slope, spec.noise, spec.seed)


# country codes of the G20 members (EU as EUU)
G20 = ("ARG", "AUS", "BRA", "CAN", "CHN", "DEU", "EUU", "FRA", "GBR", "IDN",
       "IND", "ITA", "JPN", "KOR", "MEX", "RUS", "SAU", "TUR", "USA", "ZAF")


def simulate_panel(seed: int, entities=G20, years=range(2007, 2024),
                   missing_fraction: float = 0.0) -> PanelTable:
    """A synthetic 'G20-like' panel with every indicator of the code map.

    Each entity draws a latent logistics factor (a random walk). The six LPI
    components load on it with independent noise; TRD is cointegrated with
    LPI1; LPI3 tracks TRD and TRF; ENS trends with LPI1; ECG depends on ENS,
    LPI1, TRD, LPI3 and TRF. Levels are scaled to resemble the real
    indicators. ``missing_fraction`` masks that share of cells at random.
    """
    ents = tuple(entities)
    yrs = tuple(int(y) for y in years)
    cols = ("LPI1", "LPI2", "LPI3", "LPI4", "LPI5", "LPI6",
            "CPT", "ATF", "TRP", "TRD", "TRF", "ECG", "ENS")
    n = len(yrs)
    vals = np.empty((len(ents), len(cols), n))
    children = np.random.SeedSequence(int(seed)).spawn(len(ents) + 1)
    for e, ss in enumerate(children[:-1]):
        g = np.random.Generator(np.random.PCG64(ss))
        base = g.uniform(2.6, 4.0)
        factor = base + 0.06 * np.cumsum(g.standard_normal(n))
        lpi = [factor + g.uniform(-0.3, 0.3) + 0.06 * g.standard_normal(n) for _ in range(6)]
        trd = g.uniform(25, 80) + 18 * (lpi[0] - base) + 2.0 * g.standard_normal(n)
        trf = np.maximum(0.3, g.uniform(1, 9) - 0.08 * np.arange(n) + 0.4 * g.standard_normal(n))
        lpi[2] = lpi[2] + 0.01 * (trd - trd.mean()) - 0.02 * (trf - trf.mean())
        ens = np.exp(g.uniform(11.5, 15.5) + 0.25 * (lpi[0] - base) + 0.03 * g.standard_normal(n))
        ecg = (g.uniform(2000, 50000) * (1 + 0.02 * np.arange(n))
               + 4000 * (lpi[0] - base) + 60 * (trd - trd.mean())
               + 2000 * (lpi[2] - lpi[2].mean()) - 150 * (trf - trf.mean())
               + 1e-4 * (ens - ens.mean()) + 300 * g.standard_normal(n))
        cpt = np.exp(g.uniform(13, 17) + 0.03 * np.arange(n) + 0.05 * g.standard_normal(n))
        atf = np.exp(g.uniform(5, 10) + 0.02 * np.arange(n) + 0.08 * g.standard_normal(n))
        trp = g.uniform(10, 35) + 1.5 * g.standard_normal(n)
        rows = [*lpi, cpt, atf, trp, trd, trf, ecg, ens]
        vals[e] = np.vstack(rows)
    missing = np.zeros(vals.shape, dtype=bool)
    if missing_fraction > 0:
        g = np.random.Generator(np.random.PCG64(children[-1]))
        missing = g.random(vals.shape) < missing_fraction
    return PanelTable(ents, yrs, cols, vals, missing)
