import numpy as np
import pytest

from ardl_lab.dgp import (DgpSpec, derive_seed, gen_ar1, gen_cointegrated_pair, gen_random_walk,
                          gen_white_noise, generate, rng_for, simulate_panel)


def test_white_noise_determinism():
    assert np.array_equal(gen_white_noise(50, 3), gen_white_noise(50, 3))
    assert not np.array_equal(gen_white_noise(50, 3), gen_white_noise(50, 4))


def test_white_noise_moments():
    e = gen_white_noise(100_000, 0)
    assert abs(e.mean()) <= 0.02
    assert abs(e.std(ddof=1) - 1) <= 0.02


def test_random_walk_inverts_noise():
    e = gen_white_noise(30, 9)
    w = gen_random_walk(30, 9)
    assert w[0] == e[0]
    assert np.allclose(np.diff(w), e[1:], rtol=0, atol=1e-12)


def test_random_walk_variance_grows_linearly():
    walks = np.array([gen_random_walk(40, s) for s in range(2000)])
    v = walks.var(axis=0)
    slope = np.polyfit(np.arange(1, 41), v, 1)[0]
    assert slope == pytest.approx(1.0, abs=0.15)


def test_cointegrated_pair_special_cases():
    x, y = gen_cointegrated_pair(50, 0.7, 0.0, 1)
    assert np.array_equal(y, 0.7 * x)
    x, y = gen_cointegrated_pair(2000, 0.0, 1.0, 2)
    assert abs(np.corrcoef(np.diff(x), y[1:])[0, 1]) < 0.1


def test_ar1_is_stationary_around_zero():
    z = gen_ar1(5000, 0.5, 3)
    assert abs(z.mean()) < 0.1
    assert np.corrcoef(z[1:], z[:-1])[0, 1] == pytest.approx(0.5, abs=0.05)
    with pytest.raises(ValueError):
        gen_ar1(10, 1.0, 0)


def test_spec_validation_and_dispatch():
    with pytest.raises(ValueError):
        DgpSpec("garch", 20)
    with pytest.raises(ValueError):
        DgpSpec("white_noise", 5)
    with pytest.raises(ValueError):
        DgpSpec("ar1", 20, rho=1.2)
    with pytest.raises(ValueError):
        DgpSpec("white_noise", 20, noise=0.0)
    assert np.array_equal(generate(DgpSpec("random_walk", 20, seed=5)), gen_random_walk(20, 5))
    x, y = generate(DgpSpec("cointegrated_pair", 20, seed=5, slope=0.5, noise=0.1))
    assert len(x) == len(y) == 20


def test_streams_and_seed_derivation():
    a = rng_for(1, 2).standard_normal(5)
    assert np.array_equal(a, rng_for(1, 2).standard_normal(5))
    assert not np.array_equal(a, rng_for(1, 3).standard_normal(5))
    s = derive_seed(7, "bounds")
    assert s == derive_seed(7, "bounds") and 0 <= s < 2 ** 63
    assert s != derive_seed(7, "impute") and s != derive_seed(8, "bounds")


def test_simulated_panel_shape_and_missing():
    p = simulate_panel(0, years=range(2010, 2020), missing_fraction=0.1)
    assert p.values.shape == (20, 13, 10)
    assert 0 < p.n_missing < p.values.size * 0.2
    q = simulate_panel(0, years=range(2010, 2020), missing_fraction=0.1)
    assert np.array_equal(p.missing, q.missing) and np.array_equal(p.values, q.values, equal_nan=True)
    assert simulate_panel(0).n_missing == 0
