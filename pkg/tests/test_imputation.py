import numpy as np
import pytest

from ardl_lab.dgp import rng_for, simulate_panel
from ardl_lab.frame import DataError, PanelTable
from ardl_lab.imputation import (ForestParams, forest_predict, impute_panel, train_forest,
                                 train_regression_tree)


def _panel(values, missing):
    E, C, T = values.shape
    return PanelTable(tuple(f"E{i}" for i in range(E)), tuple(range(2000, 2000 + T)),
                      tuple(f"C{i}" for i in range(C)), values, missing)


def test_params_validation():
    for bad in (dict(trees=0), dict(min_leaf=0), dict(tol=0.0), dict(max_rounds=0)):
        with pytest.raises(ValueError):
            ForestParams(**bad)
    assert ForestParams().features_per_split(12) == 4


def test_constant_targets_give_a_single_leaf():
    tree = train_regression_tree(np.arange(10.0).reshape(-1, 1), np.full(10, 3.5), ForestParams(), rng_for(0))
    assert tree.n_leaves == 1
    assert tree.predict([[100.0]])[0] == 3.5


def test_clean_binary_split():
    X = np.arange(8.0).reshape(-1, 1)
    y = np.r_[np.zeros(4), np.full(4, 10.0)]
    tree = train_regression_tree(X, y, ForestParams(min_leaf=2), rng_for(0))
    assert tree.n_leaves == 2
    assert tree.predict([[1.0], [6.0]]).tolist() == [0.0, 10.0]
    assert 3.0 <= tree.threshold[0] < 4.0


def test_leaf_size_respected():
    g = rng_for(1)
    X, y = g.standard_normal((60, 3)), g.standard_normal(60)
    tree = train_regression_tree(X, y, ForestParams(min_leaf=5), rng_for(2))
    leaves = tree.feature < 0
    assert np.all(tree.n_samples[leaves] >= 5)


def test_tree_determinism_and_errors():
    g = rng_for(3)
    X, y = g.standard_normal((40, 4)), g.standard_normal(40)
    a = train_regression_tree(X, y, ForestParams(), rng_for(9))
    b = train_regression_tree(X, y, ForestParams(), rng_for(9))
    assert np.array_equal(a.threshold, b.threshold) and np.array_equal(a.value, b.value)
    with pytest.raises(ValueError):
        train_regression_tree(np.empty((0, 2)), np.empty(0), ForestParams(), rng_for(0))


def test_forest_average_and_empty():
    X = np.zeros((2, 1))
    params = ForestParams(trees=2, bootstrap=False)
    forest = [train_regression_tree(X[:1], [2.0], params, rng_for(0)),
              train_regression_tree(X[:1], [4.0], params, rng_for(0))]
    assert forest_predict(forest, [0.0]) == 3.0
    with pytest.raises(ValueError):
        forest_predict([], [0.0])


def test_forest_threads_invariant():
    g = rng_for(4)
    X, y = g.standard_normal((50, 3)), g.standard_normal(50)
    one = train_forest(X, y, ForestParams(trees=12, seed=5))
    many = train_forest(X, y, ForestParams(trees=12, seed=5, threads=4))
    assert np.array_equal(forest_predict(one, X), forest_predict(many, X))


def test_complete_panel_is_returned_unchanged():
    p = simulate_panel(0, entities=("AAA", "BBB"), years=range(2010, 2016))
    out, rep = impute_panel(p, ForestParams(trees=5))
    assert out is p and rep.total_imputed == 0 and rep.rounds == 0


def test_linear_trend_cell_stays_in_range():
    t = np.arange(10.0)
    vals = np.stack([np.stack([t, 2 * t + 1, 5 - t])])
    miss = np.zeros_like(vals, dtype=bool)
    miss[0, 0, 4] = True
    out, rep = impute_panel(_panel(vals, miss), ForestParams(trees=30, seed=1))
    v = out.values[0, 0, 4]
    assert t.min() <= v <= t.max()
    assert rep.imputed == {"C0": 1, "C1": 0, "C2": 0}
    assert out.n_missing == 0


def _masked_sim(seed, frac=0.1):
    p = simulate_panel(seed, entities=("AAA", "BBB", "CCC"), years=range(2010, 2022))
    miss = rng_for(seed, 1).random(p.values.shape) < frac
    return p, p.replace_values(np.where(miss, np.nan, p.values), miss)


def test_observed_cells_bit_identical_and_seed_reproducible():
    _, masked = _masked_sim(3)
    a, _ = impute_panel(masked, ForestParams(trees=10, seed=7))
    b, _ = impute_panel(masked, ForestParams(trees=10, seed=7, threads=3))
    obs = ~masked.missing
    assert np.array_equal(a.values[obs], masked.values[obs])
    assert np.array_equal(a.values, b.values)
    assert a.n_missing == 0


def test_cross_entity_mode_fills_everything():
    _, masked = _masked_sim(4)
    out, rep = impute_panel(masked, ForestParams(trees=8, seed=1, cross_entity=True))
    assert rep.mode == "cross_entity" and out.n_missing == 0
    assert rep.total_imputed == masked.n_missing


def test_all_missing_column_is_an_error():
    vals = np.ones((1, 2, 5))
    miss = np.zeros_like(vals, dtype=bool)
    miss[0, 1, :] = True
    with pytest.raises(DataError, match="C1"):
        impute_panel(_panel(vals, miss), ForestParams(trees=2))


def test_sparse_column_is_skipped_with_warning():
    g = rng_for(5)
    vals = g.standard_normal((2, 2, 6))
    miss = np.zeros_like(vals, dtype=bool)
    miss[0, 1, :4] = True  # entity E0 keeps only two values of C1
    miss[1, 0, 2] = True
    out, rep = impute_panel(_panel(vals, miss), ForestParams(trees=5))
    assert len(rep.skipped) == 4 and rep.warnings
    assert out.missing[0, 1, :4].all() and not out.missing[1, 0, 2]
