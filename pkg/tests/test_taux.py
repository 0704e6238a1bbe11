"""Emond-Mason rank correlation and its permutation test."""

import numpy as np
import pytest

from consensus_rank import TauXResult, TooFewItemsError, tau_x, tau_x_matrix, tau_x_pvalue

from helpers import ranking, tau_x_oracle, weak_orderings

ITEMS3 = ("A", "B", "C")
ITEMS4 = ("A", "B", "C", "D")


# --- anchors ------------------------------------------------------------------

def test_identical_lists_give_one():
    r = ranking({"A": 3, "B": 2, "C": 1})
    res = tau_x(r, ranking(dict(r.entries), rid="copy"))
    assert res.tau_x == 1.0
    assert res.n_common == 3


def test_reversed_lists_give_minus_one():
    levels = {k: i for i, k in enumerate(ITEMS4, start=1)}
    flipped = {k: -v for k, v in levels.items()}
    assert tau_x(ranking(levels), ranking(flipped, rid="rev")).tau_x == -1.0


def test_all_tied_versus_strict_gives_zero():
    tied = ranking({k: 1 for k in ITEMS4})
    strict = ranking({k: i for i, k in enumerate(ITEMS4)}, rid="s")
    assert tau_x(tied, strict).tau_x == 0.0


# --- oracle agreement ----------------------------------------------------------

def test_exhaustive_three_item_pairs_match_oracle():
    orderings = list(weak_orderings(ITEMS3))
    assert len(orderings) == 13
    for e1 in orderings:
        for e2 in orderings:
            r1 = ranking(e1, rid="r1")
            r2 = ranking(e2, rid="r2")
            assert tau_x(r1, r2).tau_x == tau_x_oracle(r1, r2)


def test_partial_overlap_matches_oracle():
    rng = np.random.default_rng(3)
    items = tuple("ABCDEF")
    for _ in range(50):
        k1, k2 = rng.integers(2, 7, size=2)
        sub1 = rng.choice(items, size=k1, replace=False)
        sub2 = rng.choice(items, size=k2, replace=False)
        r1 = ranking({i: float(v) for i, v in zip(sub1, rng.integers(1, 4, size=k1))}, rid="r1")
        r2 = ranking({i: float(v) for i, v in zip(sub2, rng.integers(1, 4, size=k2))}, rid="r2")
        got = tau_x(r1, r2)
        assert got.tau_x == pytest.approx(tau_x_oracle(r1, r2), abs=1e-15)
        assert got.n_common == len(set(sub1) | set(sub2))


def test_symmetry_and_relabel_invariance():
    r1 = ranking({"A": 3, "B": 2, "C": 2, "D": 1})
    r2 = ranking({"B": 9, "C": 4, "D": 4, "E": 1}, rid="r2")
    base = tau_x(r1, r2).tau_x
    assert tau_x(r2, r1).tau_x == base
    # Monotone transforms of the levels change nothing.
    warped = ranking({k: 2.0 * v**3 + 5 for k, v in r2.entries.items()}, rid="warp")
    assert tau_x(r1, warped).tau_x == base
    # lower_is_better with negated levels is the same ordering.
    mirrored = ranking({k: -v for k, v in r2.entries.items()}, rid="mir",
                       direction="lower_is_better")
    assert tau_x(r1, mirrored).tau_x == base


def test_too_few_items():
    with pytest.raises(TooFewItemsError):
        tau_x(ranking({"A": 1}), ranking({"A": 2}, rid="r2"))


def test_result_validation():
    with pytest.raises(ValueError):
        TauXResult(tau_x=1.5, n_common=3)
    with pytest.raises(ValueError):
        TauXResult(tau_x=0.0, n_common=3, p_value=-0.1)


# --- permutation p-values -------------------------------------------------------

def test_pvalue_identical_lists_is_small():
    levels = {f"J{i:02d}": float(i) for i in range(10)}
    r1 = ranking(levels, rid="a")
    r2 = ranking(dict(levels), rid="b")
    p = tau_x_pvalue(r1, r2, replicates=1000, seed=5)
    assert p <= 0.01


def test_pvalue_add_one_rule_bounds():
    r1 = ranking({"A": 1, "B": 2, "C": 3})
    r2 = ranking({"A": 3, "B": 1, "C": 2}, rid="r2")
    p1 = tau_x_pvalue(r1, r2, replicates=1, seed=0)
    assert p1 in (0.5, 1.0)
    p = tau_x_pvalue(r1, r2, replicates=400, seed=0)
    assert 1 / 401 <= p <= 1.0


def test_pvalue_deterministic():
    r1 = ranking({"A": 1, "B": 2, "C": 3, "D": 1})
    r2 = ranking({"A": 2, "B": 2, "C": 1, "D": 3}, rid="r2")
    assert tau_x_pvalue(r1, r2, seed=9) == tau_x_pvalue(r1, r2, seed=9)
    with pytest.raises(ValueError):
        tau_x_pvalue(r1, r2, replicates=0)


# --- matrix ---------------------------------------------------------------------

def test_matrix_shape_symmetry(small_dataset):
    m = tau_x_matrix(small_dataset.lists)
    v = m.values
    assert v.shape == (6, 6)
    assert np.allclose(np.diag(v), 1.0)
    assert np.array_equal(v, v.T)
    assert np.all(v[np.isfinite(v)] >= -1.0) and np.all(v[np.isfinite(v)] <= 1.0)
    # Without replicates no off-diagonal p-values exist.
    assert np.isnan(m.p_values[0, 1])


def test_matrix_pvalues_and_determinism(small_dataset):
    m1 = tau_x_matrix(small_dataset.lists, replicates=200, seed=11)
    m2 = tau_x_matrix(small_dataset.lists, replicates=200, seed=11)
    assert np.array_equal(m1.values, m2.values)
    p = m1.p_values
    assert np.array_equal(p, m2.p_values, equal_nan=True)
    off = p[~np.eye(6, dtype=bool)]
    assert np.isfinite(off).all()
    assert (off >= 1 / 201).all() and (off <= 1.0).all()


def test_matrix_sparse_pair_becomes_none():
    r1 = ranking({"A": 2, "B": 1, "Z": 3}, rid="r1")
    r2 = ranking({"Z": 1.0}, rid="r2")
    r3 = ranking({"Z": 2.0}, rid="r3")
    m = tau_x_matrix([r1, r2, r3])
    assert m.results[1][2] is None
    assert np.isnan(m.values[1, 2])
    assert np.isfinite(m.values[0, 1])


def test_matrix_needs_two_lists():
    with pytest.raises(TooFewItemsError):
        tau_x_matrix([ranking({"A": 1, "B": 2})])
