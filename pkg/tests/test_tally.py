"""Pairwise win/tie tallies folded from ranking lists."""

import numpy as np
import pytest

from consensus_rank import (
    ComparisonTally,
    UnknownItemError,
    build_tally,
    registry_from_csv,
    tally_from_csv,
    tally_summary,
    tally_to_csv,
)

from helpers import ranking

REG2 = registry_from_csv("item_id,label\nA,Alpha\nB,Beta\n")
REG3 = registry_from_csv("item_id,label\nA,Alpha\nB,Beta\nC,Gamma\n")


def test_single_win():
    t = build_tally([ranking({"A": 2, "B": 1})], REG2)
    assert t.wins[0, 1] == 1 and t.wins[1, 0] == 0
    assert not t.ties.any()


def test_single_tie():
    t = build_tally([ranking({"A": 1, "B": 1})], REG2)
    assert not t.wins.any()
    assert t.ties[0, 1] == 1 and t.ties[1, 0] == 1


def test_direction_reversal_swaps_wins_keeps_ties():
    entries = {"A": 3, "B": 3, "C": 1}
    hi = build_tally([ranking(entries)], REG3)
    lo = build_tally([ranking(entries, direction="lower_is_better")], REG3)
    assert np.array_equal(lo.wins, hi.wins.T)
    assert np.array_equal(lo.ties, hi.ties)
    assert hi.ties[0, 1] == 1


def test_two_strict_rankings_summary():
    lists = [ranking({"A": 3, "B": 2, "C": 1}, rid="r1"),
             ranking({"A": 1, "B": 3, "C": 2}, rid="r2")]
    t = build_tally(lists, REG3)
    s = tally_summary(t)
    assert s["total_comparisons"] == 6
    assert s["mean_comparisons_per_pair"] == pytest.approx(2.0)
    # r1: A>B, A>C, B>C; r2: B>A, B>C, C>A.
    assert t.wins[0, 1] == 1 and t.wins[1, 0] == 1
    assert t.wins[1, 2] == 2 and t.wins[2, 0] == 1


def test_aggregation_is_additive():
    r1 = ranking({"A": 2, "B": 1}, rid="r1")
    r2 = ranking({"A": 1, "B": 1, "C": 2}, rid="r2")
    both = build_tally([r1, r2], REG3)
    t1 = build_tally([r1], REG3)
    t2 = build_tally([r2], REG3)
    assert np.array_equal(both.wins, t1.wins + t2.wins)
    assert np.array_equal(both.ties, t1.ties + t2.ties)


def test_unrated_pairs_stay_zero():
    t = build_tally([ranking({"A": 2, "B": 1})], REG3)
    n = t.wins + t.wins.T + t.ties
    assert n[0, 2] == 0 and n[1, 2] == 0


def test_registry_permutation_permutes_tally(small_dataset):
    base = build_tally(small_dataset)
    ids = small_dataset.registry.item_ids
    labels = small_dataset.registry.labels
    perm = np.arange(len(ids))[::-1]
    reg = registry_from_csv(
        "item_id,label\n" + "\n".join(f"{ids[k]},{labels[k]}" for k in perm) + "\n"
    )
    t = build_tally(small_dataset.lists, reg)
    assert np.array_equal(t.wins, base.wins[np.ix_(perm, perm)])
    assert np.array_equal(t.ties, base.ties[np.ix_(perm, perm)])


def test_build_tally_rejects_unknown_item():
    with pytest.raises(UnknownItemError):
        build_tally([ranking({"A": 2, "Z": 1})], REG2)


def test_build_tally_requires_registry_for_bare_lists():
    with pytest.raises(ValueError):
        build_tally([ranking({"A": 2, "B": 1})])


def test_tally_validation():
    with pytest.raises(ValueError):
        ComparisonTally(wins=np.zeros((2, 3), dtype=int), ties=np.zeros((2, 3), dtype=int))
    with pytest.raises(ValueError):
        ComparisonTally(wins=np.eye(2, dtype=int), ties=np.zeros((2, 2), dtype=int))
    bad_ties = np.array([[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        ComparisonTally(wins=np.zeros((2, 2), dtype=int), ties=bad_ties)


def test_tally_arrays_frozen(small_tally):
    with pytest.raises(ValueError):
        small_tally.wins[0, 1] = 99


def test_csv_round_trip(small_dataset, small_tally):
    text = tally_to_csv(small_tally, small_dataset.registry)
    again = tally_from_csv(text, small_dataset.registry)
    assert np.array_equal(again.wins, small_tally.wins)
    assert np.array_equal(again.ties, small_tally.ties)


def test_fixture_hand_count(small_tally):
    # Six lists rating 10, 8, 6, 10, 5, 7 items give C(k,2) pairs each.
    s = tally_summary(small_tally)
    assert s["total_comparisons"] == 45 + 28 + 15 + 45 + 10 + 21
    assert s["mean_comparisons_per_pair"] == pytest.approx(164 / 45)
