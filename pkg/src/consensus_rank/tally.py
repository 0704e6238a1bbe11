"""Paired-comparison sufficient statistics from validated ranking lists.

Each ranking contributes one comparison to every unordered pair of items it
rates: a strict level difference is a win for the higher item, an exact level
equality is a tie. A ranking that rates only one of the two items contributes
nothing for that pair. Integer win/tie counts are kept exact; the half-win
coding of ties is applied later, inside the likelihood.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import DuplicateEntryError, MissingHeaderError, UnknownItemError
from .ingest import Dataset, ItemRegistry, RankingList

TALLY_HEADER = ("item_i", "item_j", "wins_ij", "wins_ji", "ties")


@dataclass(frozen=True)
class ComparisonTally:
    """Win/tie counts per unordered item pair.

    ``wins[i, j]`` counts rankings rating item i strictly above item j;
    ``ties`` is symmetric with a zero diagonal. Arrays are frozen after
    construction.
    """

    wins: np.ndarray
    ties: np.ndarray

    def __post_init__(self) -> None:
        wins = np.asarray(self.wins, dtype=np.int64)
        ties = np.asarray(self.ties, dtype=np.int64)
        if wins.ndim != 2 or wins.shape[0] != wins.shape[1] or wins.shape != ties.shape:
            raise ValueError(f"tally arrays must be square and congruent, got {wins.shape} and {ties.shape}")
        if (wins < 0).any() or (ties < 0).any():
            raise ValueError("tally counts must be non-negative")
        if np.diagonal(wins).any() or np.diagonal(ties).any():
            raise ValueError("tally diagonals must be zero")
        if not np.array_equal(ties, ties.T):
            raise ValueError("tie counts must be symmetric")
        wins.flags.writeable = False
        ties.flags.writeable = False
        object.__setattr__(self, "wins", wins)
        object.__setattr__(self, "ties", ties)

    @property
    def n_items(self) -> int:
        return self.wins.shape[0]

    @property
    def n_per_pair(self) -> np.ndarray:
        """Symmetric matrix of comparison counts: wins + losses + ties."""
        return self.wins + self.wins.T + self.ties

    @property
    def total_comparisons(self) -> int:
        iu = np.triu_indices(self.n_items, k=1)
        return int(self.wins.sum() + self.ties[iu].sum())


def build_tally(lists: Dataset | Iterable[RankingList], registry: ItemRegistry | None = None) -> ComparisonTally:
    """Fold ranking lists into a :class:`ComparisonTally`.

    Accepts a validated :class:`~consensus_rank.ingest.Dataset` or an iterable
    of lists plus an explicit registry. Per-ranking contributions are
    independent and merged additively.
    """
    if isinstance(lists, Dataset):
        registry = lists.registry
        rankings: Iterable[RankingList] = lists.lists
    else:
        if registry is None:
            raise ValueError("registry is required when lists is not a Dataset")
        rankings = lists
    n = registry.n_items
    index = {item_id: k for k, item_id in enumerate(registry.item_ids)}
    wins = np.zeros((n, n), dtype=np.int64)
    ties = np.zeros((n, n), dtype=np.int64)
    for ranking in rankings:
        try:
            idx = np.array([index[item_id] for item_id in ranking.entries], dtype=np.intp)
        except KeyError as exc:
            raise UnknownItemError(
                f"ranking '{ranking.ranking_id}' references unknown item {exc.args[0]!r}"
            ) from None
        strength = np.array([ranking.strength(item_id) for item_id in ranking.entries])
        diff = strength[:, None] - strength[None, :]
        sub = np.ix_(idx, idx)
        wins[sub] += diff > 0
        ties[sub] += (diff == 0) & ~np.eye(len(idx), dtype=bool)
    return ComparisonTally(wins=wins, ties=ties)


def tally_summary(tally: ComparisonTally) -> dict[str, float]:
    """Total comparison count and its mean over all item pairs."""
    n = tally.n_items
    n_pairs = n * (n - 1) // 2
    total = tally.total_comparisons
    return {
        "total_comparisons": total,
        "mean_comparisons_per_pair": total / n_pairs if n_pairs else 0.0,
    }


def tally_to_csv(tally: ComparisonTally, registry: ItemRegistry) -> str:
    """Export as ``item_i,item_j,wins_ij,wins_ji,ties``, one row per pair
    with any nonzero count."""
    ids = registry.item_ids
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TALLY_HEADER)
    iu, ju = np.triu_indices(tally.n_items, k=1)
    for i, j in zip(iu, ju):
        w_ij, w_ji, t = int(tally.wins[i, j]), int(tally.wins[j, i]), int(tally.ties[i, j])
        if w_ij or w_ji or t:
            writer.writerow([ids[i], ids[j], w_ij, w_ji, t])
    return out.getvalue()


def tally_from_csv(source: bytes | str | IO, registry: ItemRegistry) -> ComparisonTally:
    """Inverse of :func:`tally_to_csv`; absent pairs mean zero counts."""
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows or tuple(cell.strip() for cell in rows[0]) != TALLY_HEADER:
        raise MissingHeaderError(f"tally header must be '{','.join(TALLY_HEADER)}'")
    n = registry.n_items
    index = {item_id: k for k, item_id in enumerate(registry.item_ids)}
    wins = np.zeros((n, n), dtype=np.int64)
    ties = np.zeros((n, n), dtype=np.int64)
    seen: set[tuple[int, int]] = set()
    for row in rows[1:]:
        if len(row) != 5:
            raise MissingHeaderError(f"garbled tally row: {row!r}")
        id_i, id_j = row[0].strip(), row[1].strip()
        for item_id in (id_i, id_j):
            if item_id not in index:
                raise UnknownItemError(f"tally references unknown item '{item_id}'")
        i, j = index[id_i], index[id_j]
        if i == j:
            raise DuplicateEntryError(f"tally pairs an item with itself: '{id_i}'")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DuplicateEntryError(f"duplicate tally row for pair ({id_i}, {id_j})")
        seen.add(key)
        w_ij, w_ji, t = (int(cell) for cell in row[2:])
        wins[i, j] += w_ij
        wins[j, i] += w_ji
        ties[i, j] += t
        ties[j, i] += t
    return ComparisonTally(wins=wins, ties=ties)
