"""Emond-Mason tau_x rank correlation for weak orderings, with
permutation-based p-values.

For two lists k1, k2 over the union of items rated by at least one of them,
each list k gets a score matrix a_k with

    a_k[i, j] = +1  if k rates item i higher than or tied with item j,
                -1  if k rates item i strictly below item j,
                 0  if i == j or k does not rate i or j,

and

    tau_x = 1 - sum_{i,j} |a_k1[i, j] - a_k2[i, j]| / (N_c (N_c - 1)),

N_c being the union size. Ties score +1 in both directions, which makes
tau_x(r, r) = 1 for any weak ordering; on strict orders tau_x reduces to
Kendall's tau. The double sum is accumulated in integers, so the anchor
values 1, -1, and 0 are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TooFewItemsError
from .ingest import RankingList

# Permutations are generated in fixed-size batches so that results do not
# depend on how many replicates are requested at a time.
_CHUNK = 256


@dataclass(frozen=True)
class TauXResult:
    tau_x: float
    n_common: int
    p_value: float | None = None

    def __post_init__(self) -> None:
        if not -1.0 <= self.tau_x <= 1.0:
            raise ValueError(f"tau_x out of range: {self.tau_x}")
        if self.p_value is not None and not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value out of range: {self.p_value}")


@dataclass(frozen=True)
class TauXMatrix:
    """Pairwise tau_x over a set of lists; entries are None where a pair
    shares too few items (N_c < 2)."""

    ranking_ids: tuple[str, ...]
    results: tuple[tuple[TauXResult | None, ...], ...]

    @property
    def values(self) -> np.ndarray:
        n = len(self.ranking_ids)
        out = np.full((n, n), np.nan)
        for i in range(n):
            for j in range(n):
                cell = self.results[i][j]
                if cell is not None:
                    out[i, j] = cell.tau_x
        return out

    @property
    def p_values(self) -> np.ndarray:
        n = len(self.ranking_ids)
        out = np.full((n, n), np.nan)
        for i in range(n):
            for j in range(n):
                cell = self.results[i][j]
                if cell is not None and cell.p_value is not None:
                    out[i, j] = cell.p_value
        return out


def _union_scores(r1: RankingList, r2: RankingList) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Union item order plus per-list strength vectors and rated masks."""
    union = sorted(set(r1.entries) | set(r2.entries))
    m1 = np.array([r1.rates(u) for u in union])
    m2 = np.array([r2.rates(u) for u in union])
    s1 = np.array([r1.strength(u) if r1.rates(u) else 0.0 for u in union])
    s2 = np.array([r2.strength(u) if r2.rates(u) else 0.0 for u in union])
    return union, s1, m1, s2, m2


def _score_matrix(strength: np.ndarray, rated: np.ndarray) -> np.ndarray:
    """The a-matrix of one list over the union, as int8."""
    a = np.where(strength[:, None] >= strength[None, :], 1, -1).astype(np.int8)
    both = rated[:, None] & rated[None, :]
    a[~both] = 0
    np.fill_diagonal(a, 0)
    return a


def _tau_from_numerator(numerator: int, n_common: int) -> float:
    return 1.0 - numerator / (n_common * (n_common - 1))


def tau_x(r1: RankingList, r2: RankingList) -> TauXResult:
    """tau_x between two weak orderings, without a p-value.

    Raises TooFewItems when the union of rated items has fewer than two
    members.
    """
    union, s1, m1, s2, m2 = _union_scores(r1, r2)
    n_common = len(union)
    if n_common < 2:
        raise TooFewItemsError(
            f"tau_x needs at least 2 items across '{r1.ranking_id}' and '{r2.ranking_id}', got {n_common}"
        )
    a1 = _score_matrix(s1, m1)
    a2 = _score_matrix(s2, m2)
    numerator = int(np.abs(a1 - a2, dtype=np.int64).sum())
    return TauXResult(tau_x=_tau_from_numerator(numerator, n_common), n_common=n_common)


def _pvalue_stream(r1: RankingList, r2: RankingList, replicates: int, seq: np.random.SeedSequence) -> float:
    """Two-sided permutation p-value with the add-one correction.

    The null of no association is simulated by randomly reassigning r2's
    levels across the items it rates. Only the block of union pairs rated by
    both lists changes under such a permutation (any pair with an unrated
    endpoint has a2 = 0 regardless), so the numerator splits into a constant
    part and a block part recomputed per replicate.
    """
    union, s1, m1, s2, m2 = _union_scores(r1, r2)
    n_common = len(union)
    if n_common < 2:
        raise TooFewItemsError(
            f"tau_x needs at least 2 items across '{r1.ranking_id}' and '{r2.ranking_id}', got {n_common}"
        )
    a1 = _score_matrix(s1, m1)
    a2 = _score_matrix(s2, m2)
    obs_num = int(np.abs(a1 - a2, dtype=np.int64).sum())
    denom = n_common * (n_common - 1)

    rated2 = np.flatnonzero(m2)
    levels2 = s2[rated2]
    a1_block = a1[np.ix_(rated2, rated2)]
    outside = obs_num - int(np.abs(a1_block - a2[np.ix_(rated2, rated2)], dtype=np.int64).sum())

    # Two-sided comparison |tau_b| >= |tau_obs| done on integer numerators:
    # |1 - S/D| >= |1 - S_obs/D|  <=>  |D - S| >= |D - S_obs|.
    obs_dist = abs(denom - obs_num)
    rng = np.random.default_rng(seq)
    m = len(rated2)
    hits = 0
    done = 0
    eye = np.eye(m, dtype=bool)
    while done < replicates:
        batch = min(_CHUNK, replicates - done)
        if m > 1:
            order = np.argsort(rng.random((batch, m)), axis=1)
        else:
            order = np.zeros((batch, max(m, 1)), dtype=np.intp)
        perm_levels = levels2[order] if m else np.zeros((batch, 0))
        ge = perm_levels[:, :, None] >= perm_levels[:, None, :]
        a2_block = np.where(ge, 1, -1).astype(np.int8)
        a2_block[:, eye] = 0
        block_num = np.abs(a1_block[None, :, :] - a2_block, dtype=np.int64).sum(axis=(1, 2))
        dist = np.abs(denom - (outside + block_num))
        hits += int((dist >= obs_dist).sum())
        done += batch
    return (1 + hits) / (replicates + 1)


def tau_x_pvalue(r1: RankingList, r2: RankingList, replicates: int = 1000, seed: int = 0) -> float:
    """Permutation p-value for tau_x(r1, r2); deterministic given seed."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    return _pvalue_stream(r1, r2, replicates, np.random.SeedSequence((seed, 1)))


def tau_x_matrix(
    lists: Sequence[RankingList],
    *,
    replicates: int | None = None,
    seed: int = 0,
) -> TauXMatrix:
    """Symmetric matrix of tau_x over all list pairs.

    Diagonal entries are 1 by convention. Pairs with N_c < 2 become None
    rather than aborting the matrix. With ``replicates`` set, off-diagonal
    entries carry permutation p-values; each pair (k1, k2) draws from its own
    stream keyed by (seed, k1, k2), so the matrix is reproducible whether
    entries are computed serially or in parallel.
    """
    if len(lists) < 2:
        raise TooFewItemsError("a tau_x matrix needs at least 2 lists")
    n = len(lists)
    grid: list[list[TauXResult | None]] = [[None] * n for _ in range(n)]
    for i, ranking in enumerate(lists):
        grid[i][i] = TauXResult(tau_x=1.0, n_common=len(ranking.entries))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                cell = tau_x(lists[i], lists[j])
            except TooFewItemsError:
                continue
            if replicates is not None:
                p = _pvalue_stream(
                    lists[i], lists[j], replicates, np.random.SeedSequence((seed, 1, i, j))
                )
                cell = TauXResult(tau_x=cell.tau_x, n_common=cell.n_common, p_value=p)
            grid[i][j] = grid[j][i] = cell
    return TauXMatrix(
        ranking_ids=tuple(r.ranking_id for r in lists),
        results=tuple(tuple(row) for row in grid),
    )
