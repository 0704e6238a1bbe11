"""Independent oracles and data generators for the test suite.

Everything here is deliberately naive: direct double sums, per-comparison
likelihood expansion, finite differences, union-find. The package must agree
with these slow references, never the other way round.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Iterator, Sequence

import numpy as np

from consensus_rank import ComparisonTally, RankingList


# --- weak orderings ---------------------------------------------------------

def weak_orderings(items: Sequence[str]) -> Iterator[dict[str, float]]:
    """All weak orderings of ``items`` as item -> level maps.

    A weak ordering is an ordered partition of the items; the block index
    (1-based, larger = better) is the level. 4 items yield 75 orderings.
    """
    items = list(items)
    n = len(items)
    for assignment in itertools.product(range(n), repeat=n):
        blocks = sorted(set(assignment))
        if blocks != list(range(len(blocks))):
            continue  # block labels must be 0..k-1 with none skipped
        yield {item: float(level + 1) for item, level in zip(items, assignment)}


def ranking(
    entries: dict[str, float], rid: str = "r", year: int = 2020,
    direction: str = "higher_is_better",
) -> RankingList:
    return RankingList(ranking_id=rid, year=year, direction=direction, entries=entries)


def random_tally(rng: np.random.Generator, n_items: int, max_count: int = 4) -> ComparisonTally:
    wins = rng.integers(0, max_count + 1, size=(n_items, n_items))
    np.fill_diagonal(wins, 0)
    ties = np.triu(rng.integers(0, max_count + 1, size=(n_items, n_items)), 1)
    return ComparisonTally(wins=wins, ties=ties + ties.T)


def tie_rich_tally(rng: np.random.Generator, n_items: int) -> ComparisonTally:
    """Random tally with every pair tied at least once: never separated."""
    wins = rng.integers(0, 4, size=(n_items, n_items))
    np.fill_diagonal(wins, 0)
    ties = np.triu(rng.integers(1, 4, size=(n_items, n_items)), 1)
    return ComparisonTally(wins=wins, ties=ties + ties.T)


# --- tau_x oracle -----------------------------------------------------------

def _score(r: RankingList, i: str, j: str) -> int:
    if i == j or not (r.rates(i) and r.rates(j)):
        return 0
    return 1 if r.strength(i) >= r.strength(j) else -1


def tau_x_oracle(r1: RankingList, r2: RankingList) -> float:
    """Direct double sum over ordered pairs of the union item set."""
    union = sorted(set(r1.rated_ids) | set(r2.rated_ids))
    n_c = len(union)
    if n_c < 2:
        raise ValueError("need at least two items")
    total = 0
    for i in union:
        for j in union:
            total += abs(_score(r1, i, j) - _score(r2, i, j))
    return 1.0 - total / (n_c * (n_c - 1))


# --- likelihood oracle ------------------------------------------------------

def per_comparison_loglik(mu: np.ndarray, tally: ComparisonTally) -> float:
    """Expand every comparison: win -> log p, loss -> log(1-p), tie -> half of
    each. Must equal the sufficient-statistic form exactly."""
    total = 0.0
    n = tally.n_items
    for i in range(n):
        for j in range(i + 1, n):
            d = float(mu[i] - mu[j])
            log_p = d - math.log1p(math.exp(d)) if d < 30 else -math.log1p(math.exp(-d))
            log_q = -math.log1p(math.exp(d)) if d < 30 else -d - math.log1p(math.exp(-d))
            total += tally.wins[i, j] * log_p
            total += tally.wins[j, i] * log_q
            total += tally.ties[i, j] * 0.5 * (log_p + log_q)
    return total


def fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    g = np.empty_like(x, dtype=np.float64)
    for k in range(len(x)):
        up, dn = x.copy(), x.copy()
        up[k] += h
        dn[k] -= h
        g[k] = (f(up) - f(dn)) / (2.0 * h)
    return g


# --- clustering oracles -----------------------------------------------------

def clusters_oracle(mu: Sequence[float], tol: float) -> set[frozenset[int]]:
    """Union-find closure of |mu_i - mu_j| <= tol, as a set of index sets."""
    n = len(mu)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(mu[i] - mu[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, set[int]] = {}
    for k in range(n):
        groups.setdefault(find(k), set()).add(k)
    return {frozenset(g) for g in groups.values()}


def adjusted_rand(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """Hubert-Arabie adjusted Rand index."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError("label vectors must align")
    ua, ub = np.unique(a), np.unique(b)
    table = np.zeros((len(ua), len(ub)), dtype=np.int64)
    for k, la in enumerate(ua):
        for m, lb in enumerate(ub):
            table[k, m] = np.count_nonzero((a == la) & (b == lb))

    def comb2(x: np.ndarray) -> float:
        return float((x * (x - 1) // 2).sum())

    n = len(a)
    sum_ij = comb2(table)
    sum_a = comb2(table.sum(axis=1))
    sum_b = comb2(table.sum(axis=0))
    total = n * (n - 1) / 2
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return (sum_ij - expected) / (max_index - expected)


# --- generators --------------------------------------------------------------

def binomial_tally(
    mu: np.ndarray, n_per_pair: int, rng: np.random.Generator
) -> ComparisonTally:
    """Comparison outcomes drawn independently per pair from the model:
    wins_ij ~ Binomial(n, sigma(mu_i - mu_j)), no ties."""
    mu = np.asarray(mu, dtype=np.float64)
    n = len(mu)
    wins = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            p = 1.0 / (1.0 + math.exp(-(mu[i] - mu[j])))
            w = int(rng.binomial(n_per_pair, p))
            wins[i, j] = w
            wins[j, i] = n_per_pair - w
    return ComparisonTally(wins=wins, ties=np.zeros_like(wins))


def gumbel_rankings(
    mu: np.ndarray,
    n_rankings: int,
    rng: np.random.Generator,
    ids: Sequence[str] | None = None,
) -> list[RankingList]:
    """Complete strict rankings via Gumbel-perturbed abilities
    (Plackett-Luce sampling)."""
    mu = np.asarray(mu, dtype=np.float64)
    n = len(mu)
    ids = list(ids) if ids is not None else [f"I{k:02d}" for k in range(n)]
    lists = []
    for r in range(n_rankings):
        scores = mu + rng.gumbel(size=n)
        levels = scores.argsort().argsort() + 1  # 1..n, larger = better
        lists.append(
            RankingList(
                ranking_id=f"R{r:02d}",
                year=2020,
                direction="higher_is_better",
                entries={ids[k]: float(levels[k]) for k in range(n)},
            )
        )
    return lists


def two_group_tally(seed: int, *, n_rankings: int = 20) -> tuple[ComparisonTally, np.ndarray]:
    """The two-group fixture: 5 items at ability 0, 5 at ability 2, with one
    comparison per pair per ranking."""
    true_mu = np.array([2.0] * 5 + [0.0] * 5)
    rng = np.random.default_rng(seed)
    return binomial_tally(true_mu, n_rankings, rng), true_mu
