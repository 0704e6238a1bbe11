"""Tie-modified Bradley-Terry likelihood and its maximizer.

The log-likelihood in sufficient-statistic form is

    l(mu) = sum_{i<j} [ s_ij (mu_i - mu_j) - n_ij log(1 + exp(mu_i - mu_j)) ]

with s_ij = wins_ij + 0.5 ties_ij and n_ij = wins_ij + wins_ji + ties_ij: a
tie counts as half a win and half a loss for each side. The implied win
probability is the logistic sigma(mu_i - mu_j). Only pairwise differences are
identifiable, so one ability is pinned to zero and optimization runs over the
remaining coordinates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import expit

from .errors import (
    DimensionMismatchError,
    DisconnectedGraphError,
    DivergentEstimateError,
    NotConvergedError,
)
from .tally import ComparisonTally


@dataclass(frozen=True)
class AbilityEstimate:
    """Fitted ability vector with diagnostics.

    ``mu[constraint_index]`` is exactly 0. ``gradient_norm`` is the max-norm
    of the gradient over the free coordinates at ``mu``.
    """

    mu: np.ndarray
    constraint_index: int
    loglik: float
    converged: bool
    iterations: int
    gradient_norm: float

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=np.float64)
        mu.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        if mu[self.constraint_index] != 0.0:
            raise ValueError("mu[constraint_index] must be exactly 0")


def _suff_stats(tally: ComparisonTally) -> tuple[np.ndarray, np.ndarray]:
    # S[i, j] = wins_ij + 0.5 ties_ij, N symmetric comparison counts.
    s = tally.wins + 0.5 * tally.ties
    n = (tally.wins + tally.wins.T + tally.ties).astype(np.float64)
    return s, n


def _check_mu(mu: np.ndarray, tally: ComparisonTally) -> np.ndarray:
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (tally.n_items,):
        raise DimensionMismatchError(
            f"mu has shape {mu.shape}, tally has {tally.n_items} items"
        )
    return mu


def _loglik_sn(mu: np.ndarray, s: np.ndarray, n: np.ndarray) -> float:
    d = mu[:, None] - mu[None, :]
    iu = np.triu_indices(len(mu), k=1)
    # log(1 + exp(x)) evaluated stably for large |x|.
    return float(np.sum(s[iu] * d[iu] - n[iu] * np.logaddexp(0.0, d[iu])))


def _gradient_sn(mu: np.ndarray, s: np.ndarray, n: np.ndarray) -> np.ndarray:
    d = mu[:, None] - mu[None, :]
    return (s - n * expit(d)).sum(axis=1)


def _hessian_sn(mu: np.ndarray, n: np.ndarray) -> np.ndarray:
    d = mu[:, None] - mu[None, :]
    p = expit(d)
    w = n * p * (1.0 - p)
    np.fill_diagonal(w, 0.0)
    h = w.copy()
    np.fill_diagonal(h, -w.sum(axis=1))
    return h


def loglik(mu: np.ndarray, tally: ComparisonTally) -> float:
    """Evaluate l(mu); pairs with zero comparisons contribute nothing."""
    mu = _check_mu(mu, tally)
    s, n = _suff_stats(tally)
    return _loglik_sn(mu, s, n)


def loglik_gradient(mu: np.ndarray, tally: ComparisonTally) -> np.ndarray:
    """Analytic gradient: g_i = sum_{j != i} [s_ij - n_ij sigma(mu_i - mu_j)]."""
    mu = _check_mu(mu, tally)
    s, n = _suff_stats(tally)
    return _gradient_sn(mu, s, n)


def loglik_hessian(mu: np.ndarray, tally: ComparisonTally) -> np.ndarray:
    """Analytic Hessian; row sums are zero by translation invariance."""
    mu = _check_mu(mu, tally)
    _, n = _suff_stats(tally)
    return _hessian_sn(mu, n)


def check_connected(tally: ComparisonTally, constraint_index: int) -> None:
    """Raise DisconnectedGraph if some item shares no comparison path with
    the reference item."""
    n = tally.n_items
    adj = (tally.wins + tally.wins.T + tally.ties) > 0
    seen = np.zeros(n, dtype=bool)
    seen[constraint_index] = True
    queue = deque([constraint_index])
    while queue:
        k = queue.popleft()
        for j in np.flatnonzero(adj[k] & ~seen):
            seen[j] = True
            queue.append(int(j))
    if not seen.all():
        unreachable = tuple(int(j) for j in np.flatnonzero(~seen))
        raise DisconnectedGraphError(
            f"items {unreachable} share no comparison path with the reference item",
            unreachable=unreachable,
        )


def _check_separation(s: np.ndarray, constraint_index: int) -> None:
    """Raise DivergentEstimate when no finite maximizer exists.

    Ford's condition: the MLE is finite iff the digraph with an edge i -> j
    whenever s_ij > 0 is strongly connected. A tie credits both directions,
    so only genuinely one-sided cuts fail.
    """
    _, labels = connected_components(csr_matrix(s > 0), directed=True, connection="strong")
    if (labels == labels[constraint_index]).all():
        return
    divergent = tuple(int(k) for k in np.flatnonzero(labels != labels[constraint_index]))
    raise DivergentEstimateError(
        f"items {divergent} trade no wins or ties across some split of the data; "
        "the comparisons are separated and the estimates diverge "
        "(set ridge > 0 to regularize)"
    )


def _newton_solve(
    s: np.ndarray,
    n: np.ndarray,
    constraint_index: int,
    mu0: np.ndarray,
    tol: float,
    max_iter: int,
    ridge: float,
    divergence_bound: float,
) -> tuple[np.ndarray, float, int, bool]:
    """Damped Newton ascent of l(mu) - ridge/2 ||mu||^2 with mu fixed at the
    constraint. Returns (mu, gradient max-norm, iterations, converged)."""
    n_items = len(mu0)
    free = np.arange(n_items) != constraint_index
    mu = mu0.copy()
    mu[constraint_index] = 0.0

    def objective(m: np.ndarray) -> float:
        val = _loglik_sn(m, s, n)
        return val - 0.5 * ridge * float(m @ m) if ridge else val

    current = objective(mu)
    gnorm = np.inf
    for it in range(1, max_iter + 1):
        g = _gradient_sn(mu, s, n)
        if ridge:
            g = g - ridge * mu
        gnorm = float(np.abs(g[free]).max()) if free.any() else 0.0
        if gnorm <= tol:
            return mu, gnorm, it - 1, True
        h = _hessian_sn(mu, n)
        if ridge:
            h = h - ridge * np.eye(n_items)
        a = -h[np.ix_(free, free)]
        jitter = 0.0
        scale = max(1.0, float(np.abs(np.diagonal(a)).max()))
        while True:
            try:
                factor = cho_factor(a + jitter * np.eye(a.shape[0]), lower=True)
                break
            except np.linalg.LinAlgError:
                jitter = 1e-12 * scale if jitter == 0.0 else jitter * 100.0
                if jitter > 1e-3 * scale:
                    raise NotConvergedError("Newton step failed: Hessian not factorizable") from None
        step = cho_solve(factor, g[free])
        slack = 1e-12 * (1.0 + abs(current))
        t = 1.0
        for _ in range(50):
            cand = mu.copy()
            cand[free] += t * step
            value = objective(cand)
            if value >= current - slack:
                mu, current = cand, value
                break
            t *= 0.5
        else:
            # No ascent even at tiny steps: numerically at the optimum.
            return mu, gnorm, it, gnorm <= max(tol, 1e-6)
        worst = float(np.abs(mu).max())
        if worst > divergence_bound:
            offenders = tuple(int(k) for k in np.flatnonzero(np.abs(mu) > divergence_bound))
            raise DivergentEstimateError(
                f"ability estimates exceed {divergence_bound} for items {offenders}; "
                "the comparison data are separated (set ridge > 0 to regularize)"
            )
    g = _gradient_sn(mu, s, n)
    if ridge:
        g = g - ridge * mu
    gnorm = float(np.abs(g[free]).max()) if free.any() else 0.0
    return mu, gnorm, max_iter, gnorm <= tol


def fit_mle(
    tally: ComparisonTally,
    constraint_index: int = 0,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    ridge: float = 0.0,
    divergence_bound: float = 30.0,
    mu0: np.ndarray | None = None,
) -> AbilityEstimate:
    """Maximize the tie-modified Bradley-Terry likelihood.

    Damped Newton with step-halving; convergence is declared when the
    max-norm of the gradient over free coordinates drops to ``tol``.
    Separated data (no finite maximizer, or some |mu_i| exceeding
    ``divergence_bound``) raise DivergentEstimate unless ``ridge`` is
    positive.

    Raises
    ------
    DisconnectedGraphError, DivergentEstimateError, NotConvergedError
    """
    check_connected(tally, constraint_index)
    s, n = _suff_stats(tally)
    if ridge == 0.0:
        _check_separation(s, constraint_index)
    start = np.zeros(tally.n_items) if mu0 is None else _check_mu(mu0, tally).copy()
    mu, gnorm, iters, converged = _newton_solve(
        s, n, constraint_index, start, tol, max_iter, ridge, divergence_bound
    )
    if not converged:
        raise NotConvergedError(
            f"MLE did not converge in {max_iter} iterations (gradient max-norm {gnorm:.3e})"
        )
    return AbilityEstimate(
        mu=mu,
        constraint_index=constraint_index,
        loglik=_loglik_sn(mu, s, n),
        converged=True,
        iterations=iters,
        gradient_norm=gnorm,
    )
