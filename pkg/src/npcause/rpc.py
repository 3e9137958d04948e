"""Rank-based PC structure learning.

Kendall or Spearman correlations are mapped to the latent Pearson scale,
conditional independence is tested with Fisher's z on partial correlations,
and the resulting skeleton is oriented (colliders from separating sets, then
Meek closure).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .dataset import DataMatrix, TrimmedData
from .graph import Cpdag, meek_close
from .normal import std_quantile


class CorrelationError(ValueError):
    pass


class SingularSubmatrixError(np.linalg.LinAlgError):
    """Conditioning submatrix is numerically singular (near-collinearity)."""


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric unit-diagonal correlation matrix with its provenance."""

    values: np.ndarray
    source: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def p(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CiTestConfig:
    alpha_ci: float = 0.01
    max_order: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha_ci < 1.0:
            raise ValueError(f"significance level must be in (0, 1), got {self.alpha_ci}")


# -- Kendall's tau ------------------------------------------------------------


def _count_inversions(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Sorted copy of ``a`` and the number of strict inversions, by
    divide-and-conquer merge counting."""
    n = len(a)
    if n < 2:
        return a, 0
    mid = n // 2
    left, c_left = _count_inversions(a[:mid])
    right, c_right = _count_inversions(a[mid:])
    # pairs (i in left, j in right) with left[i] > right[j]
    cross = int((len(left) - np.searchsorted(left, right, side="right")).sum())
    merged = np.concatenate([left, right])
    merged.sort(kind="mergesort")
    return merged, c_left + c_right + cross


def _tie_count(sorted_arr) -> int:
    """Sum of t*(t-1)/2 over groups of equal consecutive values."""
    if len(sorted_arr) < 2:
        return 0
    arr = np.asarray(sorted_arr)
    if arr.ndim == 1:
        change = np.nonzero(np.diff(arr) != 0)[0]
    else:  # rows as composite keys, already lexicographically sorted
        change = np.nonzero(np.any(np.diff(arr, axis=0) != 0, axis=1))[0]
    bounds = np.concatenate([[0], change + 1, [len(arr)]])
    runs = np.diff(bounds)
    return int((runs * (runs - 1) // 2).sum())


def kendall_tau(x, y) -> float:
    """Tau-b by merge-sort inversion counting, O(n log n).

    Agrees exactly with the concordant/discordant-pair definition.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise CorrelationError("inputs must be 1-d arrays of equal length")
    n = len(x)
    if n < 2:
        raise CorrelationError("need at least 2 observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise CorrelationError("zero-variance input")

    perm = np.lexsort((y, x))
    xs, ys = x[perm], y[perm]
    n0 = n * (n - 1) // 2
    ties_x = _tie_count(xs)
    ties_xy = _tie_count(np.column_stack([xs, ys]))
    ties_y = _tie_count(np.sort(y))
    _, discordant = _count_inversions(ys)
    con_minus_dis = n0 - ties_x - ties_y + ties_xy - 2 * discordant
    return con_minus_dis / np.sqrt(float(n0 - ties_x) * float(n0 - ties_y))


def tau_to_pearson(tau: float) -> float:
    """Latent Pearson correlation sin(pi * tau / 2) for a Gaussian copula."""
    if abs(tau) > 1.0:
        raise CorrelationError(f"tau must lie in [-1, 1], got {tau}")
    return float(np.sin(0.5 * np.pi * tau))


def _spearman_rho(x, y) -> float:
    rx = rankdata(x)
    ry = rankdata(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = np.sqrt((rx * rx).sum() * (ry * ry).sum())
    if denom == 0:
        raise CorrelationError("zero-variance input")
    return float((rx * ry).sum() / denom)


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, TrimmedData):
        return data.values
    if isinstance(data, DataMatrix):
        return data.values
    return np.asarray(data, dtype=float)


def rank_correlation_matrix(data, source: str = "kendall") -> CorrelationMatrix:
    """Pairwise correlations mapped to the latent Pearson scale.

    ``source`` is one of "kendall" (sin(pi*tau/2)), "spearman"
    (2*sin(pi*rho/6)), or "pearson" (sample correlation as-is). The result is
    nudged toward the identity if its smallest eigenvalue falls below 1e-8,
    since the entrywise sine transform need not stay positive semidefinite.
    """
    values = _as_matrix(data)
    n, p = values.shape
    if n < 10:
        raise CorrelationError(f"need at least 10 rows, got {n}")
    for j in range(p):
        if np.ptp(values[:, j]) == 0:
            raise CorrelationError(f"zero-variance column {j}")

    mat = np.eye(p)
    if source == "pearson":
        mat = np.corrcoef(values, rowvar=False)
        tag = "pearson"
    elif source == "kendall":
        for i, j in itertools.combinations(range(p), 2):
            mat[i, j] = mat[j, i] = tau_to_pearson(kendall_tau(values[:, i], values[:, j]))
        tag = "kendall-sin"
    elif source == "spearman":
        for i, j in itertools.combinations(range(p), 2):
            rho = _spearman_rho(values[:, i], values[:, j])
            mat[i, j] = mat[j, i] = 2.0 * np.sin(np.pi * rho / 6.0)
        tag = "spearman-sin"
    else:
        raise CorrelationError(f"unknown correlation source {source!r}")

    floor = 1e-8
    eigmin = float(np.linalg.eigvalsh(mat).min())
    if eigmin < floor:
        lam = (floor - eigmin) / (1.0 - eigmin)
        mat = lam * np.eye(p) + (1.0 - lam) * mat
    return CorrelationMatrix(values=mat, source=tag)


# -- conditional independence -------------------------------------------------


def partial_correlation(c, i: int, j: int, cond) -> float:
    """Partial correlation of i and j given the conditioning set, from the
    inverse of the corresponding submatrix."""
    mat = c.values if isinstance(c, CorrelationMatrix) else np.asarray(c, dtype=float)
    cond = sorted(cond)
    if i == j or i in cond or j in cond:
        raise CorrelationError("i, j, and the conditioning set must be disjoint")
    idx = [i, j] + cond
    sub = mat[np.ix_(idx, idx)]
    if np.linalg.cond(sub) > 1e12:
        raise SingularSubmatrixError("conditioning submatrix is near-singular")
    omega = np.linalg.inv(sub)
    return float(-omega[0, 1] / np.sqrt(omega[0, 0] * omega[1, 1]))


def ci_test(c, n_eff: int, i: int, j: int, cond, cfg: CiTestConfig) -> bool:
    """Fisher-z test; True means "independent" (null not rejected).

    A singular conditioning submatrix is treated as non-rejecting, with a
    warning, matching common PC practice for near-collinear inputs.
    """
    cond = sorted(cond)
    dof = n_eff - len(cond) - 3
    if dof <= 0:
        raise CorrelationError(
            f"effective sample size {n_eff} too small for |S|={len(cond)}")
    try:
        r = partial_correlation(c, i, j, cond)
    except SingularSubmatrixError:
        warnings.warn(f"singular conditioning submatrix for ({i},{j}|{cond}); "
                      "treating as independent", UserWarning, stacklevel=2)
        return True
    r = min(max(r, -1.0), 1.0)
    stat = np.sqrt(dof) * np.abs(np.arctanh(r)) if abs(r) < 1.0 else np.inf
    return bool(stat <= std_quantile(1.0 - cfg.alpha_ci / 2.0))


# -- PC search ----------------------------------------------------------------


def pc_skeleton(c: CorrelationMatrix, n_eff: int, cfg: CiTestConfig):
    """Level-wise skeleton search with frozen per-level neighborhoods, so the
    outcome does not depend on the pair-processing order. Returns the
    adjacency sets and the recorded separating sets."""
    p = c.p
    adj = {i: set(range(p)) - {i} for i in range(p)}
    sepsets: dict[frozenset, frozenset] = {}
    max_order = cfg.max_order if cfg.max_order is not None else p - 2
    level = 0
    while level <= max_order:
        frozen = {i: sorted(adj[i]) for i in range(p)}
        if all(len(frozen[i]) - 1 < level for i in range(p)):
            break
        for i in range(p):
            for j in frozen[i]:
                if j not in adj[i]:
                    continue
                candidates = [k for k in frozen[i] if k != j]
                if len(candidates) < level:
                    continue
                for cond in itertools.combinations(candidates, level):
                    if ci_test(c, n_eff, i, j, cond, cfg):
                        adj[i].discard(j)
                        adj[j].discard(i)
                        sepsets[frozenset((i, j))] = frozenset(cond)
                        break
        level += 1
    return adj, sepsets


def orient_colliders(p: int, adj, sepsets) -> Cpdag:
    """Collider orientation from separating sets. When two triples demand
    opposite directions for one edge it stays undirected, with a warning."""
    demanded = set()
    for k in range(p):
        nbrs = sorted(adj[k])
        for a, b in itertools.combinations(nbrs, 2):
            if b in adj[a]:
                continue
            sep = sepsets.get(frozenset((a, b)))
            if sep is not None and k not in sep:
                demanded.add((a, k))
                demanded.add((b, k))
    conflicted = {tuple(sorted((a, b))) for a, b in demanded if (b, a) in demanded}
    if conflicted:
        warnings.warn(f"conflicting collider orientations on {sorted(conflicted)}; "
                      "leaving undirected", UserWarning, stacklevel=2)
    directed = {e for e in demanded if tuple(sorted(e)) not in conflicted}
    dir_skel = {tuple(sorted(e)) for e in directed}
    undirected = set()
    for i in range(p):
        for j in adj[i]:
            if i < j and (i, j) not in dir_skel:
                undirected.add((i, j))
    return Cpdag(p, directed, undirected)


def estimate_cpdag_from_corr(c: CorrelationMatrix, n_eff: int,
                             cfg: CiTestConfig) -> Cpdag:
    """PC on a precomputed correlation matrix (oracle entry point)."""
    adj, sepsets = pc_skeleton(c, n_eff, cfg)
    pattern = orient_colliders(c.p, adj, sepsets)
    return meek_close(pattern, on_conflict="undirect")


def estimate_cpdag(data, cfg: CiTestConfig | None = None,
                   source: str = "kendall") -> Cpdag:
    """Rank-PC pipeline on an observation matrix (trimmed or full)."""
    cfg = cfg or CiTestConfig()
    values = _as_matrix(data)
    corr = rank_correlation_matrix(values, source=source)
    return estimate_cpdag_from_corr(corr, len(values), cfg)
