"""Nonparametric tests: Mann-Whitney U, chi-squared, Kruskal-Wallis, Spearman, Mantel."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from ._rng import substream
from .errors import (ConstantInput, DegenerateTable, DimensionMismatch, EmptyGroup,
                     EmptyInput, TooFewPairs, TooLarge)
from .similarity import SimilarityMatrix

__all__ = [
    "TestResult",
    "mann_whitney",
    "mann_whitney_exact",
    "chi_squared",
    "kruskal_wallis",
    "spearman",
    "mantel",
    "mantel_r",
]

ALTERNATIVES = ("two_sided", "less", "greater")


@dataclass(frozen=True)
class TestResult:
    statistic_name: str
    statistic: float
    p: float
    n: int
    z: Optional[float] = None
    df: Optional[int] = None
    effect_size_r: Optional[float] = None

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self) -> dict:
        return asdict(self)


def _clip_p(p: float) -> float:
    return float(min(1.0, max(0.0, p)))


def _check_samples(xs, ys):
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise EmptyInput("both samples must be non-empty")
    return x, y


def _tie_term(ranks_input: np.ndarray) -> float:
    _, counts = np.unique(ranks_input, return_counts=True)
    return float(np.sum(counts ** 3 - counts))


def mann_whitney(xs: Sequence[float], ys: Sequence[float],
                 alternative: str = "two_sided") -> TestResult:
    """Mann-Whitney U test with the normal approximation.

    Midranks handle ties, the variance carries the tie correction and a
    continuity correction of 0.5 is applied.  The reported statistic is
    ``min(U1, U2)``; the sign of ``z`` follows ``U1 - n1*n2/2`` where ``U1``
    belongs to ``xs`` (negative when ``xs`` tends to be smaller).

    ``alternative='less'`` tests whether ``xs`` is stochastically smaller
    than ``ys``.  The effect size is ``|z| / sqrt(n1 + n2)``.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    x, y = _check_samples(xs, ys)
    n1, n2 = x.size, y.size
    n = n1 + n2
    pooled = np.concatenate([x, y])
    ranks = sps.rankdata(pooled)
    u1 = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)
    u2 = n1 * n2 - u1
    mu = n1 * n2 / 2
    var = n1 * n2 / 12 * ((n + 1) - _tie_term(pooled) / (n * (n - 1))) if n > 1 else 0.0
    sigma = math.sqrt(max(var, 0.0))

    if sigma == 0:
        z, p = 0.0, 1.0
    elif alternative == "two_sided":
        dev = max(abs(u1 - mu) - 0.5, 0.0)
        z = math.copysign(dev / sigma, u1 - mu) if dev else 0.0
        p = 2 * sps.norm.sf(abs(z))
    elif alternative == "less":
        z = (u1 - mu + 0.5) / sigma
        p = sps.norm.cdf(z)
    else:
        z = (u1 - mu - 0.5) / sigma
        p = sps.norm.sf(z)
    return TestResult("U", min(u1, u2), _clip_p(p), n, z=float(z),
                      effect_size_r=min(1.0, abs(z) / math.sqrt(n)))


def mann_whitney_exact(xs: Sequence[float], ys: Sequence[float],
                       alternative: str = "two_sided") -> TestResult:
    """Mann-Whitney U with the exact permutation p-value.

    All ``C(n1+n2, n1)`` assignments of the pooled midranks to the first
    sample are enumerated, so ties are handled exactly.  Limited to
    ``n1 + n2 <= 20``.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    x, y = _check_samples(xs, ys)
    n1, n2 = x.size, y.size
    n = n1 + n2
    if n > 20:
        raise TooLarge(f"exact enumeration is limited to 20 observations, got {n}")
    ranks = sps.rankdata(np.concatenate([x, y]))
    offset = n1 * (n1 + 1) / 2
    u1 = float(ranks[:n1].sum() - offset)
    combos = np.array(list(combinations(range(n), n1)), dtype=np.intp)
    null_u = ranks[combos].sum(axis=1) - offset
    mu = n1 * n2 / 2
    eps = 1e-9
    if alternative == "two_sided":
        p = np.mean(np.abs(null_u - mu) >= abs(u1 - mu) - eps)
    elif alternative == "less":
        p = np.mean(null_u <= u1 + eps)
    else:
        p = np.mean(null_u >= u1 - eps)
    return TestResult("U", min(u1, n1 * n2 - u1), _clip_p(p), n)


def chi_squared(table) -> TestResult:
    """Pearson chi-squared test of independence, no continuity correction."""
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[0] < 2 or t.shape[1] < 2:
        raise DegenerateTable("table must be at least 2x2")
    if np.any(t < 0) or np.any(t != np.round(t)):
        raise DegenerateTable("table entries must be non-negative integers")
    rows, cols = t.sum(axis=1), t.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise DegenerateTable("every row and column needs a positive total")
    total = t.sum()
    expected = np.outer(rows, cols) / total
    stat = float(np.sum((t - expected) ** 2 / expected))
    df = (t.shape[0] - 1) * (t.shape[1] - 1)
    return TestResult("chi2", stat, _clip_p(sps.chi2.sf(stat, df)), int(total), df=df)


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Kruskal-Wallis H test with tie correction and chi-squared p-value.

    When every observation is tied, H is defined as 0 (p = 1).
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2:
        raise EmptyGroup("need at least two groups")
    if any(a.size == 0 for a in arrays):
        raise EmptyGroup("every group must be non-empty")
    pooled = np.concatenate(arrays)
    n = pooled.size
    df = len(arrays) - 1
    correction = 1.0 - _tie_term(pooled) / (n ** 3 - n) if n > 1 else 0.0
    if correction <= 0:
        return TestResult("H", 0.0, 1.0, n, df=df)
    ranks = sps.rankdata(pooled)
    h, start = 0.0, 0
    for a in arrays:
        r = ranks[start:start + a.size]
        h += r.sum() ** 2 / a.size
        start += a.size
    h = (12.0 / (n * (n + 1)) * h - 3 * (n + 1)) / correction
    h = max(h, 0.0)
    return TestResult("H", float(h), _clip_p(sps.chi2.sf(h, df)), n, df=df)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    ac = a - a.mean()
    bc = b - b.mean()
    denom = math.sqrt(float(ac @ ac) * float(bc @ bc))
    return float(np.clip((ac @ bc) / denom, -1.0, 1.0))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho as the Pearson correlation of midranks."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D sequences of equal length")
    if x.size < 3:
        raise ValueError("spearman needs at least 3 observations")
    if np.unique(x).size < 2 or np.unique(y).size < 2:
        raise ConstantInput("spearman is undefined for constant input")
    return _pearson(sps.rankdata(x), sps.rankdata(y))


def _as_values(m):
    if isinstance(m, SimilarityMatrix):
        return m.card_ids, np.asarray(m.values, dtype=float)
    arr = np.asarray(m, dtype=float)
    return None, arr


def _check_pair(a, b):
    ids_a, va = _as_values(a)
    ids_b, vb = _as_values(b)
    if va.ndim != 2 or va.shape[0] != va.shape[1] or va.shape != vb.shape:
        raise DimensionMismatch(f"matrices must be square and equal-sized: {va.shape} vs {vb.shape}")
    if ids_a is not None and ids_b is not None and tuple(ids_a) != tuple(ids_b):
        raise DimensionMismatch("matrices list different cards or a different card order")
    return va, vb


def mantel_r(a, b) -> float:
    """Spearman correlation over upper-triangle pairs defined in both matrices."""
    va, vb = _check_pair(a, b)
    iu = np.triu_indices(va.shape[0], k=1)
    x, y = va[iu], vb[iu]
    keep = ~(np.isnan(x) | np.isnan(y))
    if keep.sum() < 3:
        raise TooFewPairs(f"only {int(keep.sum())} pairs are defined in both matrices")
    return spearman(x[keep], y[keep])


def mantel(a, b, permutations: int = 9999, seed: int = 0) -> TestResult:
    """Mantel test between two similarity matrices using Spearman correlation.

    Pairs undefined (NaN) in either matrix are dropped.  Significance comes
    from permuting rows and columns of ``b`` together; the one-sided p-value
    is ``(1 + #{r_perm >= r_obs}) / (1 + permutations)``.  Permutation ``i``
    draws from its own stream keyed by ``(seed, i)``.

    Parameters
    ----------
    a, b : SimilarityMatrix or array_like
        Square matrices over the same cards in the same order.
    permutations : int
        Number of label permutations, at least 1.
    seed : int
        Non-negative base seed.

    Returns
    -------
    TestResult
        ``statistic_name='mantel_r'``; ``n`` is the number of pairs used.
    """
    if permutations < 1:
        raise ValueError("permutations must be positive")
    va, vb = _check_pair(a, b)
    m = va.shape[0]
    iu0, iu1 = np.triu_indices(m, k=1)
    x, y = va[iu0, iu1], vb[iu0, iu1]
    keep = ~(np.isnan(x) | np.isnan(y))
    if keep.sum() < 3:
        raise TooFewPairs(f"only {int(keep.sum())} pairs are defined in both matrices")
    r_obs = spearman(x[keep], y[keep])
    perms = np.array([substream(seed, i).permutation(m) for i in range(permutations)])

    if keep.all():
        # ranks of the permuted b are the permuted ranks of b
        rx = sps.rankdata(x)
        rx -= rx.mean()
        ry = sps.rankdata(y)
        rank_b = np.zeros((m, m))
        rank_b[iu0, iu1] = ry
        rank_b[iu1, iu0] = ry
        mean_y = ry.mean()
        denom = math.sqrt(float(rx @ rx) * float(((ry - mean_y) ** 2).sum()))
        r_perm = np.empty(permutations)
        for start in range(0, permutations, 512):
            block = perms[start:start + 512]
            yp = rank_b[block[:, iu0], block[:, iu1]] - mean_y
            r_perm[start:start + 512] = yp @ rx / denom
    else:
        r_perm = np.full(permutations, np.nan)
        for i, perm in enumerate(perms):
            yp = vb[perm[iu0], perm[iu1]]
            k = ~(np.isnan(x) | np.isnan(yp))
            if k.sum() < 3:
                continue
            xs_, ys_ = x[k], yp[k]
            if np.unique(xs_).size < 2 or np.unique(ys_).size < 2:
                continue
            r_perm[i] = spearman(xs_, ys_)

    exceed = int(np.sum(r_perm >= r_obs - 1e-12))
    p = (1 + exceed) / (1 + permutations)
    return TestResult("mantel_r", r_obs, _clip_p(p), int(keep.sum()))
