"""k-means partitions of cards, elbow selection of k, and Adjusted Mutual Information.

Cards are embedded as rows of the dissimilarity matrix (each card is the
vector of its distances to every card) and clustered with Lloyd's algorithm
from farthest-point seeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from ._rng import substream
from .errors import DomainMismatch, InvalidK, InvalidRange

__all__ = ["Clustering", "kmeans", "inertia_curve", "elbow_from_curve", "elbow_k", "ami"]


@dataclass(frozen=True, eq=False)
class Clustering:
    assignment: Mapping[str, int]
    k: int
    inertia: float

    def labels(self, card_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.assignment[c] for c in card_ids], dtype=np.intp)

    def groups(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for cid, lab in self.assignment.items():
            out[lab].append(cid)
        return out


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.maximum(d, 0.0)


def _seed_centers(x: np.ndarray, k: int, first: int) -> list[int]:
    chosen = [first]
    nearest = _sq_dists(x, x[[first]])[:, 0]
    for _ in range(1, k):
        cand = nearest.copy()
        cand[chosen] = -1.0
        nxt = int(np.argmax(cand))  # lowest index on ties
        chosen.append(nxt)
        nearest = np.minimum(nearest, _sq_dists(x, x[[nxt]])[:, 0])
    return chosen


def _lloyd(x: np.ndarray, k: int, first: int, max_iter: int = 300):
    m = x.shape[0]
    centers = x[_seed_centers(x, k, first)].copy()
    labels = np.full(m, -1, dtype=np.intp)
    for _ in range(max_iter):
        d = _sq_dists(x, centers)
        best = d.argmin(axis=1)
        if labels[0] >= 0:
            # keep the current cluster on exact ties so relocations stick
            cur = d[np.arange(m), labels]
            best = np.where(cur <= d[np.arange(m), best], labels, best)
        new = best
        counts = np.bincount(new, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            own = d[np.arange(m), new]
            movable = counts[new] > 1
            donor = int(np.argmax(np.where(movable, own, -1.0)))
            counts[new[donor]] -= 1
            new[donor] = empty
            counts[empty] = 1
        if np.array_equal(new, labels):
            break
        labels = new.copy()
        centers = np.array([x[labels == j].mean(axis=0) for j in range(k)])
    inertia = float(sum(((x[labels == j] - centers[j]) ** 2).sum() for j in range(k)))
    return labels, inertia


def _canonical(labels: np.ndarray) -> np.ndarray:
    """Renumber clusters in order of first appearance."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        out[i] = mapping.setdefault(int(lab), len(mapping))
    return out


def kmeans(features, k: int, seed: int = 0, restarts: int = 10, card_ids=None) -> Clustering:
    """Best-of-``restarts`` k-means clustering of the rows of ``features``.

    Restart ``i`` picks its first centre with the stream ``(seed, i)`` and
    the remaining centres by greedy farthest-point seeding.  The restart with
    the lowest inertia wins; ties go to the earliest restart.

    Parameters
    ----------
    features : array_like, shape (M, d)
        One row per card, typically the rows of the dissimilarity matrix.
    k : int
        Number of clusters, ``1 <= k <= M``.
    card_ids : sequence of str, optional
        Names for the rows; defaults to ``'0'..'M-1'``.
    """
    x = np.asarray(features, dtype=float)
    m = x.shape[0]
    if not 1 <= k <= m:
        raise InvalidK(f"k must lie in [1, {m}], got {k}")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    ids = list(card_ids) if card_ids is not None else [str(i) for i in range(m)]
    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        first = int(substream(seed, r).integers(m))
        labels, inertia = _lloyd(x, k, first)
        if inertia < best_inertia - 1e-12 * max(1.0, abs(best_inertia)) or best_labels is None:
            best_labels, best_inertia = labels, inertia
    labels = _canonical(best_labels)
    return Clustering(dict(zip(ids, map(int, labels))), k, max(best_inertia, 0.0))


def inertia_curve(features, k_values: Sequence[int], seed: int = 0, restarts: int = 10) -> np.ndarray:
    return np.array([kmeans(features, k, seed, restarts).inertia for k in k_values])


def elbow_from_curve(k_values: Sequence[int], inertias: Sequence[float]) -> int:
    """k at the largest deviation of the inertia curve from its endpoint chord.

    The perpendicular distance to the chord is proportional to the vertical
    deviation, so the latter is compared.  Ties go to the smaller k.
    """
    ks = np.asarray(k_values, dtype=float)
    y = np.asarray(inertias, dtype=float)
    if ks.size == 0:
        raise InvalidRange("empty k range")
    if ks.size <= 2:
        return int(ks[0])
    chord = y[0] + (y[-1] - y[0]) * (ks - ks[0]) / (ks[-1] - ks[0])
    dev = np.abs(chord - y)
    tol = 1e-9 * max(1.0, float(np.abs(y).max()))
    best = int(np.flatnonzero(dev >= dev.max() - tol)[0])
    return int(ks[best])


def elbow_k(features, k_range: tuple[int, int], seed: int = 0, restarts: int = 10) -> int:
    """Choose k over the inclusive ``k_range`` with the maximum-deviation elbow."""
    m = np.asarray(features).shape[0]
    lo, hi = k_range
    if not (1 <= lo <= hi <= m):
        raise InvalidRange(f"k range {k_range} must lie within [1, {m}]")
    ks = list(range(lo, hi + 1))
    return elbow_from_curve(ks, inertia_curve(features, ks, seed, restarts))


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def _expected_mi(a: np.ndarray, b: np.ndarray, n: int) -> float:
    """E[MI] under the hypergeometric (fixed marginals) permutation model."""
    emi = 0.0
    lg_n = gammaln(n + 1)
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=float)
            term = nij / n * np.log(n * nij / (ai * bj))
            logp = (gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                    - lg_n - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                    - gammaln(n - ai - bj + nij + 1))
            emi += float((term * np.exp(logp)).sum())
    return emi


def ami(a: Clustering, b: Clustering) -> float:
    """Adjusted Mutual Information with arithmetic-mean normalisation.

    ``(MI - E[MI]) / (mean(H(a), H(b)) - E[MI])`` with E[MI] summed exactly
    over the hypergeometric distribution of every contingency cell.  Two
    partitions that both put everything in one cluster score 1.
    """
    if set(a.assignment) != set(b.assignment):
        raise DomainMismatch("clusterings cover different card sets")
    ids = sorted(a.assignment)
    la = np.array([a.assignment[c] for c in ids])
    lb = np.array([b.assignment[c] for c in ids])
    n = len(ids)
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1)
    if table.shape[0] == table.shape[1] == 1:
        return 1.0
    row, col = table.sum(axis=1), table.sum(axis=0)
    nz = table > 0
    mi = float((table[nz] / n * np.log(n * table[nz] / np.outer(row, col)[nz])).sum())
    emi = _expected_mi(row, col, n)
    h_mean = (_entropy(row) + _entropy(col)) / 2
    denom = h_mean - emi
    if abs(denom) < 1e-15:
        return 1.0 if abs(mi - emi) < 1e-15 else 0.0
    return float((mi - emi) / denom)
