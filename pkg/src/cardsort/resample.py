"""Structural agreement as a function of sample size.

For each sample size n, participants are subsampled without replacement and
the similarity matrix (or k-means clustering) of the subsample is compared
with a reference: the whole condition itself (*within*) or another
condition's complete sample (*between*).  Iterations stop once the running
mean moves by less than ``stop_delta``.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ._rng import substream
from .cluster import Clustering, ami, elbow_k, kmeans
from .errors import ConstantInput, DimensionMismatch, NTooLarge, TooFewPairs
from .model import StudyData
from .similarity import SimilarityMatrix, compute_similarity, to_dissimilarity
from .stats import mantel_r

__all__ = [
    "CurvePoint",
    "BootstrapCurve",
    "bootstrap_within",
    "bootstrap_between",
    "threshold_n",
    "write_curves_csv",
    "read_curves_csv",
]

METRICS = ("mantel_r", "ami")


@dataclass(frozen=True)
class CurvePoint:
    n: int
    mean: float
    sd: float
    iterations_used: int


@dataclass(frozen=True)
class BootstrapCurve:
    metric: str
    mode: str
    points: tuple[CurvePoint, ...]

    @property
    def ns(self) -> np.ndarray:
        return np.array([p.n for p in self.points])

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.points])

    def as_pairs(self) -> list[tuple[int, float]]:
        return [(p.n, p.mean) for p in self.points]


def threshold_n(curve: BootstrapCurve, target: float) -> Optional[int]:
    """Smallest n whose mean reaches ``target``; None when no point does."""
    for p in curve.points:
        if np.isfinite(p.mean) and p.mean >= target:
            return p.n
    return None


class _Reference:
    def __init__(self, sim: SimilarityMatrix, metrics, impute, k_range, restarts, seed):
        self.sim = sim
        self.clustering: Optional[Clustering] = None
        if "ami" in metrics:
            self.clustering = _cluster(sim, impute, k_range, restarts, seed)


def _k_range(m: int, k_range):
    if k_range is None:
        return (1, min(m, 10))
    return (max(1, k_range[0]), min(m, k_range[1]))


def _cluster(sim: SimilarityMatrix, impute, k_range, restarts, seed) -> Clustering:
    feats = to_dissimilarity(sim, impute)
    k = elbow_k(feats, _k_range(sim.size, k_range), seed=seed, restarts=restarts)
    return kmeans(feats, k, seed=seed, restarts=restarts, card_ids=sim.card_ids)


def _metric_value(metric, data, idx, ref, impute, k_range, restarts, kseed) -> float:
    sub = data.with_records(data.records[i] for i in idx)
    sim, _ = compute_similarity(sub)
    if metric == "mantel_r":
        try:
            return mantel_r(sim, ref.sim)
        except (TooFewPairs, ConstantInput):
            return float("nan")
    return ami(_cluster(sim, impute, k_range, restarts, kseed), ref.clustering)


def _draw(data: StudyData, n: int, it: int, seed: int):
    rng = substream(seed, n, it)
    idx = np.sort(rng.choice(data.n_records, size=n, replace=False))
    kseed = int(rng.integers(2 ** 31))
    return idx, kseed


def _run_point(metric, data, n, ref, max_iterations, stop_delta, seed, impute, k_range,
               restarts, pool) -> CurvePoint:
    def one(it):
        idx, kseed = _draw(data, n, it, seed)
        return _metric_value(metric, data, idx, ref, impute, k_range, restarts, kseed)

    if pool is not None:
        precomputed = list(pool.map(one, range(max_iterations)))
    values: list[float] = []
    prev_mean = None
    for it in range(max_iterations):
        v = precomputed[it] if pool is not None else one(it)
        values.append(v)
        finite = [x for x in values if np.isfinite(x)]
        mean = float(np.mean(finite)) if finite else float("nan")
        if (np.isfinite(v) and prev_mean is not None and len(finite) >= 2
                and abs(mean - prev_mean) < stop_delta):
            break
        if finite:
            prev_mean = mean
    finite = np.array([x for x in values if np.isfinite(x)])
    mean = float(finite.mean()) if finite.size else float("nan")
    sd = float(finite.std(ddof=1)) if finite.size > 1 else 0.0
    return CurvePoint(int(n), mean, sd, len(values))


def _bootstrap(data: StudyData, ref_sim: SimilarityMatrix, mode: str, n_values, max_iterations,
               stop_delta, seed, metrics, impute, k_range, restarts, threads):
    unknown = set(metrics) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}")
    if max_iterations < 1:
        raise ValueError("max_iterations must be positive")
    n_total = data.n_records
    ns = sorted(set(int(n) for n in (n_values if n_values is not None else range(2, n_total + 1))))
    if ns and ns[-1] > n_total:
        raise NTooLarge(f"n={ns[-1]} exceeds the {n_total} available records")
    if ns and ns[0] < 1:
        raise ValueError("sample sizes must be positive")
    ref = _Reference(ref_sim, metrics, impute, k_range, restarts, seed)
    pool = ThreadPoolExecutor(max_workers=threads) if threads and threads > 1 else None
    try:
        curves = {}
        for metric in metrics:
            points = tuple(_run_point(metric, data, n, ref, max_iterations, stop_delta, seed,
                                      impute, k_range, restarts, pool) for n in ns)
            curves[metric] = BootstrapCurve(metric, mode, points)
    finally:
        if pool is not None:
            pool.shutdown()
    return curves


def bootstrap_within(data: StudyData, n_values: Optional[Iterable[int]] = None,
                     max_iterations: int = 20, stop_delta: float = 0.001, seed: int = 0,
                     metrics: Sequence[str] = METRICS, impute: float = 0.0, k_range=None,
                     restarts: int = 10, threads: int = 1) -> dict[str, BootstrapCurve]:
    """Compare subsamples of a condition with the condition's complete sample.

    Parameters
    ----------
    data : StudyData
    n_values : iterable of int, optional
        Sample sizes; every integer from 2 to N by default.
    max_iterations : int
        Upper bound on subsamples per sample size.
    stop_delta : float
        Stop once adding a subsample moves the running mean by less than this.
    seed : int
        Subsample ``it`` at size ``n`` uses the stream ``(seed, n, it)``.
    metrics : sequence of {'mantel_r', 'ami'}
        ``mantel_r`` correlates similarity matrices (undefined pairs dropped);
        ``ami`` compares k-means clusterings whose k is picked by the elbow
        rule separately for every subsample.
    impute : float
        Similarity assumed for never co-shown pairs before clustering.
    threads : int
        Worker threads; results do not depend on it.

    Returns
    -------
    dict
        One :class:`BootstrapCurve` per requested metric.
    """
    ref_sim, _ = compute_similarity(data)
    return _bootstrap(data, ref_sim, "within", n_values, max_iterations, stop_delta, seed,
                      tuple(metrics), impute, k_range, restarts, threads)


def bootstrap_between(subset_data: StudyData, reference: SimilarityMatrix,
                      n_values: Optional[Iterable[int]] = None, max_iterations: int = 20,
                      stop_delta: float = 0.001, seed: int = 0,
                      metrics: Sequence[str] = METRICS, impute: float = 0.0, k_range=None,
                      restarts: int = 10, threads: int = 1) -> dict[str, BootstrapCurve]:
    """Like :func:`bootstrap_within` but against a fixed external reference matrix."""
    ids = tuple(subset_data.card_ids)
    if tuple(reference.card_ids) != ids:
        if set(reference.card_ids) != set(ids):
            raise DimensionMismatch("reference matrix covers a different card set")
        reference = reference.reorder(ids)
    return _bootstrap(subset_data, reference, "between", n_values, max_iterations, stop_delta,
                      seed, tuple(metrics), impute, k_range, restarts, threads)


def write_curves_csv(curves: Iterable[BootstrapCurve], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "n", "mean", "sd", "iterations_used"])
        for curve in curves:
            for p in curve.points:
                w.writerow([curve.metric, p.n, repr(p.mean), repr(p.sd), p.iterations_used])


def read_curves_csv(path, mode: str = "within") -> dict[str, BootstrapCurve]:
    points: dict[str, list[CurvePoint]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            points.setdefault(row["metric"], []).append(
                CurvePoint(int(row["n"]), float(row["mean"]), float(row["sd"]),
                           int(row["iterations_used"])))
    return {m: BootstrapCurve(m, mode, tuple(sorted(p, key=lambda q: q.n)))
            for m, p in points.items()}
