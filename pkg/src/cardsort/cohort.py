"""Tercile subgroups on a covariate and random-split baselines."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .errors import DegenerateSplitWarning, EmptyInput, MissingCovariate, SubgroupTooLarge
from .model import StudyData
from .similarity import compute_similarity
from .stats import TestResult, mantel, mantel_r

__all__ = [
    "CohortSplit",
    "PermutationBaseline",
    "split_terciles",
    "subgroup_correlation",
    "permutation_baseline",
    "cohort_report",
]


@dataclass(frozen=True)
class CohortSplit:
    covariate_name: str
    low: StudyData
    high: StudyData
    cut_low: float
    cut_high: float
    degenerate: bool = False


@dataclass(frozen=True)
class PermutationBaseline:
    n_permutations: int
    values: tuple[float, ...]
    mean: float
    sd: float


def split_terciles(data: StudyData, covariate: str) -> CohortSplit:
    """Lowest and highest ``floor(N/3)`` records by ``covariate``.

    Records are ordered by (covariate value, participant id), so ties at a
    boundary are resolved by participant id.  When a boundary cuts through a
    run of tied values the split is flagged ``degenerate`` and a
    :class:`DegenerateSplitWarning` is issued.
    """
    for i, rec in enumerate(data.records):
        if covariate not in rec.covariates:
            raise MissingCovariate(f"record {i} ({rec.participant_id}) lacks {covariate!r}")
    ordered = sorted(data.records, key=lambda r: (r.covariates[covariate], r.participant_id))
    size = len(ordered) // 3
    low = ordered[:size]
    high = ordered[len(ordered) - size:] if size else []
    middle = ordered[size:len(ordered) - size]
    values = [r.covariates[covariate] for r in ordered]
    cut_low = values[size - 1] if size else float("nan")
    cut_high = values[len(values) - size] if size else float("nan")

    degenerate = False
    if size:
        mid_vals = {r.covariates[covariate] for r in middle}
        degenerate = cut_low in mid_vals or cut_high in mid_vals or cut_low == cut_high
    if degenerate:
        warnings.warn(f"tercile split on {covariate!r} cuts through tied values; "
                      "boundary records were assigned by participant id", DegenerateSplitWarning,
                      stacklevel=2)
    return CohortSplit(covariate, data.with_records(low), data.with_records(high),
                       cut_low, cut_high, degenerate)


def subgroup_correlation(split: CohortSplit, permutations: int = 999, seed: int = 0) -> TestResult:
    """Mantel test between the low and high subgroup similarity matrices."""
    if split.low.n_records == 0 or split.high.n_records == 0:
        raise EmptyInput("both subgroups need at least one record")
    a, _ = compute_similarity(split.low)
    b, _ = compute_similarity(split.high)
    return mantel(a, b, permutations=permutations, seed=seed)


def permutation_baseline(data: StudyData, subgroup_size: int, n_permutations: int = 20,
                         seed: int = 0, threads: int = 1) -> PermutationBaseline:
    """Mantel r between two disjoint random subgroups, repeated.

    Draw ``i`` uses the stream ``(seed, i)`` over records sorted by
    participant id, so the values do not depend on record order.
    """
    if subgroup_size < 1:
        raise ValueError("subgroup_size must be positive")
    if 2 * subgroup_size > data.n_records:
        raise SubgroupTooLarge(f"two subgroups of {subgroup_size} need more than "
                               f"{data.n_records} records")
    if n_permutations < 1:
        raise ValueError("n_permutations must be positive")
    records = sorted(data.records, key=lambda r: r.participant_id)

    def draw(i):
        pick = substream(seed, i).permutation(len(records))[:2 * subgroup_size]
        a, _ = compute_similarity(data.with_records(records[j] for j in sorted(pick[:subgroup_size])))
        b, _ = compute_similarity(data.with_records(records[j] for j in sorted(pick[subgroup_size:])))
        return mantel_r(a, b)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(draw, range(n_permutations)))
    else:
        values = [draw(i) for i in range(n_permutations)]
    arr = np.array(values)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return PermutationBaseline(n_permutations, tuple(values), float(arr.mean()), sd)


def cohort_report(data: StudyData, covariate: str, n_permutations: int = 20,
                  mantel_permutations: int = 999, seed: int = 0, threads: int = 1) -> dict:
    """Everything the ``cohort`` command prints for one covariate."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateSplitWarning)
        split = split_terciles(data, covariate)
    corr = subgroup_correlation(split, permutations=mantel_permutations, seed=seed)
    base = permutation_baseline(data, split.low.n_records, n_permutations, seed, threads)
    # undefined (null) when the baseline has no spread
    displacement = (corr.statistic - base.mean) / base.sd if base.sd > 0 else None
    return {
        "covariate": covariate,
        "n_low": split.low.n_records,
        "n_high": split.high.n_records,
        "cut_low": split.cut_low,
        "cut_high": split.cut_high,
        "degenerate_split": split.degenerate,
        "warnings": [str(w.message) for w in caught],
        "subgroup_correlation": corr.to_dict(),
        "baseline": {"n_permutations": base.n_permutations, "mean": base.mean, "sd": base.sd,
                     "values": list(base.values)},
        "displacement": displacement,
    }
