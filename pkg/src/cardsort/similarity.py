"""Exposure-normalised card similarity matrices.

With randomised card subsets a pair of cards is only comparable for the
participants who saw both cards, so the co-categorisation count of a pair is
divided by its co-exposure count rather than by the number of participants.
Pairs that nobody saw together get an explicit undefined marker (NaN).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .model import StudyData

__all__ = [
    "SimilarityMatrix",
    "ExposureMatrix",
    "compute_similarity",
    "to_dissimilarity",
    "write_similarity_csv",
    "read_similarity_csv",
    "write_heatmap_svg",
]


@dataclass(frozen=True, eq=False)
class ExposureMatrix:
    """``counts[i, j]`` is the number of participants shown both card i and card j."""

    card_ids: tuple[str, ...]
    counts: np.ndarray

    @property
    def size(self) -> int:
        return len(self.card_ids)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Pairwise co-categorisation ratios.

    ``values`` is a symmetric float array with a diagonal of 1 and NaN where
    the pair was never shown together.
    """

    card_ids: tuple[str, ...]
    values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.card_ids)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def upper_triangle(self) -> np.ndarray:
        iu = np.triu_indices(self.size, k=1)
        return self.values[iu]

    def reorder(self, card_ids) -> "SimilarityMatrix":
        """Return the matrix with rows and columns in ``card_ids`` order."""
        index = {c: i for i, c in enumerate(self.card_ids)}
        order = np.array([index[c] for c in card_ids], dtype=np.intp)
        return SimilarityMatrix(tuple(card_ids), self.values[np.ix_(order, order)])


def _indicator(ids, index, m):
    v = np.zeros(m, dtype=np.int64)
    for cid in ids:
        v[index[cid]] = 1
    return v


def compute_similarity(data: StudyData) -> tuple[SimilarityMatrix, ExposureMatrix]:
    """Similarity and exposure matrices of a study.

    For every card pair the similarity is the number of participants who put
    both cards in the same category divided by the number of participants who
    were shown both cards.  Unsorted but shown cards count towards exposure
    only.

    Returns
    -------
    similarity : SimilarityMatrix
        NaN where the exposure is zero, 1 on the diagonal.
    exposure : ExposureMatrix
        Integer co-exposure counts with a zero diagonal.
    """
    m = data.n_cards
    index = data.card_index()
    paired = np.zeros((m, m), dtype=np.int64)
    exposed = np.zeros((m, m), dtype=np.int64)
    for rec in data.records:
        s = _indicator(rec.shown, index, m)
        exposed += np.outer(s, s)
        for cat in rec.categories:
            c = _indicator(cat.cards, index, m)
            paired += np.outer(c, c)
    np.fill_diagonal(paired, 0)
    np.fill_diagonal(exposed, 0)

    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(exposed > 0, paired / np.maximum(exposed, 1), np.nan)
    np.fill_diagonal(values, 1.0)
    ids = tuple(data.card_ids)
    return SimilarityMatrix(ids, values), ExposureMatrix(ids, exposed)


def to_dissimilarity(sim: SimilarityMatrix, impute: float = 0.0) -> np.ndarray:
    """Dense ``1 - S`` with undefined pairs treated as similarity ``impute``."""
    if not 0.0 <= impute <= 1.0:
        raise ValueError("impute must lie in [0, 1]")
    d = 1.0 - np.where(np.isnan(sim.values), impute, sim.values)
    np.fill_diagonal(d, 0.0)
    return d


def _fmt(x) -> str:
    return "" if np.isnan(x) else repr(float(x))


def write_similarity_csv(sim: SimilarityMatrix, path, exposure: ExposureMatrix | None = None,
                         exposure_path=None) -> None:
    """Write the matrix with card-id header row/column; undefined cells are empty.

    When ``exposure`` is given it goes to ``exposure_path`` (default
    ``<stem>.exposure.csv`` next to ``path``).
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + list(sim.card_ids))
        for cid, row in zip(sim.card_ids, sim.values):
            w.writerow([cid] + [_fmt(x) for x in row])
    if exposure is not None:
        exposure_path = Path(exposure_path) if exposure_path else path.with_name(
            f"{path.stem}.exposure.csv")
        with open(exposure_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + list(exposure.card_ids))
            for cid, row in zip(exposure.card_ids, exposure.counts):
                w.writerow([cid] + [str(int(x)) for x in row])


def read_similarity_csv(path) -> SimilarityMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    ids = tuple(rows[0][1:])
    values = np.array([[float(x) if x != "" else np.nan for x in r[1:]] for r in rows[1:]])
    return SimilarityMatrix(ids, values)


def write_heatmap_svg(sim: SimilarityMatrix, path, cell: int = 12, labels=None) -> None:
    """Grayscale grid (black = 1, white = 0); undefined cells are hatched."""
    m = sim.size
    labels = list(labels) if labels is not None else list(sim.card_ids)
    margin = 8 + 6 * max((len(s) for s in labels), default=0)
    width = margin + m * cell + 4
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{width}" '
        f'font-family="sans-serif" font-size="{max(cell - 3, 6)}">',
        '<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse">'
        '<rect width="4" height="4" fill="white"/>'
        '<path d="M0,4 L4,0" stroke="#c00" stroke-width="0.8"/></pattern></defs>',
    ]
    for i in range(m):
        y = margin + i * cell
        parts.append(f'<text x="{margin - 3}" y="{y + cell - 3}" text-anchor="end">'
                     f'{escape(labels[i])}</text>')
        parts.append(f'<text transform="translate({margin + i * cell + cell - 3},{margin - 3}) '
                     f'rotate(-90)">{escape(labels[i])}</text>')
        for j in range(m):
            v = sim.values[i, j]
            if np.isnan(v):
                fill = "url(#hatch)"
            else:
                g = int(round(255 * (1.0 - float(v))))
                fill = f"rgb({g},{g},{g})"
            parts.append(f'<rect x="{margin + j * cell}" y="{y}" width="{cell}" '
                         f'height="{cell}" fill="{fill}"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
