"""Researcher-assigned themes over raw categories, and per-theme agreement scores."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import ParseError, UnmappedCategory, ValidationError
from .model import StudyData

__all__ = [
    "StandardizationMap",
    "ThemeSummary",
    "StandardizationResult",
    "agreement_score",
    "apply_standardization",
    "theme_frequency",
    "read_standardization_csv",
    "write_themes_csv",
]

POLICIES = ("unstandardized", "error")


@dataclass(frozen=True)
class StandardizationMap:
    """``(participant_id, raw label) -> theme``; labels are compared trimmed."""

    entries: Mapping[tuple[str, str], str]
    unmapped: str = "unstandardized"

    def __post_init__(self):
        if self.unmapped not in POLICIES:
            raise ValueError(f"unmapped policy must be one of {POLICIES}")
        clean = {}
        for (pid, label), theme in dict(self.entries).items():
            if not isinstance(theme, str) or not theme.strip():
                raise ValidationError(f"empty theme name for ({pid!r}, {label!r})")
            clean[(pid, label.strip())] = theme.strip()
        object.__setattr__(self, "entries", clean)

    def theme_for(self, participant_id: str, label: str) -> Optional[str]:
        return self.entries.get((participant_id, label.strip()))


@dataclass(frozen=True)
class ThemeSummary:
    theme: str
    m: int
    r: int
    per_card_counts: Mapping[str, int]
    agreement: float
    contributors: tuple[str, ...] = ()


@dataclass(frozen=True)
class StandardizationResult:
    themes: list[ThemeSummary]
    raw_category_count: int
    unstandardized_count: int
    unstandardized: list[tuple[str, str]] = field(default_factory=list)

    @property
    def standardization_count(self) -> int:
        return len(self.themes)

    @property
    def mean_agreement(self) -> float:
        if not self.themes:
            return float("nan")
        return float(np.mean([t.agreement for t in self.themes]))


def agreement_score(per_card_counts: Mapping[str, int], r: int) -> float:
    """``100 / (m * r) * sum(p_k)`` over the m cards placed in the theme."""
    m = len(per_card_counts)
    if m == 0 or r <= 0:
        raise ValueError("agreement needs at least one card and one respondent")
    return 100.0 * sum(per_card_counts.values()) / (m * r)


def apply_standardization(data: StudyData, mapping: StandardizationMap) -> StandardizationResult:
    """Merge raw categories into themes and score each theme.

    A participant counts once towards a theme's respondents ``r`` however
    many of their categories map to it, and once towards ``p_k`` for each
    card they placed in it.  Categories without cards are ignored.

    Raises
    ------
    UnmappedCategory
        A category has no theme and the map's policy is ``'error'``.
    """
    contributors: dict[str, set[str]] = {}
    placements: dict[str, dict[str, set[str]]] = {}
    unmapped: list[tuple[str, str]] = []
    raw = 0
    for rec in data.records:
        for cat in rec.categories:
            if not cat.cards:
                continue
            raw += 1
            theme = mapping.theme_for(rec.participant_id, cat.label)
            if theme is None:
                if mapping.unmapped == "error":
                    raise UnmappedCategory(
                        f"no theme for category {cat.label!r} of participant {rec.participant_id}")
                unmapped.append((rec.participant_id, cat.label))
                continue
            contributors.setdefault(theme, set()).add(rec.participant_id)
            cards = placements.setdefault(theme, {})
            for cid in cat.cards:
                cards.setdefault(cid, set()).add(rec.participant_id)

    order = data.card_index()
    summaries = []
    for theme in sorted(contributors):
        per_card = {cid: len(p) for cid, p in sorted(placements[theme].items(),
                                                      key=lambda kv: order[kv[0]])}
        r = len(contributors[theme])
        summaries.append(ThemeSummary(theme, len(per_card), r, per_card,
                                      agreement_score(per_card, r),
                                      tuple(sorted(contributors[theme]))))
    return StandardizationResult(summaries, raw, len(unmapped), unmapped)


def theme_frequency(summaries, min_participants: Optional[int] = None) -> list[tuple[str, int]]:
    """(theme, contributing participants), most popular first, ties by name."""
    rows = [(s.theme, s.r) for s in summaries
            if min_participants is None or s.r >= min_participants]
    return sorted(rows, key=lambda t: (-t[1], t[0]))


def read_standardization_csv(path, unmapped: str = "unstandardized") -> StandardizationMap:
    entries = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            need = {"participant_id", "raw_label", "theme"}
            if not need <= set(reader.fieldnames or []):
                raise ParseError(f"{path}: expected columns {sorted(need)}")
            for row in reader:
                entries[(row["participant_id"], row["raw_label"])] = row["theme"]
    except (OSError, csv.Error) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return StandardizationMap(entries, unmapped)


def write_themes_csv(summaries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theme", "m", "r", "agreement", "contributing_participants"])
        for s in summaries:
            w.writerow([s.theme, s.m, s.r, repr(s.agreement), ";".join(s.contributors)])
