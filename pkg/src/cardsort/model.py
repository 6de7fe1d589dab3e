"""Study data types, validation and flat-file ingestion.

A study is a card set plus one :class:`SortRecord` per participant.  Each
record carries the subset of cards the participant was shown, the categories
they built from it, and any scalar covariates (trait scores, CRT, Likert
ratings).  Everything is immutable once constructed and validated.

Two on-disk layouts are supported:

* JSON, a single document holding cards, records and covariates.
* CSV, a long ``participant,card_id,category_label`` table with sidecar files
  ``<stem>.shown.csv`` (participant, card_id), ``<stem>.covariates.csv``
  (participant, name, value) and optionally ``<stem>.cards.csv`` (id, label).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .errors import ParseError, ValidationError

__all__ = [
    "Card",
    "Category",
    "SortRecord",
    "StudyData",
    "ingest_study",
    "write_study",
    "study_from_dict",
    "study_to_dict",
    "filter_records",
    "load_card_set",
    "load_example_study",
]

DURATION_KEY = "duration_seconds"


@dataclass(frozen=True)
class Card:
    id: str
    label: str

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError(f"card id must be a non-empty string, got {self.id!r}")
        if not isinstance(self.label, str) or not self.label.strip():
            raise ValidationError(f"card {self.id!r} has an empty label")


@dataclass(frozen=True)
class Category:
    label: str
    cards: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "cards", tuple(self.cards))


@dataclass(frozen=True)
class SortRecord:
    participant_id: str
    shown: frozenset[str]
    categories: tuple[Category, ...] = ()
    duration_seconds: float = 0.0
    covariates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "shown", frozenset(self.shown))
        cats = tuple(c if isinstance(c, Category) else Category(c[0], c[1])
                     for c in self.categories)
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "duration_seconds", float(self.duration_seconds))
        object.__setattr__(self, "covariates",
                           {str(k): float(v) for k, v in dict(self.covariates).items()})

    @property
    def sorted_cards(self) -> set[str]:
        return {c for cat in self.categories for c in cat.cards}


def _validate_record(rec: SortRecord, card_ids: set[str], index: int) -> None:
    if not isinstance(rec.participant_id, str) or not rec.participant_id:
        raise ValidationError("participant id must be a non-empty string", index)
    if not (math.isfinite(rec.duration_seconds) and rec.duration_seconds >= 0):
        raise ValidationError("duration_seconds must be a finite non-negative number", index)
    for name, value in rec.covariates.items():
        if not math.isfinite(value):
            raise ValidationError(f"covariate {name!r} is not finite", index)
    unknown = rec.shown - card_ids
    if unknown:
        raise ValidationError(f"shown cards not in the card set: {sorted(unknown)}", index)
    placed: dict[str, str] = {}
    labels: set[str] = set()
    for cat in rec.categories:
        key = cat.label.strip() if isinstance(cat.label, str) else None
        if not key:
            raise ValidationError("category label must be a non-empty string", index)
        if key in labels:
            raise ValidationError(f"duplicate category label {key!r}", index)
        labels.add(key)
        for cid in cat.cards:
            if cid not in rec.shown:
                raise ValidationError(
                    f"card {cid!r} in category {key!r} was not shown to the participant", index)
            if cid in placed:
                raise ValidationError(
                    f"card {cid!r} placed in both {placed[cid]!r} and {key!r}", index)
            placed[cid] = key


@dataclass(frozen=True)
class StudyData:
    """A validated card sorting study (one experimental condition)."""

    cards: tuple[Card, ...]
    records: tuple[SortRecord, ...]
    condition_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cards", tuple(self.cards))
        object.__setattr__(self, "records", tuple(self.records))
        if len(self.cards) < 2:
            raise ValidationError(f"a study needs at least 2 cards, got {len(self.cards)}")
        ids = [c.id for c in self.cards]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate card ids: {dup}")
        id_set = set(ids)
        seen_participants: set[str] = set()
        for i, rec in enumerate(self.records):
            _validate_record(rec, id_set, i)
            if rec.participant_id in seen_participants:
                raise ValidationError(f"duplicate participant id {rec.participant_id!r}", i)
            seen_participants.add(rec.participant_id)

    @property
    def card_ids(self) -> list[str]:
        return [c.id for c in self.cards]

    @property
    def n_cards(self) -> int:
        return len(self.cards)

    @property
    def n_records(self) -> int:
        return len(self.records)

    @property
    def is_full_set(self) -> bool:
        ids = frozenset(self.card_ids)
        return all(r.shown == ids for r in self.records)

    def card_index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.cards)}

    def with_records(self, records: Iterable[SortRecord]) -> "StudyData":
        return StudyData(self.cards, tuple(records), self.condition_name)


def filter_records(data: StudyData, predicate: Callable[[SortRecord], bool]) -> StudyData:
    """Keep only the records for which ``predicate`` is true.

    The card set is left untouched; an empty result is allowed.
    """
    return StudyData(data.cards, tuple(r for r in data.records if predicate(r)),
                     data.condition_name)


# -- JSON ------------------------------------------------------------------

def study_to_dict(data: StudyData) -> dict:
    return {
        "condition": data.condition_name,
        "cards": [{"id": c.id, "label": c.label} for c in data.cards],
        "records": [
            {
                "participant": r.participant_id,
                "shown": [c.id for c in data.cards if c.id in r.shown],
                "duration_seconds": r.duration_seconds,
                "covariates": dict(sorted(r.covariates.items())),
                "categories": [{"label": cat.label, "cards": list(cat.cards)}
                               for cat in r.categories],
            }
            for r in data.records
        ],
    }


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ParseError(f"{where}: {key!r} has the wrong type")
    return value


def study_from_dict(doc: dict) -> StudyData:
    """Build a :class:`StudyData` from the JSON document layout."""
    if not isinstance(doc, dict):
        raise ParseError("study document must be a JSON object")
    condition = doc.get("condition", "")
    if not isinstance(condition, str):
        raise ParseError("'condition' must be a string")
    cards = []
    for i, c in enumerate(_require(doc, "cards", list, "study")):
        cards.append(Card(_require(c, "id", str, f"cards[{i}]"),
                          _require(c, "label", str, f"cards[{i}]")))
    records = []
    for i, r in enumerate(_require(doc, "records", list, "study")):
        where = f"records[{i}]"
        pid = _require(r, "participant", str, where)
        shown = _require(r, "shown", list, where)
        if not all(isinstance(s, str) for s in shown):
            raise ParseError(f"{where}: shown card ids must be strings")
        duration = r.get("duration_seconds", 0.0)
        if isinstance(duration, bool) or not isinstance(duration, (int, float)):
            raise ParseError(f"{where}: duration_seconds must be a number")
        covs = r.get("covariates", {})
        if not isinstance(covs, dict) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in covs.values()):
            raise ParseError(f"{where}: covariates must map names to numbers")
        cats = []
        for j, cat in enumerate(_require(r, "categories", list, where)):
            label = _require(cat, "label", str, f"{where}.categories[{j}]")
            members = _require(cat, "cards", list, f"{where}.categories[{j}]")
            if not all(isinstance(m, str) for m in members):
                raise ParseError(f"{where}.categories[{j}]: card ids must be strings")
            cats.append(Category(label, tuple(members)))
        if len(set(shown)) != len(shown):
            raise ValidationError("shown list repeats a card id", i)
        records.append(SortRecord(pid, frozenset(shown), tuple(cats), duration, covs))
    return StudyData(tuple(cards), tuple(records), condition)


# -- CSV -------------------------------------------------------------------

def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}.{suffix}.csv")


def _read_rows(path: Path, columns: tuple[str, ...]) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in columns if c not in (reader.fieldnames or [])]
            if missing:
                raise ParseError(f"{path}: missing columns {missing}")
            return list(reader)
    except (OSError, csv.Error, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _ingest_csv(path: Path, shown_path=None, covariates_path=None, cards_path=None,
                condition=None) -> StudyData:
    shown_path = Path(shown_path) if shown_path else _sidecar(path, "shown")
    covariates_path = Path(covariates_path) if covariates_path else _sidecar(path, "covariates")
    cards_path = Path(cards_path) if cards_path else _sidecar(path, "cards")

    order: list[str] = []
    placements: dict[str, dict[str, list[str]]] = {}
    for row in _read_rows(path, ("participant", "card_id", "category_label")):
        pid = row["participant"]
        if pid not in placements:
            placements[pid] = {}
            order.append(pid)
        placements[pid].setdefault(row["category_label"], []).append(row["card_id"])

    shown: dict[str, list[str]] = {}
    if shown_path.exists():
        for row in _read_rows(shown_path, ("participant", "card_id")):
            shown.setdefault(row["participant"], []).append(row["card_id"])
            placements.setdefault(row["participant"], {})
        # record order follows the shown table, which lists every participant
        order = list(shown) + [pid for pid in order if pid not in shown]

    covs: dict[str, dict[str, float]] = {}
    if covariates_path.exists():
        for row in _read_rows(covariates_path, ("participant", "name", "value")):
            try:
                value = float(row["value"])
            except ValueError as exc:
                raise ParseError(f"{covariates_path}: bad value {row['value']!r}") from exc
            covs.setdefault(row["participant"], {})[row["name"]] = value

    if cards_path.exists():
        cards = [Card(r["id"], r["label"]) for r in _read_rows(cards_path, ("id", "label"))]
    else:
        ids: list[str] = []
        for pid in order:
            for cid in shown.get(pid, []) + [c for m in placements[pid].values() for c in m]:
                if cid not in ids:
                    ids.append(cid)
        cards = [Card(cid, cid) for cid in ids]
    all_ids = frozenset(c.id for c in cards)

    records = []
    for pid in order:
        cov = dict(covs.get(pid, {}))
        duration = cov.pop(DURATION_KEY, 0.0)
        cats = tuple(Category(label, tuple(members)) for label, members in placements[pid].items())
        records.append(SortRecord(pid, frozenset(shown[pid]) if shown_path.exists() else all_ids,
                                  cats, duration, cov))
    return StudyData(tuple(cards), tuple(records), condition if condition is not None else path.stem)


def _write_csv(data: StudyData, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["participant", "card_id", "category_label"])
        for r in data.records:
            for cat in r.categories:
                for cid in cat.cards:
                    w.writerow([r.participant_id, cid, cat.label])
    with open(_sidecar(path, "shown"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["participant", "card_id"])
        for r in data.records:
            for c in data.cards:
                if c.id in r.shown:
                    w.writerow([r.participant_id, c.id])
    with open(_sidecar(path, "covariates"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["participant", "name", "value"])
        for r in data.records:
            w.writerow([r.participant_id, DURATION_KEY, repr(r.duration_seconds)])
            for name, value in sorted(r.covariates.items()):
                w.writerow([r.participant_id, name, repr(value)])
    with open(_sidecar(path, "cards"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"])
        for c in data.cards:
            w.writerow([c.id, c.label])


def _infer_format(path: Path, fmt):
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt not in ("json", "csv"):
        raise ParseError(f"unsupported study format {fmt!r} (expected json or csv)")
    return fmt


def ingest_study(path, format=None, **csv_options) -> StudyData:
    """Read and validate a study file.

    Parameters
    ----------
    path : str or Path
        Study file.  For CSV this is the long placement table; sidecars are
        looked up next to it unless given through ``csv_options``
        (``shown_path``, ``covariates_path``, ``cards_path``, ``condition``).
    format : {'json', 'csv'}, optional
        Inferred from the file suffix when omitted.

    Raises
    ------
    ParseError
        The file is missing, unreadable or does not follow the schema.
    ValidationError
        The content violates a study invariant; the message names the record.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    if fmt == "csv":
        return _ingest_csv(path, **csv_options)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return study_from_dict(doc)


def write_study(data: StudyData, path, format=None) -> None:
    """Write ``data`` in the layout :func:`ingest_study` reads back."""
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "csv":
        _write_csv(data, path)
    else:
        path.write_text(json.dumps(study_to_dict(data), indent=2) + "\n", encoding="utf-8")


# -- bundled data ----------------------------------------------------------

def load_card_set(name: str) -> list[Card]:
    """Return one of the bundled 50-card sets (``'ecommerce'`` or ``'banking'``)."""
    raw = resources.files("cardsort.data").joinpath("card_sets.json").read_text(encoding="utf-8")
    sets = json.loads(raw)
    if name not in sets:
        raise KeyError(f"unknown card set {name!r}; available: {sorted(sets)}")
    return [Card(c["id"], c["label"]) for c in sets[name]]


def load_example_study(name: str = "ecommerce") -> StudyData:
    """Load the bundled synthetic demo study built on a bundled card set."""
    raw = resources.files("cardsort.data").joinpath(f"{name}_demo.json").read_text(encoding="utf-8")
    return study_from_dict(json.loads(raw))
