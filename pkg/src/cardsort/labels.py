"""Category-label linguistics: tokens, lemmas, word counts, overlap and informativeness."""

from __future__ import annotations

import csv
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import NoTokens, ParseError
from .model import SortRecord, StudyData
from .stats import TestResult, chi_squared

__all__ = [
    "TokenCounts",
    "FrequencyTable",
    "lemmatize",
    "label_tokens",
    "tokenize_labels",
    "compare_word",
    "vocab_jaccard",
    "informativeness",
    "informativeness_scores",
    "load_frequency_table",
    "write_counts_csv",
    "FREQ_TABLE_ENV",
]

FREQ_TABLE_ENV = "CARDSORT_FREQ_TABLE"
ZIPF_CEILING = 9.0

_POSSESSIVE = re.compile(r"['’]s\b")
_SPLIT = re.compile(r"[\W_]+")
_ES_ENDINGS = ("sses", "xes", "ches", "shes", "zzes")


@lru_cache(maxsize=1)
def _exceptions() -> dict[str, str]:
    text = resources.files("cardsort.data").joinpath("lemma_exceptions.tsv").read_text(encoding="utf-8")
    table = {}
    for line in text.splitlines():
        if line and not line.startswith("#"):
            word, lemma = line.split("\t")
            table[word] = lemma
    return table


def _strip_suffix(w: str) -> str:
    if len(w) <= 3 or w.endswith(("ss", "us", "is")):
        return w
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith(_ES_ENDINGS):
        return w[:-2]
    if w.endswith("s"):
        return w[:-1]
    return w


def lemmatize(token: str) -> str:
    """Fold plurals with the bundled exception table and suffix rules.

    Applied until nothing changes, so lemmatizing a lemma is a no-op.
    """
    table = _exceptions()
    w = token.lower()
    while True:
        nxt = table[w] if w in table else _strip_suffix(w)
        if nxt == w:
            return w
        w = nxt


def label_tokens(label: str) -> list[str]:
    text = _POSSESSIVE.sub("", label.lower())
    return [lemmatize(t) for t in _SPLIT.split(text) if t]


@dataclass(frozen=True)
class TokenCounts:
    condition_name: str
    counts: Mapping[str, int]
    total_tokens: int

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], condition_name: str = "") -> "TokenCounts":
        c = Counter(tokens)
        return cls(condition_name, dict(c), sum(c.values()))

    @property
    def vocabulary(self) -> set[str]:
        return {w for w, n in self.counts.items() if n > 0}

    def most_common(self, k: Optional[int] = None) -> list[tuple[str, int]]:
        items = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return items if k is None else items[:k]


def tokenize_labels(data: StudyData) -> TokenCounts:
    """Token counts over every category label of every participant."""
    tokens = (t for rec in data.records for cat in rec.categories for t in label_tokens(cat.label))
    return TokenCounts.from_tokens(tokens, data.condition_name)


def compare_word(word: str, a: TokenCounts, b: TokenCounts) -> TestResult:
    """2x2 chi-squared of one word's share of the tokens in two conditions.

    ``word`` is lemmatized the same way as the labels.
    """
    if not word or not word.strip():
        raise ValueError("word must be non-empty")
    w = lemmatize(word.strip())
    ca, cb = a.counts.get(w, 0), b.counts.get(w, 0)
    return chi_squared([[ca, a.total_tokens - ca], [cb, b.total_tokens - cb]])


def vocab_jaccard(a: TokenCounts, b: TokenCounts) -> float:
    """Jaccard index of the two vocabularies (1 when both are empty)."""
    va, vb = a.vocabulary, b.vocabulary
    union = va | vb
    if not union:
        return 1.0
    return len(va & vb) / len(union)


@dataclass(frozen=True)
class FrequencyTable:
    """Zipf word frequencies (log10 occurrences per billion words)."""

    entries: Mapping[str, float] = field(default_factory=dict)
    default_zipf: float = 1.0

    def __post_init__(self):
        bad = [w for w, z in self.entries.items() if not 0.0 <= z <= ZIPF_CEILING]
        if bad or not 0.0 <= self.default_zipf <= ZIPF_CEILING:
            raise ValueError(f"Zipf values must lie in [0, 9]: {bad[:5] or self.default_zipf}")

    def zipf(self, word: str) -> float:
        return self.entries.get(word, self.default_zipf)


def load_frequency_table(path=None, default_zipf: float = 1.0) -> FrequencyTable:
    """Read a two-column ``word<TAB>zipf`` file.

    Without ``path`` the ``CARDSORT_FREQ_TABLE`` environment variable is
    consulted, then the bundled English table (derived from the wordfreq
    project's data) is used.
    """
    path = path or os.environ.get(FREQ_TABLE_ENV)
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    else:
        text = resources.files("cardsort.data").joinpath("zipf_en.tsv").read_text(encoding="utf-8")
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        try:
            entries[parts[0]] = float(parts[1])
        except (IndexError, ValueError) as exc:
            raise ParseError(f"frequency table line {lineno}: {line!r}") from exc
    return FrequencyTable(entries, default_zipf)


def informativeness(record: SortRecord, freq: FrequencyTable) -> float:
    """Mean of ``9 - zipf`` over all label tokens of one participant.

    Rare words score high; out-of-vocabulary words use the table default.
    """
    tokens = [t for cat in record.categories for t in label_tokens(cat.label)]
    if not tokens:
        raise NoTokens(f"participant {record.participant_id} has no label tokens")
    return float(np.mean([ZIPF_CEILING - freq.zipf(t) for t in tokens]))


def informativeness_scores(data: StudyData, freq: FrequencyTable) -> dict[str, float]:
    """Per-participant informativeness, skipping participants without labels."""
    out = {}
    for rec in data.records:
        try:
            out[rec.participant_id] = informativeness(rec, freq)
        except NoTokens:
            continue
    return out


def write_counts_csv(counts: TokenCounts, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "count"])
        for word, n in counts.most_common():
            w.writerow([word, n])
