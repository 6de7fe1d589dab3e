import numpy as np
import pytest
from hypothesis import strategies as st

from cardsort.model import Card, Category, SortRecord, StudyData


def make_study(sorts, cards=None, condition="test"):
    """Build a study from ``[(shown, [group, ...]), ...]`` with single-letter card ids."""
    if cards is None:
        cards = sorted({c for shown, _ in sorts for c in shown})
    records = []
    for i, (shown, groups) in enumerate(sorts):
        cats = tuple(Category(f"g{j}", tuple(g)) for j, g in enumerate(groups))
        records.append(SortRecord(f"p{i}", frozenset(shown), cats))
    return StudyData(tuple(Card(c, c.lower()) for c in cards), tuple(records), condition)


def brute_similarity(data):
    """Independent double loop over participants and card pairs."""
    ids = data.card_ids
    m = len(ids)
    s = np.full((m, m), np.nan)
    e = np.zeros((m, m), dtype=int)
    for i in range(m):
        for j in range(m):
            paired = exposed = 0
            for rec in data.records:
                if ids[i] in rec.shown and ids[j] in rec.shown:
                    exposed += 1
                    for cat in rec.categories:
                        if ids[i] in cat.cards and ids[j] in cat.cards:
                            paired += 1
            e[i, j] = exposed
            if i != j and exposed:
                s[i, j] = paired / exposed
        s[i, i] = 1.0
    return s, e


def random_study(rng, max_cards=8, max_records=6):
    m = int(rng.integers(2, max_cards + 1))
    n = int(rng.integers(1, max_records + 1))
    ids = [chr(ord("A") + i) for i in range(m)]
    sorts = []
    for _ in range(n):
        size = int(rng.integers(1, m + 1))
        shown = [str(c) for c in rng.choice(ids, size, replace=False)]
        groups = {}
        for c in shown:
            g = int(rng.integers(-1, 3))  # -1 leaves the card unsorted
            if g >= 0:
                groups.setdefault(g, []).append(c)
        sorts.append((shown, list(groups.values())))
    return make_study(sorts, ids)


@st.composite
def studies(draw, max_cards=6, max_records=5):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_study(np.random.default_rng(seed), max_cards, max_records)


@pytest.fixture
def three_sorts():
    return make_study([
        ("ABC", ["AB", "C"]),
        ("AB", ["AB"]),
        ("AC", ["A", "C"]),
    ])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
