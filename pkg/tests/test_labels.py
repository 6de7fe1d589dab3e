import numpy as np
import pytest
from hypothesis import given, strategies as st

from cardsort import errors
from cardsort.labels import (FREQ_TABLE_ENV, FrequencyTable, TokenCounts, compare_word,
                             informativeness, label_tokens, lemmatize, load_frequency_table,
                             tokenize_labels, vocab_jaccard, write_counts_csv)
from cardsort.model import Card, Category, SortRecord, StudyData, load_example_study


def _record(*labels, pid="p"):
    cards = [f"c{i}" for i in range(len(labels))]
    return SortRecord(pid, frozenset(cards), tuple(Category(l, (c,)) for l, c in zip(labels, cards)))


def _study(*labels):
    rec = _record(*labels)
    return StudyData(tuple(Card(c, c) for c in sorted(rec.shown)) + (Card("zz", "z"),), (rec,))


def test_tokenize_examples():
    tc = tokenize_labels(_study("Kitchen Appliances", "kitchen appliance"))
    assert tc.counts == {"kitchen": 2, "appliance": 2} and tc.total_tokens == 4
    assert tokenize_labels(_study("Mobile & Tablets")).counts == {"mobile": 1, "tablet": 1}
    assert label_tokens("Women's Grooming") == ["woman", "grooming"]
    assert label_tokens("  __ ") == []


@pytest.mark.parametrize("word,lemma", [
    ("batteries", "battery"), ("boxes", "box"), ("watches", "watch"), ("glasses", "glass"),
    ("children", "child"), ("news", "news"), ("bus", "bus"), ("gadgets", "gadget"),
    ("electronics", "electronic"), ("savings", "saving"), ("accessories", "accessory"),
])
def test_lemmatizer(word, lemma):
    assert lemmatize(word) == lemma


@given(st.text(alphabet=st.sampled_from("abcdeiosuxyz &-'"), max_size=30))
def test_tokenizing_tokens_is_idempotent(label):
    toks = label_tokens(label)
    assert label_tokens(" ".join(toks)) == toks


def test_compare_word():
    a = TokenCounts.from_tokens(["x"] * 10 + ["y"] * 90, "a")
    b = TokenCounts.from_tokens(["x"] * 10 + ["y"] * 90, "b")
    res = compare_word("x", a, b)
    assert res.statistic == 0 and res.p == 1.0
    a = TokenCounts.from_tokens(["gadget"] * 8 + ["y"] * 92)
    b = TokenCounts.from_tokens(["y"] * 100)
    # 2x2 [[8, 92], [0, 100]]: N(ad - bc)^2 / (row1 row2 col1 col2)
    expected = 200 * (8 * 100 - 92 * 0) ** 2 / (100 * 100 * 8 * 192)
    assert compare_word("Gadgets", a, b).statistic == pytest.approx(expected)
    with pytest.raises(errors.DegenerateTable):
        compare_word("absent", a, b)
    with pytest.raises(ValueError):
        compare_word(" ", a, b)


def test_jaccard():
    a = TokenCounts.from_tokens(["kitchen", "appliance"])
    b = TokenCounts.from_tokens(["kitchen", "gadget"])
    assert vocab_jaccard(a, b) == pytest.approx(1 / 3)
    assert vocab_jaccard(a, b) == vocab_jaccard(b, a)
    assert vocab_jaccard(a, a) == 1.0
    assert vocab_jaccard(TokenCounts.from_tokens([]), TokenCounts.from_tokens([])) == 1.0


@given(st.sets(st.sampled_from("abcdefg")), st.sets(st.sampled_from("abcdefg")))
def test_jaccard_is_one_only_for_equal_sets(x, y):
    j = vocab_jaccard(TokenCounts.from_tokens(x), TokenCounts.from_tokens(y))
    assert (j == 1.0) == (x == y)
    assert 0 <= j <= 1


def test_informativeness_against_bundled_table():
    freq = load_frequency_table()
    the = freq.zipf("the")
    assert 7.5 < the < 8.0
    assert informativeness(_record("The", "the the"), freq) == pytest.approx(9 - the)
    rare = informativeness(_record("zyzzyva", "quokkas"), freq)
    assert rare >= 7
    assert informativeness(_record("kitchen"), freq) == informativeness(_record("Kitchen"), freq)
    with pytest.raises(errors.NoTokens):
        informativeness(SortRecord("p", frozenset(), ()), freq)


def test_informativeness_decreases_with_more_frequent_words():
    freq = FrequencyTable({"common": 6.0, "rare": 2.0, "other": 4.0})
    assert informativeness(_record("rare other"), freq) > informativeness(_record("common other"), freq)


def test_frequency_table_loading(tmp_path, monkeypatch):
    p = tmp_path / "f.tsv"
    p.write_text("alpha\t3.5\nbeta\t5\n")
    t = load_frequency_table(p, default_zipf=2.0)
    assert t.zipf("alpha") == 3.5 and t.zipf("gamma") == 2.0
    monkeypatch.setenv(FREQ_TABLE_ENV, str(p))
    assert load_frequency_table().zipf("beta") == 5.0
    p.write_text("alpha\tlots\n")
    with pytest.raises(errors.ParseError):
        load_frequency_table(p)
    with pytest.raises(ValueError):
        FrequencyTable({"x": 12.0})


def test_demo_vocabulary_and_counts_csv(tmp_path):
    tc = tokenize_labels(load_example_study())
    top = [w for w, _ in tc.most_common(8)]
    assert "kitchen" in top and "appliance" in top
    assert sum(tc.counts.values()) == tc.total_tokens
    path = tmp_path / "counts.csv"
    write_counts_csv(tc, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "word,count" and len(lines) == len(tc.counts) + 1
    counts = [int(l.split(",")[1]) for l in lines[1:]]
    assert counts == sorted(counts, reverse=True)
