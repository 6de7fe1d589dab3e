import pytest
from hypothesis import given, settings, strategies as st

from cardsort import errors
from cardsort.model import Card, Category, SortRecord, StudyData
from cardsort.themes import (StandardizationMap, agreement_score, apply_standardization,
                             read_standardization_csv, theme_frequency, write_themes_csv)


def _study(sorts):
    cards = sorted({c for groups in sorts for g in groups.values() for c in g})
    recs = [SortRecord(f"p{i}", frozenset(cards), tuple(Category(l, tuple(g)) for l, g in groups.items()))
            for i, groups in enumerate(sorts)]
    return StudyData(tuple(Card(c, c) for c in cards + ["unused"]), tuple(recs))


def test_eq4_hand_case():
    assert agreement_score({"card1": 3, "card2": 1}, 4) == 50.0
    sorts = [{"A": ["x", "y"]}, {"A": ["x"]}, {"B": ["x"]}, {"C": ["w"], "D": ["z"]}]
    data = _study(sorts)
    mapping = StandardizationMap({("p0", "A"): "T", ("p1", "A"): "T", ("p2", "B"): "T",
                                  ("p3", "C"): "T", ("p3", "D"): "U"})
    res = apply_standardization(data, mapping)
    t = {s.theme: s for s in res.themes}["T"]
    assert t.r == 4 and t.m == 3
    assert t.per_card_counts == {"w": 1, "x": 3, "y": 1}
    assert t.agreement == pytest.approx(100 / (3 * 4) * 5)


def test_unanimous_sorting_scores_100():
    sorts = [{"Food": ["a", "b"], "Tools": ["c", "d"]}] * 5
    data = _study(sorts)
    mapping = StandardizationMap({(f"p{i}", lab): lab.lower() for i in range(5)
                                  for lab in ("Food", "Tools")})
    res = apply_standardization(data, mapping)
    assert [s.agreement for s in res.themes] == [100.0, 100.0]
    assert res.mean_agreement == 100.0 and res.standardization_count == 2


def test_participant_counts_once_per_theme():
    data = _study([{"Phones": ["a"], "Telephony": ["a2", "b"]}])
    mapping = StandardizationMap({("p0", "Phones"): "mobile", ("p0", "Telephony"): "mobile"})
    t = apply_standardization(data, mapping).themes[0]
    assert t.r == 1 and t.agreement == 100.0


def test_unmapped_policies():
    data = _study([{"A": ["x"], "B": ["y"]}])
    mapping = StandardizationMap({("p0", " A "): "T"})
    res = apply_standardization(data, mapping)
    assert res.unstandardized_count == 1 and res.raw_category_count == 2
    with pytest.raises(errors.UnmappedCategory):
        apply_standardization(data, StandardizationMap(mapping.entries, unmapped="error"))
    with pytest.raises(ValueError):
        StandardizationMap({}, unmapped="ignore")
    with pytest.raises(errors.ValidationError):
        StandardizationMap({("p0", "A"): " "})


def test_theme_frequency():
    data = _study([{"L": ["a"]} for _ in range(7)] + [{"M": ["b"]} for _ in range(3)]
                  + [{"N": ["c"]} for _ in range(3)])
    mapping = StandardizationMap({(r.participant_id, c.label): c.label.lower()
                                  for r in data.records for c in r.categories})
    themes = apply_standardization(data, mapping).themes
    assert theme_frequency(themes, min_participants=4) == [("l", 7)]
    assert theme_frequency(themes) == [("l", 7), ("m", 3), ("n", 3)]


sorts_strategy = st.lists(
    st.dictionaries(st.sampled_from(["A", "B", "C"]),
                    st.lists(st.sampled_from("uvwxyz"), min_size=1, max_size=3, unique=True),
                    min_size=1, max_size=3),
    min_size=1, max_size=5)


def _dedupe(sorts):
    out = []
    for groups in sorts:
        seen, clean = set(), {}
        for lab, cards in groups.items():
            keep = [c for c in cards if c not in seen]
            seen.update(keep)
            if keep:
                clean[lab] = keep
        out.append(clean or {"A": ["u"]})
    return out


@settings(max_examples=80, deadline=None)
@given(sorts_strategy)
def test_duplication_invariance_and_bounds(sorts):
    sorts = _dedupe(sorts)
    data = _study(sorts)
    mapping = {(r.participant_id, c.label): c.label for r in data.records for c in r.categories}
    base = apply_standardization(data, StandardizationMap(mapping))
    doubled = _study(sorts + sorts)
    mapping2 = {(r.participant_id, c.label): c.label for r in doubled.records for c in r.categories}
    twice = apply_standardization(doubled, StandardizationMap(mapping2))
    for a, b in zip(base.themes, twice.themes):
        assert a.agreement == pytest.approx(b.agreement, abs=1e-9)
        assert sum(a.per_card_counts.values()) <= a.m * a.r
        assert all(1 <= p <= a.r for p in a.per_card_counts.values())
        assert 0 < a.agreement <= 100


@settings(max_examples=80, deadline=None)
@given(sorts_strategy)
def test_merging_disjoint_themes_never_raises_the_max(sorts):
    # themes A (cards u-w) and B (cards x-z) have disjoint card sets by construction
    sorts = _dedupe(sorts)
    for groups in sorts:
        for lab in list(groups):
            groups[lab] = [c for c in groups[lab] if (lab == "A") == (c in "uvw")] or None
            if groups[lab] is None or lab == "C":
                del groups[lab]
    sorts = [g for g in sorts if g]
    if not sorts:
        return
    data = _study(sorts)
    split = {(r.participant_id, c.label): c.label for r in data.records for c in r.categories}
    merged = {k: "AB" for k in split}
    parts = apply_standardization(data, StandardizationMap(split)).themes
    whole = apply_standardization(data, StandardizationMap(merged)).themes[0]
    assert whole.agreement <= max(t.agreement for t in parts) + 1e-9


def test_csv_io(tmp_path):
    p = tmp_path / "map.csv"
    p.write_text("participant_id,raw_label,theme\np0,Food,food\np0,Tools,tools\n")
    mapping = read_standardization_csv(p)
    data = _study([{"Food": ["a"], "Tools": ["b"]}])
    res = apply_standardization(data, mapping)
    out = tmp_path / "themes.csv"
    write_themes_csv(res.themes, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "theme,m,r,agreement,contributing_participants"
    assert lines[1] == "food,1,1,100.0,p0"
    p.write_text("who,what\n")
    with pytest.raises(errors.ParseError):
        read_standardization_csv(p)
