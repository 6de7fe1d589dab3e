import json

import pytest
from hypothesis import given, settings

from cardsort import errors
from cardsort.model import (Card, Category, SortRecord, StudyData, filter_records, ingest_study,
                            load_card_set, load_example_study, study_from_dict, study_to_dict,
                            write_study)

from conftest import studies


def _doc():
    return {
        "condition": "tiny",
        "cards": [{"id": "a", "label": "Apples"}, {"id": "b", "label": "Bananas"},
                  {"id": "c", "label": "Cherries"}],
        "records": [
            {"participant": "p1", "shown": ["a", "b", "c"], "duration_seconds": 60,
             "covariates": {"crt": 1}, "categories": [{"label": "Fruit", "cards": ["a", "b"]}]},
            {"participant": "p2", "shown": ["a", "c"],
             "categories": [{"label": "Red", "cards": ["a", "c"]}]},
        ],
    }


def test_ingest_json(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(_doc()))
    data = ingest_study(p)
    assert data.n_records == 2 and data.n_cards == 3
    assert data.records[0].covariates == {"crt": 1.0}
    assert not data.is_full_set


def test_member_not_shown_is_rejected(tmp_path):
    doc = _doc()
    doc["records"][1]["categories"][0]["cards"] = ["a", "b"]
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(errors.ValidationError, match="record 1"):
        ingest_study(p)


@pytest.mark.parametrize("mutate", [
    lambda d: d["records"][0]["categories"].append({"label": "More", "cards": ["a"]}),
    lambda d: d["records"][0]["categories"].append({"label": " Fruit ", "cards": ["c"]}),
    lambda d: d["records"][0]["shown"].append("zz"),
    lambda d: d["records"][1].update(participant="p1"),
    lambda d: d["records"][0].update(duration_seconds=-1),
    lambda d: d["cards"].append({"id": "a", "label": "again"}),
])
def test_invariant_violations(mutate):
    doc = _doc()
    mutate(doc)
    with pytest.raises(errors.ValidationError):
        study_from_dict(doc)


def test_parse_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(errors.ParseError):
        ingest_study(p)
    with pytest.raises(errors.ParseError):
        ingest_study(tmp_path / "missing.json")
    with pytest.raises(errors.ParseError):
        ingest_study(tmp_path / "s.xml")
    with pytest.raises(errors.ParseError):
        study_from_dict({"cards": "nope", "records": []})


def test_unsorted_cards_are_allowed():
    rec = SortRecord("p", {"a", "b"}, [Category("x", ("a",))])
    data = StudyData((Card("a", "A"), Card("b", "B")), (rec,))
    assert data.records[0].sorted_cards == {"a"}


def test_bundled_fixture_has_fifty_cards():
    data = load_example_study()
    assert data.n_cards == 50 and data.is_full_set
    assert [c.label for c in data.cards] == [c.label for c in load_card_set("ecommerce")]
    assert load_example_study("ecommerce_subset").n_cards == 50
    assert len(load_card_set("banking")) == 50


def test_filter_records():
    cards = (Card("a", "A"), Card("b", "B"))
    recs = tuple(SortRecord(f"p{s}", {"a", "b"}, (), covariates={"crt": s}) for s in range(4))
    data = StudyData(cards, recs)
    assert filter_records(data, lambda r: True).records == data.records
    assert filter_records(data, lambda r: r.covariates["crt"] >= 2).n_records == 2
    assert filter_records(data, lambda r: False).n_records == 0


@settings(max_examples=60, deadline=None)
@given(studies())
def test_json_round_trip(data):
    assert study_from_dict(json.loads(json.dumps(study_to_dict(data)))) == data


@settings(max_examples=30, deadline=None)
@given(studies())
def test_csv_round_trip(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("csv") / "study.csv"
    write_study(data, path)
    back = ingest_study(path, condition=data.condition_name)
    assert back == data


def test_csv_without_shown_sidecar_means_full_set(tmp_path):
    p = tmp_path / "long.csv"
    p.write_text("participant,card_id,category_label\np1,a,X\np1,b,X\np2,a,Y\np2,b,Z\n")
    data = ingest_study(p)
    assert data.condition_name == "long"
    assert data.is_full_set and data.n_records == 2
