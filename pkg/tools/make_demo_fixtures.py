"""Regenerate the bundled synthetic demo studies in src/cardsort/data/.

Cards come from the bundled e-commerce set; each card has a hand-chosen home
theme, participants misfile a card now and then, and category names are drawn
from a few plausible wordings per theme.  Run from the repository root.
"""

import json
from pathlib import Path

import numpy as np

from cardsort.model import Category, SortRecord, StudyData, load_card_set, study_to_dict

THEMES = {
    "kitchen": ["Kitchen", "Kitchen Appliances", "Cooking", "Kitchen & Dining", "Small appliances"],
    "computing": ["Computers", "Computer Accessories", "PC & Laptops", "Computing", "IT hardware"],
    "entertainment": ["Entertainment", "Audio & Video", "TV and Audio", "Gaming", "Media"],
    "home": ["Home Appliances", "Household", "Home & Climate", "Appliances", "Housekeeping"],
    "personal": ["Personal Care", "Beauty", "Health & Beauty", "Grooming", "Bathroom"],
    "mobile": ["Mobile", "Phones & Accessories", "Mobile & Tablets", "Gadgets", "Wearables"],
}

# wordings only one condition's participants came up with
EXTRA = {
    "full-e": {"kitchen": ["Large appliances"], "computing": ["Office equipment"],
               "entertainment": ["Hobbies"], "home": ["Household appliances"],
               "personal": ["Self care"], "mobile": ["Smart devices"]},
    "subset-e": {"kitchen": ["Small kitchen gadgets"], "computing": ["Tech"],
                 "entertainment": ["Music & Games"], "home": ["Cleaning"],
                 "personal": ["Hair and shaving"], "mobile": ["Gadgets"]},
}

HOME = {
    "kitchen": ["coffee-makers", "cookers", "deep-fryers", "dishwashers", "electric-kettles",
                "freezers", "fridges", "hobs", "juicers", "kitchen-scales", "microwave-ovens",
                "ovens", "stand-mixers"],
    "computing": ["computer-mice", "desktop-computers", "graphic-cards", "keyboards", "laptops",
                  "monitors", "printers", "processors", "scanners"],
    "entertainment": ["gaming-consoles", "headphones", "microphones", "musical-instruments",
                      "pc-games", "radios", "speakers", "televisions", "vr-headsets"],
    "home": ["air-conditioners", "air-purifiers", "fans", "irons", "radiators",
             "vacuum-cleaners", "washing-machines"],
    "personal": ["electric-toothbrushes", "hair-dryers", "shavers", "trimmers"],
    "mobile": ["cameras", "chargers", "drones", "e-readers", "phone-cases", "smart-watches",
               "smartphones", "tablets"],
}


def make_study(condition, subset_size, participants, seed, misfile=0.12):
    cards = load_card_set("ecommerce")
    home = {cid: t for t, cids in HOME.items() for cid in cids}
    assert set(home) == {c.id for c in cards}
    themes = list(THEMES)
    rng = np.random.default_rng(seed)
    records = []
    for p in range(participants):
        shown = sorted(rng.choice([c.id for c in cards], subset_size, replace=False))
        pools = {t: THEMES[t] + EXTRA[condition][t] for t in themes}
        wording = {t: pools[t][rng.integers(len(pools[t]))] for t in themes}
        groups = {}
        for cid in shown:
            t = home[cid]
            if rng.random() < misfile:
                t = themes[rng.integers(len(themes))]
            groups.setdefault(t, []).append(cid)
        cats = tuple(Category(wording[t], tuple(groups[t])) for t in themes if t in groups)
        covariates = {"crt": float(rng.integers(0, 4)),
                      "conscientiousness": float(rng.integers(1, 6))}
        records.append(SortRecord(f"p{p + 1:02d}", frozenset(shown), cats,
                                  round(float(rng.lognormal(6.3, 0.4)), 1), covariates))
    return StudyData(tuple(cards), tuple(records), condition)


def main():
    out = Path("src/cardsort/data")
    for name, study in [("ecommerce", make_study("full-e", 50, 30, seed=11)),
                        ("ecommerce_subset", make_study("subset-e", 30, 40, seed=12))]:
        text = json.dumps(study_to_dict(study), indent=1, sort_keys=False) + "\n"
        (out / f"{name}_demo.json").write_text(text, encoding="utf-8")
        print(name, study.n_records, "records")


if __name__ == "__main__":
    main()
