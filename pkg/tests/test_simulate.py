import json

import numpy as np
import pytest

from cardsort import errors
from cardsort.model import study_to_dict
from cardsort.resample import bootstrap_within, threshold_n
from cardsort.similarity import compute_similarity
from cardsort.simulate import SimConfig, simulate_study
from cardsort.stats import mantel_r


def _block(truth, ids):
    t = np.array([truth[c] for c in ids])
    return (t[:, None] == t[None, :]).astype(float)


def test_noiseless_full_set_is_block_matrix():
    sim_study = simulate_study(SimConfig(12, 3, 12, 5, seed=1))
    sim, _ = compute_similarity(sim_study.study)
    np.testing.assert_array_equal(sim.values, _block(sim_study.ground_truth, sim.card_ids))
    assert sim_study.study.is_full_set
    assert {c.label for r in sim_study.study.records for c in r.categories} == \
        {"theme-0", "theme-1", "theme-2"}


def test_noiseless_subset_is_block_valued_where_defined():
    sim_study = simulate_study(SimConfig(20, 4, 12, 4, seed=2))
    sim, _ = compute_similarity(sim_study.study)
    block = _block(sim_study.ground_truth, sim.card_ids)
    defined = sim.defined
    np.testing.assert_array_equal(sim.values[defined], block[defined])
    assert all(len(r.shown) == 12 for r in sim_study.study.records)


def test_round_robin_themes_and_splits():
    s = simulate_study(SimConfig(10, 3, 10, 3, split_prob=1.0, seed=0))
    assert [s.ground_truth[c] for c in s.study.card_ids] == [0, 1, 2, 0, 1, 2, 0, 1, 2, 0]
    labels = {c.label for r in s.study.records for c in r.categories}
    assert labels <= {f"theme-{t}" for t in range(3)} | {f"theme-{t}-b" for t in range(3)}
    assert any(lab.endswith("-b") for lab in labels)


def test_deterministic_given_seed():
    cfg = SimConfig(30, 5, 18, 12, 0.2, 0.3, seed=7)
    a = json.dumps(study_to_dict(simulate_study(cfg).study))
    b = json.dumps(study_to_dict(simulate_study(cfg).study))
    assert a == b
    c = json.dumps(study_to_dict(simulate_study(SimConfig(30, 5, 18, 12, 0.2, 0.3, seed=8)).study))
    assert a != c


@pytest.mark.parametrize("cfg", [
    SimConfig(card_count=1), SimConfig(theme_count=0), SimConfig(theme_count=60),
    SimConfig(subset_size=0), SimConfig(subset_size=51), SimConfig(participants=0),
    SimConfig(noise_epsilon=1.5), SimConfig(split_prob=-0.1), SimConfig(seed=-1),
])
def test_invalid_configs(cfg):
    with pytest.raises(errors.InvalidConfig):
        simulate_study(cfg)


def test_large_n_subset_converges_to_full():
    for seed in range(20):
        full, _ = compute_similarity(simulate_study(SimConfig(50, 6, 50, 200, seed=seed)).study)
        sub, _ = compute_similarity(simulate_study(SimConfig(50, 6, 30, 200, seed=seed)).study)
        assert mantel_r(full, sub) >= 0.99


def test_noise_lowers_within_theme_similarity():
    means = []
    for eps in (0.0, 0.1, 0.2, 0.3):
        vals = []
        for seed in range(20):
            s = simulate_study(SimConfig(30, 5, 30, 20, eps, seed=seed))
            sim, _ = compute_similarity(s.study)
            block = _block(s.ground_truth, sim.card_ids).astype(bool)
            np.fill_diagonal(block, False)
            vals.append(sim.values[block].mean())
        means.append(np.mean(vals))
    assert all(a > b for a, b in zip(means, means[1:]))


@pytest.mark.slow
def test_subset_needs_at_least_as_many_participants_on_average():
    # the aggregate reading of the direction property; the per-seed version is
    # acceptance criterion 5
    full, sub = [], []
    for seed in range(20):
        for sink, size in ((full, 50), (sub, 30)):
            study = simulate_study(SimConfig(50, 6, size, 40, 0.15, seed=seed)).study
            curve = bootstrap_within(study, metrics=("mantel_r",), seed=seed)["mantel_r"]
            sink.append(threshold_n(curve, 0.90))
    assert np.mean(sub) >= np.mean(full)
