"""Synthetic card sorting studies with a known ground-truth partition.

Cards are dealt round-robin onto ``theme_count`` themes.  Each participant is
shown a uniform random subset of cards, sorts them by theme, optionally
splits some themes in two, and misfiles each card with probability
``noise_epsilon`` into a uniformly chosen other theme.

Participant ``i`` draws everything from the stream ``(seed, i)``, so a study
is reproducible on any platform and independent of generation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .errors import InvalidConfig
from .model import Card, Category, SortRecord, StudyData

__all__ = ["SimConfig", "SimulatedStudy", "simulate_study"]


@dataclass(frozen=True)
class SimConfig:
    card_count: int = 50
    theme_count: int = 6
    subset_size: int = 50
    participants: int = 40
    noise_epsilon: float = 0.0
    split_prob: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.card_count < 2:
            raise InvalidConfig("card_count must be at least 2")
        if not 1 <= self.theme_count <= self.card_count:
            raise InvalidConfig("theme_count must lie in [1, card_count]")
        if not 1 <= self.subset_size <= self.card_count:
            raise InvalidConfig("subset_size must lie in [1, card_count]")
        if self.participants < 1:
            raise InvalidConfig("participants must be positive")
        if not 0.0 <= self.noise_epsilon <= 1.0 or not 0.0 <= self.split_prob <= 1.0:
            raise InvalidConfig("noise_epsilon and split_prob must lie in [0, 1]")
        if self.seed < 0:
            raise InvalidConfig("seed must be non-negative")


@dataclass(frozen=True)
class SimulatedStudy:
    study: StudyData
    ground_truth: dict  # card id -> theme index

    def ground_truth_doc(self) -> dict:
        return {"cards": dict(self.ground_truth)}


def _card_id(i: int, width: int) -> str:
    return f"c{i + 1:0{width}d}"


def simulate_study(config: SimConfig, cards=None, condition_name=None) -> SimulatedStudy:
    """Generate a study from ``config``.

    Parameters
    ----------
    config : SimConfig
    cards : list of Card, optional
        Use these cards instead of generated ``c01, c02, ...`` ids; their count
        must equal ``config.card_count``.
    """
    config.validate()
    m, t = config.card_count, config.theme_count
    if cards is None:
        width = len(str(m))
        cards = [Card(_card_id(i, width), f"Card {i + 1}") for i in range(m)]
    elif len(cards) != m:
        raise InvalidConfig("len(cards) must equal card_count")
    theme_of = np.arange(m) % t
    pwidth = len(str(config.participants))

    records = []
    for p in range(config.participants):
        rng = substream(config.seed, p)
        shown = np.sort(rng.choice(m, size=config.subset_size, replace=False))
        split = rng.random(t) < config.split_prob
        side = rng.random(m) < 0.5
        misfile = rng.random(m) < config.noise_epsilon
        # draw a replacement theme for every card so stream use is fixed
        offset = rng.integers(1, t, size=m) if t > 1 else np.zeros(m, dtype=int)

        groups: dict[str, list[str]] = {}
        for i in shown:
            theme = int(theme_of[i])
            if misfile[i] and t > 1:
                label = f"theme-{(theme + int(offset[i])) % t}"
            elif split[theme] and side[i]:
                label = f"theme-{theme}-b"
            else:
                label = f"theme-{theme}"
            groups.setdefault(label, []).append(cards[i].id)
        cats = tuple(Category(lab, tuple(ids)) for lab, ids in sorted(groups.items()))
        covs = {"trait": float(rng.integers(1, 6)), "crt": float(rng.integers(0, 4))}
        duration = float(np.round(rng.lognormal(6.3, 0.4), 1))
        records.append(SortRecord(f"p{p + 1:0{pwidth}d}", frozenset(cards[i].id for i in shown),
                                  cats, duration, covs))

    name = condition_name if condition_name is not None else (
        "simulated-full" if config.subset_size == m else "simulated-subset")
    study = StudyData(tuple(cards), tuple(records), name)
    truth = {cards[i].id: int(theme_of[i]) for i in range(m)}
    return SimulatedStudy(study, truth)
