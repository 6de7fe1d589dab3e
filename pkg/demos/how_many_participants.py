"""
How many participants are enough?
=================================

Subsample a simulated study at every size, watch agreement with the complete
sample grow, fit growth curves and compare with the closed-form rule of thumb.
"""

import warnings

import cardsort as cs
from cardsort.sizing import required_n

# %%
# A simulated study: 50 cards in 6 themes, each participant sorts 30 of them
# and misfiles a card with probability 0.15.
cfg = cs.SimConfig(card_count=50, theme_count=6, subset_size=30, participants=40,
                   noise_epsilon=0.15, seed=3)
study = cs.simulate_study(cfg).study

# %%
# Within-condition curve: each point is the mean Mantel r between subsamples
# of n participants and all 40, stopping early once the mean settles.
curve = cs.bootstrap_within(study, metrics=("mantel_r",), seed=3)["mantel_r"]
for p in curve.points[::4]:
    print(f"n={p.n:2d}  mean r={p.mean:.3f}  sd={p.sd:.3f}  draws={p.iterations_used}")
for target in (0.8, 0.9):
    print(f"first n with mean r >= {target}: {cs.threshold_n(curve, target)}")

# %%
# Fit the ten growth families to the points above n = 10 and extrapolate.
with warnings.catch_warnings():
    warnings.simplefilter("ignore", cs.errors.FitDivergedWarning)
    fits = cs.fit_growth(curve.as_pairs())
for f in fits[:4]:
    print(f"{f.family:14s} R2={f.r_squared:.4f}  c={f.asymptote:.3f}  n(.95)={required_n(f, 0.95)}")

# %%
# The rule of thumb only needs the card counts.
for shown in (50, 40, 30, 20):
    print(f"{shown}/50 cards shown -> {cs.formula_sample_size(50, shown)} participants")
