"""
Structure of a card sort
========================

Load the bundled e-commerce demo studies, build similarity matrices, cluster
the cards and compare a full-set sort with a randomised-subset sort.
"""

import tempfile
from pathlib import Path

import numpy as np

import cardsort as cs
from cardsort.cluster import inertia_curve
from cardsort.similarity import write_heatmap_svg

# %%
# Two synthetic conditions over the same 50 products: every participant of
# ``full`` saw all cards, every participant of ``subset`` saw 30 of them.
full = cs.load_example_study("ecommerce")
subset = cs.load_example_study("ecommerce_subset")
print(full.condition_name, full.n_records, "participants,", full.n_cards, "cards")
print(subset.condition_name, subset.n_records, "participants, 30 cards each")

# %%
# Similarity is the share of co-exposures in which a pair landed in the same
# category.  Under subsets some pairs are seen together only a few times.
s_full, e_full = cs.compute_similarity(full)
s_sub, e_sub = cs.compute_similarity(subset)
iu = np.triu_indices(s_sub.size, k=1)
print("co-exposures per pair in the subset condition: min", e_sub.counts[iu].min(),
      "median", int(np.median(e_sub.counts[iu])))

ix = full.card_index()
for a, b in [("fridges", "freezers"), ("laptops", "monitors"), ("fridges", "laptops")]:
    print(f"S({a}, {b}) = {s_full.values[ix[a], ix[b]]:.2f} full, "
          f"{s_sub.values[ix[a], ix[b]]:.2f} subset")

# %%
# k-means on rows of the dissimilarity matrix, with k from the elbow rule.
feats = cs.to_dissimilarity(s_full)
ks = list(range(1, 11))
print("inertia by k:", np.round(inertia_curve(feats, ks), 1))
k = cs.elbow_k(feats, (1, 10))
clusters = cs.kmeans(feats, k, card_ids=s_full.card_ids)
for group in clusters.groups():
    print(f"  {len(group):2d} cards:", ", ".join(group[:6]), "..." if len(group) > 6 else "")

# %%
# How close are the two conditions?  The Mantel test correlates the matrices
# (Spearman), AMI compares the clusterings.
res = cs.mantel(s_full, s_sub, permutations=999)
sub_clusters = cs.kmeans(cs.to_dissimilarity(s_sub), cs.elbow_k(cs.to_dissimilarity(s_sub), (1, 10)),
                         card_ids=s_sub.card_ids)
print(f"Mantel r = {res.statistic:.3f}, p = {res.p:.3f}; AMI = {cs.ami(clusters, sub_clusters):.3f}")

# %%
# A grayscale heatmap for the report.
out = Path(tempfile.mkdtemp()) / "full.svg"
write_heatmap_svg(s_full, out, labels=[c.label for c in full.cards])
print("heatmap written to", out)
