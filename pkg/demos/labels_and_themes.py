"""
Category labels and themes
==========================

Compare the words participants used in two conditions, score how
informative their labels are, and measure agreement within themes.
"""

import cardsort as cs
from cardsort.labels import informativeness_scores

# %%
full = cs.load_example_study("ecommerce")
subset = cs.load_example_study("ecommerce_subset")
a, b = cs.tokenize_labels(full), cs.tokenize_labels(subset)
print("most common words (full):", a.most_common(6))
print("most common words (subset):", b.most_common(6))
print(f"vocabulary overlap (Jaccard) = {cs.vocab_jaccard(a, b):.2f}")

# %%
# Chi-squared on one word's share of all tokens in each condition.
for word in ("kitchen", "gadgets", "appliances"):
    res = cs.compare_word(word, a, b)
    print(f"{word:11s} chi2(1)={res.statistic:.2f} p={res.p:.3f}")

# %%
# Informativeness: mean of 9 - Zipf frequency over a participant's label
# words, so rare words score higher.  The bundled table covers ~39k words.
freq = cs.load_frequency_table()
sa, sb = informativeness_scores(full, freq), informativeness_scores(subset, freq)
res = cs.mann_whitney(list(sa.values()), list(sb.values()))
print(f"informativeness U={res.statistic}, z={res.z:.2f}, p={res.p:.3f}, r={res.effect_size_r:.2f}")

# %%
# Themes are assigned by researchers.  Here a crude map keys on the first
# word of each label, then agreement is scored per theme.
entries = {(r.participant_id, c.label): c.label.split()[0].lower()
           for r in full.records for c in r.categories}
result = cs.apply_standardization(full, cs.StandardizationMap(entries))
print(f"{result.raw_category_count} raw categories -> {result.standardization_count} themes, "
      f"mean agreement {result.mean_agreement:.1f}%")
for theme, n in cs.theme_frequency(result.themes, min_participants=4)[:5]:
    print(f"  {theme:10s} {n} participants")
