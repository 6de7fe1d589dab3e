"""Analysis of open card sorting studies with randomised card subsets."""

__version__ = "0.1.0"

from .cluster import Clustering, ami, elbow_k, kmeans
from .cohort import (CohortSplit, PermutationBaseline, permutation_baseline, split_terciles,
                     subgroup_correlation)
from .labels import (FrequencyTable, TokenCounts, compare_word, informativeness,
                     load_frequency_table, tokenize_labels, vocab_jaccard)
from .model import (Card, Category, SortRecord, StudyData, filter_records, ingest_study,
                    load_card_set, load_example_study, write_study)
from .resample import BootstrapCurve, bootstrap_between, bootstrap_within, threshold_n
from .similarity import ExposureMatrix, SimilarityMatrix, compute_similarity, to_dissimilarity
from .simulate import SimConfig, simulate_study
from .sizing import FitResult, fit_growth, formula_sample_size, required_n
from .stats import (TestResult, chi_squared, kruskal_wallis, mann_whitney, mann_whitney_exact,
                    mantel, spearman)
from .themes import StandardizationMap, ThemeSummary, apply_standardization, theme_frequency
