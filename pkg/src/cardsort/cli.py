"""Command line interface for card sorting analyses.

Every analysis subcommand writes a JSON report (stdout, or ``--report``)
and tabular artifacts as CSV.  Exit codes: 0 success, 1 invalid data,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import ami, elbow_from_curve, inertia_curve, kmeans
from .cohort import cohort_report
from .errors import CardSortError
from .labels import (compare_word, informativeness_scores, load_frequency_table,
                     tokenize_labels, vocab_jaccard, write_counts_csv)
from .model import ingest_study, write_study
from .resample import (bootstrap_between, bootstrap_within, read_curves_csv, threshold_n,
                       write_curves_csv)
from .similarity import (compute_similarity, to_dissimilarity, write_heatmap_svg,
                         write_similarity_csv)
from .simulate import SimConfig, simulate_study
from .sizing import FAMILIES, fit_growth, formula_sample_size, required_n
from .stats import mann_whitney, mantel
from .themes import apply_standardization, read_standardization_csv, theme_frequency, \
    write_themes_csv


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(float(obj)) else float(obj)
    return obj


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _report(args, sections: dict, inputs=(), seed=None) -> None:
    doc = {
        "tool_version": __version__,
        "command": args.command,
        "seed": seed,
        "inputs": {str(p): _digest(p) for p in inputs},
        "sections": sections,
    }
    text = json.dumps(_clean(doc), indent=2) + "\n"
    if getattr(args, "report", None):
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path, fmt=None):
    return ingest_study(path, fmt)


def _k_bounds(m, k_min, k_max):
    return max(1, k_min), min(m, k_max)


def _clustering(sim, impute, k_min, k_max, seed, restarts, k=None):
    feats = to_dissimilarity(sim, impute)
    curve = None
    if k is None:
        lo, hi = _k_bounds(sim.size, k_min, k_max)
        ks = list(range(lo, hi + 1))
        curve = dict(zip(ks, inertia_curve(feats, ks, seed, restarts).tolist()))
        k = elbow_from_curve(ks, list(curve.values()))
    return kmeans(feats, k, seed=seed, restarts=restarts, card_ids=sim.card_ids), curve


# -- subcommands -------------------------------------------------------------

def cmd_simmatrix(args):
    data = _load(args.study, args.format)
    sim, exp = compute_similarity(data)
    write_similarity_csv(sim, args.out, exp, args.exposure_out)
    if args.heatmap:
        write_heatmap_svg(sim, args.heatmap, labels=[c.label for c in data.cards])
    iu = np.triu_indices(sim.size, k=1)
    _report(args, {"similarity": {
        "module": "similarity", "condition": data.condition_name, "n_cards": data.n_cards,
        "n_records": data.n_records, "undefined_pairs": int(np.isnan(sim.values[iu]).sum()),
        "mean_similarity": float(np.nanmean(sim.values[iu])) if iu[0].size else None,
        "min_exposure": int(exp.counts[iu].min()) if iu[0].size else 0,
    }}, [args.study])


def cmd_cluster(args):
    data = _load(args.study, args.format)
    sim, _ = compute_similarity(data)
    clus, curve = _clustering(sim, args.impute, args.k_min, args.k_max, args.seed, args.restarts,
                              args.k)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["card_id", "cluster"])
            for cid in data.card_ids:
                w.writerow([cid, clus.assignment[cid]])
    _report(args, {"cluster": {
        "module": "cluster", "k": clus.k, "inertia": clus.inertia, "impute": args.impute,
        "elbow_curve": curve, "clusters": clus.groups(),
    }}, [args.study], args.seed)


def cmd_compare(args):
    a = _load(args.first, args.format)
    b = _load(args.second, args.format)
    sa, _ = compute_similarity(a)
    sb, _ = compute_similarity(b)
    if tuple(sa.card_ids) != tuple(sb.card_ids):
        sb = sb.reorder(sa.card_ids) if set(sa.card_ids) == set(sb.card_ids) else sb
    res = mantel(sa, sb, permutations=args.permutations, seed=args.seed)
    ca, _ = _clustering(sa, args.impute, args.k_min, args.k_max, args.seed, args.restarts)
    cb, _ = _clustering(sb, args.impute, args.k_min, args.k_max, args.seed, args.restarts)
    _report(args, {
        "mantel": {"module": "stats", **res.to_dict(), "permutations": args.permutations},
        "ami": {"module": "cluster", "ami": ami(ca, cb), "k_first": ca.k, "k_second": cb.k},
    }, [args.first, args.second], args.seed)


def _curve_section(curves, targets):
    out = {}
    for metric, curve in curves.items():
        out[metric] = {
            "module": "resample", "mode": curve.mode,
            "points": [{"n": p.n, "mean": p.mean, "sd": p.sd, "iterations_used": p.iterations_used}
                       for p in curve.points],
            "threshold_n": {str(t): threshold_n(curve, t) for t in targets},
        }
    return out


def cmd_bootstrap(args):
    data = _load(args.study, args.format)
    n_max = args.n_max if args.n_max is not None else data.n_records
    ns = range(args.n_min, n_max + 1)
    common = dict(n_values=ns, max_iterations=args.max_iterations, stop_delta=args.stop_delta,
                  seed=args.seed, metrics=args.metrics, impute=args.impute,
                  k_range=(args.k_min, args.k_max), restarts=args.restarts, threads=args.threads)
    inputs = [args.study]
    if args.reference:
        ref, _ = compute_similarity(_load(args.reference, args.format))
        curves = bootstrap_between(data, ref, **common)
        inputs.append(args.reference)
    else:
        curves = bootstrap_within(data, **common)
    if args.out:
        write_curves_csv(curves.values(), args.out)
    _report(args, _curve_section(curves, args.targets), inputs, args.seed)


def cmd_fit(args):
    curves = read_curves_csv(args.curve)
    if args.metric not in curves:
        raise CardSortError(f"curve file has no metric {args.metric!r}")
    fits = fit_growth(curves[args.metric].as_pairs(), args.families, args.min_n,
                      threads=args.threads)
    _report(args, {"fit": {
        "module": "sizing", "metric": args.metric, "min_n": args.min_n, "target": args.target,
        "families": [{**f.to_dict(), "required_n": required_n(f, args.target)} for f in fits],
    }}, [args.curve])


def cmd_samplesize(args):
    print(formula_sample_size(args.full, args.subset))


def cmd_cohort(args):
    data = _load(args.study, args.format)
    sections = {}
    for cov in args.covariate:
        sec = cohort_report(data, cov, args.permutations, args.mantel_permutations, args.seed,
                            threads=args.threads)
        sections[cov] = {"module": "cohort", **sec}
    _report(args, sections, [args.study], args.seed)


def cmd_labels(args):
    studies = [_load(p, args.format) for p in args.study]
    freq = load_frequency_table(args.freq, args.default_zipf)
    counts = [tokenize_labels(s) for s in studies]
    if args.counts_out:
        stem = Path(args.counts_out)
        for i, c in enumerate(counts):
            path = stem if len(counts) == 1 else stem.with_name(f"{stem.stem}.{i + 1}{stem.suffix}")
            write_counts_csv(c, path)
    sections = {}
    scores = []
    for s, c in zip(studies, counts):
        sc = informativeness_scores(s, freq)
        scores.append(list(sc.values()))
        sections[s.condition_name or f"study{len(sections) + 1}"] = {
            "module": "labels", "total_tokens": c.total_tokens, "vocabulary": len(c.vocabulary),
            "top_words": [{"word": w, "count": n} for w, n in c.most_common(args.top)],
            "informativeness": {"mean": float(np.mean(list(sc.values()))) if sc else None,
                                "per_participant": sc},
        }
    if len(counts) == 2:
        a, b = counts
        words = args.words or sorted(a.vocabulary | b.vocabulary)
        comparisons = {}
        for w in words:
            try:
                comparisons[w] = {"count_first": a.counts.get(w, 0),
                                  "count_second": b.counts.get(w, 0),
                                  **compare_word(w, a, b).to_dict()}
            except CardSortError as exc:
                comparisons[w] = {"error": str(exc)}
        comp = {"module": "labels", "jaccard": vocab_jaccard(a, b), "words": comparisons}
        if scores[0] and scores[1]:
            comp["informativeness_test"] = mann_whitney(scores[0], scores[1]).to_dict()
        sections["comparison"] = comp
    _report(args, sections, args.study)


def cmd_themes(args):
    data = _load(args.study, args.format)
    mapping = read_standardization_csv(args.map, args.policy)
    res = apply_standardization(data, mapping)
    if args.out:
        write_themes_csv(res.themes, args.out)
    _report(args, {"themes": {
        "module": "themes", "raw_category_count": res.raw_category_count,
        "standardization_count": res.standardization_count,
        "mean_agreement": res.mean_agreement, "unstandardized_count": res.unstandardized_count,
        "themes": [{"theme": t.theme, "m": t.m, "r": t.r, "agreement": t.agreement}
                   for t in res.themes],
        "frequency": [{"theme": t, "participants": r}
                      for t, r in theme_frequency(res.themes, args.threshold)],
    }}, [args.study, args.map])


def cmd_simulate(args):
    cfg = SimConfig(args.cards, args.themes, args.subset if args.subset else args.cards, args.n,
                    args.epsilon, args.split_prob, args.seed)
    sim = simulate_study(cfg)
    out = Path(args.out)
    write_study(sim.study, out)
    truth = Path(args.truth_out) if args.truth_out else out.with_name(f"{out.stem}.truth.json")
    truth.write_text(json.dumps(sim.ground_truth_doc(), indent=2) + "\n", encoding="utf-8")


# -- parser ------------------------------------------------------------------

def _seeded(p):
    p.add_argument("--seed", type=int, default=0, help="non-negative random seed (default 0)")


def _clustered(p):
    p.add_argument("--impute", type=float, default=0.0,
                   help="similarity assumed for never co-shown pairs (default 0)")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--restarts", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cardsort", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    def common(p, report=True):
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="study file format (default: from suffix)")
        if report:
            p.add_argument("--report", help="write the JSON report here instead of stdout")

    p = add("simmatrix", cmd_simmatrix, "similarity and exposure matrices as CSV")
    p.add_argument("study")
    p.add_argument("--out", required=True)
    p.add_argument("--exposure-out")
    p.add_argument("--heatmap", help="also write a grayscale SVG heatmap")
    common(p)

    p = add("cluster", cmd_cluster, "k-means clustering of cards, k by the elbow rule")
    p.add_argument("study")
    p.add_argument("--k", type=int, help="fixed k (skips the elbow search)")
    p.add_argument("--out", help="CSV of card_id,cluster")
    _clustered(p)
    _seeded(p)
    common(p)

    p = add("compare", cmd_compare, "Mantel test and AMI between two conditions")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--permutations", type=int, default=9999)
    _clustered(p)
    _seeded(p)
    common(p)

    p = add("bootstrap", cmd_bootstrap, "agreement versus sample size by subsampling")
    p.add_argument("study")
    p.add_argument("--reference", help="compare against this study's complete sample")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int)
    p.add_argument("--max-iterations", type=int, default=20)
    p.add_argument("--stop-delta", type=float, default=0.001)
    p.add_argument("--metrics", nargs="+", choices=("mantel_r", "ami"),
                   default=["mantel_r", "ami"])
    p.add_argument("--targets", nargs="+", type=float, default=[0.9, 0.95])
    p.add_argument("--out", help="curve CSV (metric,n,mean,sd,iterations_used)")
    p.add_argument("--threads", type=int, default=1)
    _clustered(p)
    _seeded(p)
    common(p)

    p = add("fit", cmd_fit, "fit growth curves to a bootstrap curve and extrapolate")
    p.add_argument("--curve", required=True)
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--metric", default="mantel_r")
    p.add_argument("--min-n", type=float, default=10)
    p.add_argument("--families", nargs="+", choices=sorted(FAMILIES))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report")

    p = add("samplesize", cmd_samplesize, "participants needed for a given subset size")
    p.add_argument("--full", type=int, required=True, help="cards in the full set")
    p.add_argument("--subset", type=int, required=True, help="cards shown to each participant")

    p = add("cohort", cmd_cohort, "low vs high tercile comparison against random splits")
    p.add_argument("study")
    p.add_argument("--covariate", nargs="+", required=True)
    p.add_argument("--permutations", type=int, default=20, help="random baseline draws")
    p.add_argument("--mantel-permutations", type=int, default=999)
    p.add_argument("--threads", type=int, default=1)
    _seeded(p)
    common(p)

    p = add("labels", cmd_labels, "word counts, overlap and informativeness of labels")
    p.add_argument("study", nargs="+")
    p.add_argument("--freq", help="word<TAB>zipf table (default: $CARDSORT_FREQ_TABLE or bundled)")
    p.add_argument("--default-zipf", type=float, default=1.0)
    p.add_argument("--words", nargs="+", help="words to compare (default: whole vocabulary)")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--counts-out")
    common(p)

    p = add("themes", cmd_themes, "apply a theme map and score agreement")
    p.add_argument("study")
    p.add_argument("--map", required=True, help="CSV participant_id,raw_label,theme")
    p.add_argument("--policy", choices=("unstandardized", "error"), default="unstandardized")
    p.add_argument("--threshold", type=int, default=None,
                   help="minimum contributing participants in the frequency listing")
    p.add_argument("--out")
    common(p)

    p = add("simulate", cmd_simulate, "generate a synthetic study with known themes")
    p.add_argument("--cards", type=int, default=50)
    p.add_argument("--themes", type=int, default=6)
    p.add_argument("--subset", type=int, default=None, help="cards shown (default: all)")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--split-prob", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out")
    _seeded(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is not None and getattr(args, "seed", 0) < 0:
        parser.error("--seed must be non-negative")
    try:
        args.func(args)
    except ValueError as exc:  # CardSortError and bad parameter values
        print(f"cardsort {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
