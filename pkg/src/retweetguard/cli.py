"""Command-line entry point.

Subcommands cover the full pipeline: validate a corpus, extract the
feature matrix, train and serialize models, cross-validate, rank feature
importance, score users, analyze retweet threads, re-rank popularity
after customer filtering, synthesize corpora, and run the HTTP service.

Exit codes: 0 success, 1 I/O or validation failure, 2 usage error.
Every stochastic step is driven by --seed, so repeating an invocation
with the same inputs and seed rewrites outputs byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import analysis, evaluation, synth
from .corpus import (
    CorpusError,
    FOUR_CLASSES,
    FileScoreProvider,
    GENUINE,
    attach_scores,
    format_timestamp,
    load_corpus,
    load_labels,
    save_corpus,
    save_labels,
)
from .features import ExtractionConfig, build_dataset, extract_matrix, save_feature_matrix
from .models import KINDS, ModelFileError, ModelSpec, load_model, save_model
from .service import create_app, load_service_config, service_from_config


def _parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"expected name=value, got {pair!r}")
        name, raw = pair.split("=", 1)
        try:
            value = int(raw)
        except ValueError:
            value = float(raw)
        out[name.strip()] = value
    return out


def _spec_from_args(args) -> ModelSpec:
    return ModelSpec(kind=args.kind, class_mode=args.mode,
                     random_seed=args.seed,
                     hyperparameters=_parse_overrides(args.set))


def _load_corpus_with_scores(args):
    corpus = load_corpus(args.corpus)
    if getattr(args, "scores", None):
        corpus = attach_scores(corpus, FileScoreProvider(args.scores))
    return corpus


def _write_or_print(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_ingest(args) -> int:
    corpus = _load_corpus_with_scores(args)
    labels = load_labels(args.labels, corpus) if args.labels else None
    print(f"corpus ok: {len(corpus.records)} users, "
          f"snapshot {format_timestamp(corpus.snapshot_time)}")
    if labels is not None:
        counts = ", ".join(f"{k}={v}" for k, v in sorted(labels.counts().items()))
        print(f"labels ok: {len(labels)} users ({counts})")
    return 0


def cmd_extract(args) -> int:
    corpus = _load_corpus_with_scores(args)
    cfg = ExtractionConfig(snapshot_time=corpus.snapshot_time)
    ids, X, _ = extract_matrix(list(corpus.records), cfg)
    save_feature_matrix(args.out, ids, X)
    print(f"wrote {len(ids)}x{X.shape[1]} matrix to {args.out}")
    return 0


def cmd_train(args) -> int:
    corpus = _load_corpus_with_scores(args)
    labels = load_labels(args.labels, corpus)
    spec = _spec_from_args(args)
    dataset = build_dataset(corpus, labels, mode=spec.class_mode)
    # snapshot time as trained_at keeps retraining runs reproducible
    model = evaluation.fit_on_dataset(
        spec, dataset, trained_at=format_timestamp(corpus.snapshot_time))
    save_model(model, args.out)
    print(f"trained {spec.kind} ({spec.class_mode}) on {len(dataset)} users "
          f"-> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    corpus = _load_corpus_with_scores(args)
    labels = load_labels(args.labels, corpus)
    spec = _spec_from_args(args)
    dataset = build_dataset(corpus, labels, mode=spec.class_mode)
    report = evaluation.cross_validate(spec, dataset, k=args.folds)
    if args.out:
        evaluation.save_report(report, args.out)
    _write_or_print(evaluation.format_report_table(report), args.table)
    return 0


def cmd_importance(args) -> int:
    corpus = _load_corpus_with_scores(args)
    labels = load_labels(args.labels, corpus)
    spec = ModelSpec(kind="linear_svm", class_mode="binary",
                     random_seed=args.seed)
    dataset = build_dataset(corpus, labels, mode="binary")
    rows = evaluation.single_feature_importance(dataset, spec=spec,
                                                k=args.folds)
    evaluation.save_importance_csv(rows, args.out)
    top = ", ".join(f"{name}={value:.3f}" for name, value in rows[:5])
    print(f"wrote {len(rows)} rows to {args.out}; top: {top}")
    return 0


def cmd_score(args) -> int:
    model = load_model(args.model)
    corpus = _load_corpus_with_scores(args)
    from .service import ScoringService, ThreadStoreFetcher
    from .corpus import LabelMap

    fetcher = None
    if args.threads:
        fetcher = ThreadStoreFetcher(analysis.load_threads(args.threads))
    service = ScoringService(corpus=corpus, base_labels=LabelMap(),
                             model=model, tweet_fetcher=fetcher)
    user_ids = args.users.split(",") if args.users else None
    results = service.score(user_ids=user_ids, tweet_ref=args.tweet,
                            class_mode=args.mode)
    lines = []
    for item in results:
        if "error" in item:
            lines.append(f"{item['user_id']}\t-\t-\t{item['error']}")
        else:
            lines.append(f"{item['user_id']}\t{item['label']}"
                         f"\t{item['confidence']!r}\t-")
    _write_or_print("user_id\tlabel\tconfidence\terror\n"
                    + "\n".join(lines) + "\n", args.out)
    return 0


def cmd_rerank(args) -> int:
    threads = analysis.load_threads(args.threads)
    customers = set()
    with open(args.customers, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                customers.add(parts[0])
            elif parts[1] != GENUINE:  # labels file: keep customer classes
                customers.add(parts[0])
    tweets = [(t.tweet_id, t.retweeter_ids, t.declared_count) for t in threads]
    flow = analysis.filter_and_rebin(tweets, customers)
    analysis.save_flow_csv(flow, args.out)
    print(f"{flow.total} tweets binned; removed retweets from "
          f"{len(customers)} customers -> {args.out}")
    return 0


def cmd_threads(args) -> int:
    threads = analysis.load_threads(args.threads)
    rows = analysis.thread_stats_rows(threads)
    lines = ["tweet_id,events,declared_count,lifespan_seconds,"
             "inter_arrival_mad_seconds"]
    for row in rows:
        lifespan = "" if row["lifespan_seconds"] is None else repr(row["lifespan_seconds"])
        mad = "" if row["inter_arrival_mad_seconds"] is None else repr(row["inter_arrival_mad_seconds"])
        lines.append(f"{row['tweet_id']},{row['events']},"
                     f"{row['declared_count']},{lifespan},{mad}")
    _write_or_print("\n".join(lines) + "\n", args.out)
    if args.heatmap:
        grid, n = analysis.heatmap_bins(threads)
        analysis.save_heatmap_csv(grid, args.heatmap)
        print(f"heatmap over {n} threads -> {args.heatmap}")
    return 0


def cmd_synth(args) -> int:
    if args.presets:
        presets, span_days = synth.load_presets(args.presets)
        if args.span_days is not None:
            span_days = args.span_days
    else:
        pairs = []
        for item in args.preset or ["genuine=100", "promotional=100"]:
            label, _, count = item.partition("=")
            if label not in FOUR_CLASSES:
                raise ValueError(f"preset label must be one of {FOUR_CLASSES}")
            pairs.append((synth.DEFAULT_PRESETS[label](), int(count or 100)))
        presets = pairs
        span_days = args.span_days if args.span_days is not None else 60
    corpus, labels = synth.generate(presets, span_days=span_days,
                                    seed=args.seed)
    save_corpus(corpus, args.out)
    if args.labels_out:
        save_labels(labels, args.labels_out)
    print(f"wrote {len(corpus.records)} users to {args.out}")
    return 0


def cmd_serve(args) -> int:
    config = load_service_config(args.config)
    if args.host:
        config = dataclasses.replace(config, host=args.host)
    if args.port:
        config = dataclasses.replace(config, port=args.port)
    service = service_from_config(config)
    app = create_app(service, cors_origins=config.cors_origins)
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retweetguard",
        description="Collusive-retweeter detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=7,
                       help="seed for every stochastic step")
        return p

    p = add("ingest", cmd_ingest, "validate a corpus and optional labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels")
    p.add_argument("--scores", help="user_id<TAB>bot<TAB>influence file")

    p = add("extract", cmd_extract, "write the 64-column feature matrix")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scores")
    p.add_argument("--out", required=True)

    for name, func, help_text in (
            ("train", cmd_train, "fit a model and save it"),
            ("evaluate", cmd_evaluate, "stratified 10-fold CV report")):
        p = add(name, func, help_text)
        p.add_argument("--corpus", required=True)
        p.add_argument("--labels", required=True)
        p.add_argument("--scores")
        p.add_argument("--kind", default="linear_svm",
                       help=f"one of {', '.join(KINDS)}")
        p.add_argument("--mode", default="binary",
                       choices=["binary", "four_class"])
        p.add_argument("--set", action="append", metavar="NAME=VALUE",
                       help="hyperparameter override, repeatable")
        if name == "train":
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--folds", type=int, default=10)
            p.add_argument("--out", help="JSON report path")
            p.add_argument("--table", help="TSV table path (default stdout)")

    p = add("importance", cmd_importance,
            "per-feature, per-family, and all-feature linear SVM F1")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--scores")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out", required=True)

    p = add("score", cmd_score, "label users with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--scores")
    p.add_argument("--users", help="comma-separated user ids")
    p.add_argument("--tweet", help="tweet id resolved via --threads")
    p.add_argument("--threads", help="thread store for --tweet")
    p.add_argument("--mode", choices=["binary", "four_class"])
    p.add_argument("--out")

    p = add("rerank", cmd_rerank, "customer-filtered popularity flow matrix")
    p.add_argument("--threads", required=True)
    p.add_argument("--customers", required=True,
                   help="user ids, one per line, or a labels TSV")
    p.add_argument("--out", required=True)

    p = add("threads", cmd_threads, "per-thread lifespan and inter-arrival MAD")
    p.add_argument("--threads", required=True)
    p.add_argument("--out")
    p.add_argument("--heatmap", help="also write the log-binned 2-D grid")

    p = add("synth", cmd_synth, "generate a labeled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out")
    p.add_argument("--presets", help="JSON preset file")
    p.add_argument("--preset", action="append", metavar="LABEL=COUNT",
                   help="built-in preset with a count, repeatable")
    p.add_argument("--span-days", type=int, default=None)

    p = add("serve", cmd_serve, "run the HTTP scoring service")
    p.add_argument("--config", help="JSON service config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, ModelFileError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
