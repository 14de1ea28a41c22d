"""Command-line entry point.

Subcommands: clean, sample, simulate, aggregate, reliability, split, train,
evaluate, score, study-perception, study-engagement, serve, pipeline.
Every run writes its outputs plus a manifest.json recording config, seed,
input/output content hashes, and versions. Flags override --config values.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__, _kernels, aggregate, analysis, corpus, perceiver, reliability
from .backends import get_backend
from .catalog import DIMENSIONS, Dimension, catalog_hash, default_catalog, validate_catalog


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _output_dir(args, subcommand: str) -> Path:
    if args.output:
        out = Path(args.output)
    else:
        out = Path("out") / f"{subcommand}-{time.strftime('%Y%m%d-%H%M%S')}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, subcommand: str, config: dict, seed: int,
                    inputs: dict[str, Path], info: dict | None = None) -> None:
    manifest = {
        "tool": "percept",
        "version": __version__,
        "kernel_backend": _kernels.active_backend(),
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "inputs": {name: _sha256(Path(p)) for name, p in sorted(inputs.items())},
        "outputs": {},
        "info": info or {},
    }
    produced = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    manifest["outputs"] = {str(p.relative_to(out)): _sha256(p) for p in produced}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _sample_config(config: dict, seed: int) -> corpus.SampleConfig:
    kwargs = dict(config.get("sample", {}))
    kwargs.setdefault("seed", seed)
    return corpus.SampleConfig(**kwargs)


def _train_config(config: dict, seed: int) -> perceiver.TrainConfig:
    kwargs = dict(config.get("train", {}))
    kwargs.setdefault("seed", seed)
    if "split_ratios" in kwargs:
        kwargs["split_ratios"] = tuple(kwargs["split_ratios"])
    return perceiver.TrainConfig(**kwargs)


def _generator_params(config: dict) -> corpus.GeneratorParams:
    return corpus.GeneratorParams(**config.get("generator", {}))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_clean(args, config: dict) -> int:
    out = _output_dir(args, "clean")
    raw = corpus.load_jsonl(args.input, "raw_article")
    cleaned, skipped = [], []
    for article in raw:
        try:
            cleaned.append(corpus.clean_document(article))
        except corpus.EmptyContentError:
            skipped.append(article.doc_id)
    corpus.save_jsonl(out / "documents.jsonl", cleaned)
    _write_manifest(out, "clean", config, args.seed, {"input": args.input},
                    {"cleaned": len(cleaned), "skipped_empty": skipped})
    print(f"cleaned {len(cleaned)} documents ({len(skipped)} empty skipped) -> {out}")
    return 0


def cmd_sample(args, config: dict) -> int:
    out = _output_dir(args, "sample")
    pool = corpus.load_jsonl(args.input, "document")
    sample_config = _sample_config(config, args.seed)
    result = corpus.sample_batch(pool, sample_config)
    corpus.save_jsonl(out / "sampled.jsonl", result.documents)
    _write_manifest(out, "sample", config, args.seed, {"input": args.input},
                    {"step_counts": result.step_counts, "warnings": result.warnings,
                     "sample_config": dataclasses.asdict(sample_config)})
    print(f"sampled {len(result.documents)} documents (steps {result.step_counts}) -> {out}")
    return 0


def cmd_simulate(args, config: dict) -> int:
    out = _output_dir(args, "simulate")
    docs = corpus.load_jsonl(args.input, "document")
    params = _generator_params(config)
    sim = config.get("simulate", {})
    records, participants = corpus.simulate_annotations(
        docs,
        participants=int(sim.get("participants", 40)),
        labels_per_doc=int(sim.get("labels_per_doc", 2)),
        generator_params=params,
        seed=args.seed,
    )
    corpus.save_jsonl(out / "annotations.jsonl", records)
    corpus.save_jsonl(out / "participants.jsonl", participants)
    _write_manifest(out, "simulate", config, args.seed, {"input": args.input},
                    {"records": len(records), "participants": len(participants)})
    print(f"simulated {len(records)} annotation records -> {out}")
    return 0


def cmd_aggregate(args, config: dict) -> int:
    out = _output_dir(args, "aggregate")
    records = corpus.load_jsonl(args.annotations, "annotation")
    catalog = default_catalog()
    profiles = aggregate.article_profiles_from_records(records, catalog)
    with (out / "profiles.jsonl").open("w") as fh:
        for row in aggregate.profiles_to_jsonl_dicts(profiles):
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    _write_manifest(out, "aggregate", config, args.seed,
                    {"annotations": args.annotations}, {"documents": len(profiles)})
    print(f"aggregated {len(profiles)} document profiles -> {out}")
    return 0


def cmd_reliability(args, config: dict) -> int:
    out = _output_dir(args, "reliability")
    records = corpus.load_jsonl(args.annotations, "annotation")
    catalog = default_catalog()
    report = reliability.reliability_report(records, catalog)
    (out / "reliability.csv").write_text(report.to_csv(catalog))
    (out / "reliability.json").write_text(report.to_json() + "\n")
    _write_manifest(out, "reliability", config, args.seed,
                    {"annotations": args.annotations},
                    {"mean_statement_alpha": report.mean_statement_alpha()})
    print(f"reliability report -> {out}")
    return 0


def _load_labeled(documents_path, annotations_path):
    docs = corpus.load_jsonl(documents_path, "document")
    records = corpus.load_jsonl(annotations_path, "annotation")
    catalog = default_catalog()
    return perceiver.build_labels(records, catalog, docs=docs), catalog


def cmd_split(args, config: dict) -> int:
    out = _output_dir(args, "split")
    labeled, _ = _load_labeled(args.documents, args.annotations)
    tc = _train_config(config, args.seed)
    train_set, val_set, test_set = perceiver.split_dataset(labeled, tc.split_ratios, seed=tc.seed)
    splits = {
        "train": sorted(it.doc.doc_id for it in train_set),
        "validation": sorted(it.doc.doc_id for it in val_set),
        "test": sorted(it.doc.doc_id for it in test_set),
    }
    (out / "splits.json").write_text(json.dumps(splits, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "split", config, args.seed,
                    {"documents": args.documents, "annotations": args.annotations},
                    {k: len(v) for k, v in splits.items()})
    print(f"split {sum(len(v) for v in splits.values())} docs -> {out}")
    return 0


def cmd_train(args, config: dict) -> int:
    out = _output_dir(args, "train")
    labeled, catalog = _load_labeled(args.documents, args.annotations)
    tc = _train_config(config, args.seed)
    backend = get_backend(args.backend, **config.get("backend", {}))
    train_set, val_set, test_set = perceiver.split_dataset(labeled, tc.split_ratios, seed=tc.seed)
    model = perceiver.train((train_set, val_set), tc, backend, catalog)
    model_dir = out / "model"
    perceiver.save_model(model, model_dir)
    splits = {
        "train": sorted(it.doc.doc_id for it in train_set),
        "validation": sorted(it.doc.doc_id for it in val_set),
        "test": sorted(it.doc.doc_id for it in test_set),
    }
    (model_dir / "splits.json").write_text(json.dumps(splits, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "train", config, args.seed,
                    {"documents": args.documents, "annotations": args.annotations},
                    {"best_epoch": model.best_epoch,
                     "validation_metric": model.validation_metric,
                     "backend": backend.name})
    print(f"trained model (best epoch {model.best_epoch}, "
          f"val metric {model.validation_metric:.3f}) -> {model_dir}")
    return 0


def _load_model_backend(args):
    catalog = default_catalog()
    model = perceiver.load_model(args.model, catalog)
    if model.backend_name.startswith("hashed-ngram-"):
        backend = get_backend("light", width=model.width)
    else:
        backend = get_backend("heavy")
    return model, backend, catalog


def cmd_evaluate(args, config: dict) -> int:
    out = _output_dir(args, "evaluate")
    labeled, catalog = _load_labeled(args.documents, args.annotations)
    model, backend, _ = _load_model_backend(args)
    splits_path = Path(args.model) / "splits.json"
    if splits_path.exists():
        test_ids = set(json.loads(splits_path.read_text())["test"])
        items = [it for it in labeled if it.doc.doc_id in test_ids]
    else:
        items = labeled
    evaluation = perceiver.evaluate(model, items, catalog, backend)
    (out / "evaluation.csv").write_text(perceiver.evaluation_to_csv(evaluation))
    _write_manifest(out, "evaluate", config, args.seed,
                    {"documents": args.documents, "annotations": args.annotations},
                    {"overall": evaluation["overall"], "n": evaluation["n"]})
    overall = evaluation["overall"]
    print(f"evaluation overall r = {overall if overall is None else round(overall, 4)} -> {out}")
    return 0


def cmd_score(args, config: dict) -> int:
    out = _output_dir(args, "score")
    docs = corpus.load_jsonl(args.input, "document")
    model, backend, catalog = _load_model_backend(args)
    with (out / "scores.jsonl").open("w") as fh:
        for doc in docs:
            statement_scores, profile = perceiver.predict(model, doc, catalog, backend)
            fh.write(json.dumps({
                "doc_id": doc.doc_id,
                "statement_scores": statement_scores.scores,
                "profile": {d.value: s for d, s in profile.scores.items()},
            }, sort_keys=True) + "\n")
    _write_manifest(out, "score", config, args.seed, {"input": args.input},
                    {"documents": len(docs)})
    print(f"scored {len(docs)} documents -> {out}")
    return 0


def _mixed_result_rows(dimension: str, result) -> list[str]:
    rows = []
    for term in result.coefficients:
        rows.append(
            f"{dimension},{term},{result.coefficients[term]:.10g},"
            f"{result.std_errors[term]:.10g},{result.statistics[term]:.10g},"
            f"{result.p_values[term]:.10g}"
        )
    return rows


def cmd_study_perception(args, config: dict) -> int:
    out = _output_dir(args, "study-perception")
    records = corpus.load_jsonl(args.annotations, "annotation")
    participants = corpus.load_jsonl(args.participants, "participant")
    docs = corpus.load_jsonl(args.documents, "document")
    catalog = default_catalog()
    lines = ["dimension,term,estimate,std_error,statistic,p_value"]
    variances = {}
    for dim in DIMENSIONS:
        result = analysis.perception_outcome_study(records, participants, docs, dim, catalog)
        lines.extend(_mixed_result_rows(dim.value, result))
        variances[dim.value] = {
            "random_intercept_variance": result.random_intercept_variance,
            "residual_variance": result.residual_variance,
            "converged": result.converged,
        }
    (out / "perception_study.csv").write_text("\n".join(lines) + "\n")
    (out / "perception_study.json").write_text(json.dumps(variances, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "study-perception", config, args.seed,
                    {"annotations": args.annotations, "participants": args.participants,
                     "documents": args.documents}, {})
    print(f"perception-outcome study (12 dimensions) -> {out}")
    return 0


def cmd_study_engagement(args, config: dict) -> int:
    out = _output_dir(args, "study-engagement")
    posts = corpus.load_jsonl(args.posts, "post")
    dataset = analysis.build_url_groups(posts)
    inputs = {"posts": args.posts}
    if args.model:
        model, backend, catalog = _load_model_backend(args)
        kept = {r.post_id for r in dataset.rows}
        profiles = analysis.score_posts([p for p in posts if p.post_id in kept], model, catalog, backend)
    else:
        raise SystemExit("study-engagement requires --model to estimate post perceptions")
    dataset = analysis.attach_profiles(dataset, profiles)
    threshold = float(config.get("study", {}).get("vif_threshold", 5.0))
    study = analysis.engagement_study(dataset, prune_threshold=threshold)

    lines = ["outcome,term,estimate,std_error,statistic,p_value"]
    for outcome, result in study.results.items():
        lines.extend(_mixed_result_rows(outcome, result))
    (out / "engagement_study.csv").write_text("\n".join(lines) + "\n")
    (out / "engagement_study.json").write_text(
        json.dumps(study.manifest(), indent=2, sort_keys=True) + "\n")
    predictors = [
        analysis.fit_engagement_predictor(study, outcome, provenance="cli-study").to_dict()
        for outcome in study.results
    ]
    (out / "predictor.json").write_text(json.dumps(predictors, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "study-engagement", config, args.seed, inputs,
                    {"rows": len(dataset.rows),
                     "retained": [d.value for d in study.retained_dimensions],
                     "transforms": dataset.metadata,
                     "vif_threshold": threshold})
    print(f"engagement study ({len(dataset.rows)} rows, "
          f"retained {[d.value for d in study.retained_dimensions]}) -> {out}")
    return 0


def cmd_serve(args, config: dict) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(model_dir=args.model, predictor_path=args.predictor,
                     max_text_bytes=int(config.get("service", {}).get("max_text_bytes", 262144)))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_pipeline(args, config: dict) -> int:
    if not args.synthetic:
        raise SystemExit("pipeline currently supports --synthetic runs only")
    out = _output_dir(args, "pipeline")
    seed = args.seed
    catalog = default_catalog()
    assert not validate_catalog(catalog)

    t0 = time.time()
    pool_cfg = config.get("synthetic_pool", {})
    raw, latents = corpus.synthetic_pool(
        seed=seed,
        papers_all_three=int(pool_cfg.get("papers_all_three", 30)),
        papers_pr_scitech=int(pool_cfg.get("papers_pr_scitech", 30)),
        papers_pr_general=int(pool_cfg.get("papers_pr_general", 30)),
        papers_other=int(pool_cfg.get("papers_other", 20)),
    )
    corpus.save_jsonl(out / "raw_articles.jsonl", raw)
    cleaned = [corpus.clean_document(a) for a in raw]
    corpus.save_jsonl(out / "documents.jsonl", cleaned)

    sample_config = corpus.SampleConfig(
        papers_per_coverage_setting=12, extra_per_outlet_type=8,
        domain_upsample={"Social Science": 5, "Humanities": 5, "Engineering": 8},
        popularity_threshold=30, popularity_upsample=5, seed=seed,
    )
    if "sample" in config:
        sample_config = _sample_config(config, seed)
    sampled = corpus.sample_batch(cleaned, sample_config)
    corpus.save_jsonl(out / "sampled.jsonl", sampled.documents)

    params = corpus.GeneratorParams(latent_means=latents, noise_scale=0.5, bias_scale=0.2)
    records, participants = corpus.simulate_annotations(
        sampled.documents, participants=30, labels_per_doc=2,
        generator_params=params, seed=seed,
    )
    corpus.save_jsonl(out / "annotations.jsonl", records)
    corpus.save_jsonl(out / "participants.jsonl", participants)

    profiles = aggregate.article_profiles_from_records(records, catalog)
    with (out / "profiles.jsonl").open("w") as fh:
        for row in aggregate.profiles_to_jsonl_dicts(profiles):
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    report = reliability.reliability_report(records, catalog)
    (out / "reliability.csv").write_text(report.to_csv(catalog))
    (out / "reliability.json").write_text(report.to_json() + "\n")

    labeled = perceiver.build_labels(records, catalog, docs=sampled.documents)
    tc = perceiver.TrainConfig(seed=seed)
    if "train" in config:
        tc = _train_config(config, seed)
    backend = get_backend("light", width=int(config.get("backend", {}).get("width", 256)))
    train_set, val_set, test_set = perceiver.split_dataset(labeled, tc.split_ratios, seed=seed)
    model = perceiver.train((train_set, val_set), tc, backend, catalog)
    perceiver.save_model(model, out / "model")

    evaluation = perceiver.evaluate(model, test_set, catalog, backend)
    (out / "evaluation.csv").write_text(perceiver.evaluation_to_csv(evaluation))

    study_dims = [Dimension.NEWSWORTHINESS, Dimension.IMPORTANCE, Dimension.FUN]
    lines = ["dimension,term,estimate,std_error,statistic,p_value"]
    for dim in study_dims:
        result = analysis.perception_outcome_study(records, participants, sampled.documents, dim, catalog)
        lines.extend(_mixed_result_rows(dim.value, result))
    (out / "perception_study.csv").write_text("\n".join(lines) + "\n")

    posts, _ = analysis.synthetic_posts(
        n_urls=60, posts_per_url=3, seed=seed,
        planted={Dimension.IMPORTANCE: 0.5, Dimension.EXPERTISE: -0.2},
        marker_titles=True,
    )
    corpus.save_jsonl(out / "posts.jsonl", posts)
    dataset = analysis.build_url_groups(posts)
    kept = {r.post_id for r in dataset.rows}
    estimated = analysis.score_posts([p for p in posts if p.post_id in kept], model, catalog, backend)
    dataset = analysis.attach_profiles(dataset, estimated)
    study = analysis.engagement_study(dataset, prune_threshold=5.0)
    (out / "engagement_study.json").write_text(
        json.dumps(study.manifest(), indent=2, sort_keys=True) + "\n")
    predictors = [
        analysis.fit_engagement_predictor(study, outcome, provenance=f"pipeline-seed{seed}").to_dict()
        for outcome in study.results
    ]
    (out / "predictor.json").write_text(json.dumps(predictors, indent=2, sort_keys=True) + "\n")

    _write_manifest(out, "pipeline", config, seed, {},
                    {"documents": len(sampled.documents), "records": len(records),
                     "catalog_hash": catalog_hash(catalog),
                     "evaluation_overall": evaluation["overall"],
                     "retained": [d.value for d in study.retained_dimensions]})
    print(f"pipeline complete in {time.time() - t0:.1f}s -> {out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="percept",
                                     description="science-media perception toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", default=None, help="output directory (default: timestamped under out/)")

    p = sub.add_parser("clean", help="clean raw articles into documents")
    common(p); p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("sample", help="four-step balanced sampling")
    common(p); p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="generate synthetic annotations for documents")
    common(p); p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("aggregate", help="aggregate annotations into document profiles")
    common(p); p.add_argument("--annotations", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("reliability", help="Krippendorff/Cronbach reliability report")
    common(p); p.add_argument("--annotations", required=True)
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("split", help="deterministic train/validation/test split")
    common(p)
    p.add_argument("--documents", required=True)
    p.add_argument("--annotations", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train the perception scorer")
    common(p)
    p.add_argument("--documents", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--backend", choices=["light", "heavy"], default="light")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained model")
    common(p)
    p.add_argument("--documents", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("score", help="score documents with a trained model")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("study-perception", help="background factors -> perception study")
    common(p)
    p.add_argument("--annotations", required=True)
    p.add_argument("--participants", required=True)
    p.add_argument("--documents", required=True)
    p.set_defaults(func=cmd_study_perception)

    p = sub.add_parser("study-engagement", help="perceptions -> engagement study")
    common(p)
    p.add_argument("--posts", required=True)
    p.add_argument("--model", default=None)
    p.set_defaults(func=cmd_study_engagement)

    p = sub.add_parser("serve", help="run the scoring service")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--predictor", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("pipeline", help="end-to-end synthetic demo run")
    common(p)
    p.add_argument("--synthetic", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config)
    try:
        return args.func(args, config)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"percept {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
