import json
import subprocess
import sys

import pytest

from percept import corpus
from percept.cli import main


def _run(args):
    return main(args)


@pytest.fixture(scope="module")
def pool_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "raw.jsonl"
    raw, _ = corpus.synthetic_pool(seed=1, papers_all_three=20, papers_pr_scitech=20,
                                   papers_pr_general=20, papers_other=10)
    corpus.save_jsonl(path, raw)
    return path


def test_clean_subcommand(pool_file, tmp_path):
    out = tmp_path / "cleaned"
    assert _run(["clean", "--input", str(pool_file), "--output", str(out)]) == 0
    docs = corpus.load_jsonl(out / "documents.jsonl", "document")
    assert docs
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "clean"
    assert "documents.jsonl" in manifest["outputs"]
    assert manifest["inputs"]["input"]


def test_sample_subcommand_with_config(pool_file, tmp_path):
    cleaned = tmp_path / "cleaned"
    _run(["clean", "--input", str(pool_file), "--output", str(cleaned)])
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"sample": {
        "papers_per_coverage_setting": 5, "extra_per_outlet_type": 4,
        "domain_upsample": {"Engineering": 3}, "popularity_upsample": 2,
    }}))
    out = tmp_path / "sampled"
    rc = _run(["sample", "--input", str(cleaned / "documents.jsonl"),
               "--config", str(config), "--seed", "3", "--output", str(out)])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["info"]["step_counts"] == [35, 12, 3, 2]
    assert (out / "sampled.jsonl").exists()


def test_unknown_subcommand_nonzero():
    proc = subprocess.run([sys.executable, "-m", "percept.cli", "frobnicate"],
                          capture_output=True, text=True)
    assert proc.returncode != 0
    assert "usage" in proc.stderr.lower()


def test_unknown_flag_nonzero_with_usage():
    proc = subprocess.run([sys.executable, "-m", "percept.cli", "clean", "--nope", "x"],
                          capture_output=True, text=True)
    assert proc.returncode != 0
    assert "usage" in proc.stderr.lower()


def test_missing_input_clean_error(tmp_path):
    rc = _run(["clean", "--input", str(tmp_path / "absent.jsonl"), "--output", str(tmp_path / "o")])
    assert rc == 1


def test_pipeline_twice_byte_identical(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert _run(["pipeline", "--synthetic", "--seed", "7", "--output", str(out1)]) == 0
    assert _run(["pipeline", "--synthetic", "--seed", "7", "--output", str(out2)]) == 0
    files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
    assert files1 == files2
    for rel in files1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel


def test_pipeline_different_seed_differs(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    _run(["pipeline", "--synthetic", "--seed", "7", "--output", str(out1)])
    _run(["pipeline", "--synthetic", "--seed", "8", "--output", str(out2)])
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["outputs"] != m2["outputs"]


def test_train_evaluate_score_flow(tmp_path):
    pipe = tmp_path / "pipe"
    _run(["pipeline", "--synthetic", "--seed", "2", "--output", str(pipe)])
    config = tmp_path / "t.json"
    config.write_text(json.dumps({"train": {"epochs": 2}, "backend": {"width": 128}}))
    out = tmp_path / "trained"
    rc = _run(["train", "--documents", str(pipe / "sampled.jsonl"),
               "--annotations", str(pipe / "annotations.jsonl"),
               "--config", str(config), "--seed", "1", "--output", str(out)])
    assert rc == 0
    assert (out / "model" / "metadata.json").exists()
    assert (out / "model" / "splits.json").exists()

    ev = tmp_path / "eval"
    rc = _run(["evaluate", "--documents", str(pipe / "sampled.jsonl"),
               "--annotations", str(pipe / "annotations.jsonl"),
               "--model", str(out / "model"), "--output", str(ev)])
    assert rc == 0
    assert (ev / "evaluation.csv").read_text().startswith("dimension,pearson_r,n")

    sc = tmp_path / "scores"
    rc = _run(["score", "--input", str(pipe / "sampled.jsonl"),
               "--model", str(out / "model"), "--output", str(sc)])
    assert rc == 0
    lines = (sc / "scores.jsonl").read_text().strip().split("\n")
    first = json.loads(lines[0])
    assert len(first["statement_scores"]) == 25
    assert len(first["profile"]) == 12


def test_reliability_and_aggregate_subcommands(tmp_path):
    pipe = tmp_path / "pipe"
    _run(["pipeline", "--synthetic", "--seed", "3", "--output", str(pipe)])
    agg = tmp_path / "agg"
    assert _run(["aggregate", "--annotations", str(pipe / "annotations.jsonl"),
                 "--output", str(agg)]) == 0
    assert (agg / "profiles.jsonl").exists()
    rel = tmp_path / "rel"
    assert _run(["reliability", "--annotations", str(pipe / "annotations.jsonl"),
                 "--output", str(rel)]) == 0
    report = json.loads((rel / "reliability.json").read_text())
    assert len(report["group_alphas"]) == 4


def test_study_engagement_subcommand(tmp_path):
    pipe = tmp_path / "pipe"
    _run(["pipeline", "--synthetic", "--seed", "4", "--output", str(pipe)])
    out = tmp_path / "study"
    rc = _run(["study-engagement", "--posts", str(pipe / "posts.jsonl"),
               "--model", str(pipe / "model"), "--output", str(out)])
    assert rc == 0
    predictors = json.loads((out / "predictor.json").read_text())
    assert {p["outcome"] for p in predictors} == {"log_score", "log_comments"}


def test_split_subcommand(tmp_path):
    pipe = tmp_path / "pipe"
    _run(["pipeline", "--synthetic", "--seed", "5", "--output", str(pipe)])
    out = tmp_path / "splits"
    rc = _run(["split", "--documents", str(pipe / "sampled.jsonl"),
               "--annotations", str(pipe / "annotations.jsonl"),
               "--seed", "1", "--output", str(out)])
    assert rc == 0
    splits = json.loads((out / "splits.json").read_text())
    total = sum(len(v) for v in splits.values())
    assert total == len(set(splits["train"]) | set(splits["validation"]) | set(splits["test"]))
