import json
import shutil
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from rtheta.cli import EXIT_DATA, EXIT_ENV, EXIT_OK, EXIT_USAGE, main
from rtheta.dataset import ALGORITHM_LABELS
from rtheta.harness.records import FALLBACK_METRICS, ProfileStore
from rtheta.harness.synthetic import ARCHETYPE_LABELS

from helpers import full_fns, make_records

GROWTH = {
    "constant": lambda n: 1.0,
    "log": lambda n: np.log2(n),
    "linear": lambda n: n,
    "quadratic": lambda n: n * n,
    "cubic": lambda n: n**3,
}
SIZES = list(range(10, 101, 10))


def write_project(root: Path, variants=4, classifiers=("tree", "forest"), task="multilabel"):
    """A store of exact synthetic records, their labels and a config file."""
    rng = np.random.default_rng(0)
    store = ProfileStore(root / "store.jsonl")
    for kind, fn in GROWTH.items():
        for v in range(variants):
            fns = full_fns(scale=float(rng.uniform(1, 5)))
            scale = float(rng.uniform(1, 5))
            fns["task-clock"] = lambda n, fn=fn, scale=scale: scale * fn(n) + 3
            store.extend(make_records(f"{kind}-v{v}", kind, fns, SIZES))
    (root / "labels.json").write_text(json.dumps({k: ARCHETYPE_LABELS[k] for k in GROWTH}))
    cfg = {
        "seed": 1,
        "classifiers": list(classifiers),
        "task": task,
        "params": {"forest": {"n_trees": 7}},
    }
    (root / "rtheta.yaml").write_text(yaml.safe_dump(cfg))
    return root / "rtheta.yaml"


def run(*argv):
    return main([str(a) for a in argv])


def pipeline(cfg, *stages):
    for stage in stages:
        assert run(stage, "--config", cfg) == EXIT_OK, stage


@pytest.fixture
def project(tmp_path):
    return write_project(tmp_path)


def script(path: Path, body="exit 0\n"):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(0o755)


def profile_layout(root: Path, problems=("p1",), programs=2, inputs=10):
    for prob in problems:
        entries = []
        for i in range(inputs):
            f = root / "inputs" / prob / f"in{i}.txt"
            f.parent.mkdir(parents=True, exist_ok=True)
            f.write_text(f"{i + 1}\n")
            entries.append({"input_id": f"in{i}", "path": f"../inputs/{prob}/in{i}.txt", "size_n": i + 1})
        (root / "manifests").mkdir(exist_ok=True)
        (root / "manifests" / f"{prob}.yaml").write_text(yaml.safe_dump({"problem_id": prob, "entries": entries}))
        for k in range(programs):
            script(root / "binaries" / prob / f"{prob}-prog{k}")
    (root / "rtheta.yaml").write_text(yaml.safe_dump({"events": "fallback"}))
    return root / "rtheta.yaml"


def test_profile_counts_records(tmp_path, capsys):
    cfg = profile_layout(tmp_path)
    assert run("profile", "--config", cfg) == EXIT_OK
    assert capsys.readouterr().out.strip().splitlines()[-1] == "20 records"
    recs = ProfileStore(tmp_path / "store.jsonl").read()
    assert len(recs) == 20
    assert all(r.sampler == "fallback" for r in recs)
    assert all(set(k for k, v in r.metrics.items() if v is not None) == set(FALLBACK_METRICS) for r in recs)


def test_profile_single_binary_flags(tmp_path, capsys):
    profile_layout(tmp_path)
    out = tmp_path / "one.jsonl"
    code = run("profile", "--events", "fallback", "--binary", tmp_path / "binaries/p1/p1-prog0",
               "--manifest", tmp_path / "manifests/p1.yaml", "--out", out)
    assert code == EXIT_OK
    assert len(ProfileStore(out).read()) == 10


def test_missing_manifest_leaves_store_untouched(tmp_path):
    cfg = profile_layout(tmp_path, problems=("p1", "p2"))
    (tmp_path / "manifests" / "p2.yaml").unlink()
    assert run("profile", "--config", cfg) == EXIT_DATA
    assert not (tmp_path / "store.jsonl").exists()


@pytest.mark.skipif(shutil.which("perf") is not None, reason="perf is installed here")
def test_missing_profiler_is_environment_error(tmp_path):
    cfg = profile_layout(tmp_path)
    assert run("profile", "--config", cfg, "--events", "perf") == EXIT_ENV
    assert run("profile", "--config", cfg, "--events", "all") == EXIT_ENV


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["embed", "--weighting", "cubic"])
    assert info.value.code == EXIT_USAGE
    assert run("profile", "--binary", "/bin/true") == EXIT_USAGE


def test_embed_is_deterministic_and_refuses_overwrite(project, capsys):
    root = project.parent
    pipeline(project, "embed")
    first = (root / "embeddings.csv").read_bytes()
    assert run("embed", "--config", project) == EXIT_DATA
    assert run("embed", "--config", project, "--out", root / "again.csv") == EXIT_OK
    assert (root / "again.csv").read_bytes() == first
    lines = first.decode().splitlines()
    assert len(lines) == 2 + 20
    assert len(lines[1].split(",")) == 2 + 36


def test_embed_reports_skipped_programs(project, capsys):
    root = project.parent
    store = ProfileStore(root / "store.jsonl")
    store.extend(make_records("tiny", "constant", full_fns(), [10, 20]))
    capsys.readouterr()
    pipeline(project, "embed")
    assert "skipped tiny" in capsys.readouterr().out


def test_embed_impute_fills_sentinel(tmp_path):
    store = ProfileStore(tmp_path / "store.jsonl")
    store.extend(make_records("p", "q", {"task-clock": lambda n: n}, SIZES))
    assert run("embed", "--store", tmp_path / "store.jsonl", "--out", tmp_path / "strict.csv") == EXIT_OK
    assert len((tmp_path / "strict.csv").read_text().splitlines()) == 2
    assert run("embed", "--impute", "--store", tmp_path / "store.jsonl", "--out", tmp_path / "e.csv") == EXIT_OK
    row = (tmp_path / "e.csv").read_text().splitlines()[2].split(",")
    assert row[2:6] == ["-1.0", "0.0", "0.0", "0.0"]


def test_classifiers_share_the_split(project):
    root = project.parent
    pipeline(project, "embed", "dataset", "train", "eval")
    tree = json.loads((root / "reports/tree.json").read_text())["meta"]
    forest = json.loads((root / "reports/forest.json").read_text())["meta"]
    assert tree["train_ids"] == forest["train_ids"]
    assert tree["test_ids"] == forest["test_ids"]
    split = json.loads((root / "models/split.json").read_text())
    assert split["test"] == tree["test_ids"]
    assert len(split["train"]) == 13 and len(split["test"]) == 7


def test_multilabel_report_layout(project):
    root = project.parent
    pipeline(project, "embed", "dataset", "train", "eval")
    text = (root / "reports/tree.txt").read_text()
    table = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    names = [line.strip().rsplit(maxsplit=4)[0] for line in table[1:]]
    assert names == list(ALGORITHM_LABELS) + ["micro avg", "macro avg", "weighted avg", "samples avg"]


def test_binary_report_layout(tmp_path):
    cfg = write_project(tmp_path, classifiers=("tree",), task="binary")
    pipeline(cfg, "embed", "dataset", "train", "eval")
    report = json.loads((tmp_path / "reports/tree.json").read_text())
    assert report["classes"] == ["non-math", "math"]
    assert report["accuracy"] is not None
    assert sorted(report["averages"]) == ["macro", "weighted"]
    text = (tmp_path / "reports/tree.txt").read_text()
    assert "accuracy" in text


def test_train_refuses_to_overwrite(project):
    pipeline(project, "embed", "dataset", "train")
    assert run("train", "--config", project) == EXIT_DATA
    assert run("train", "--config", project, "--overwrite") == EXIT_OK


def test_report_writes_figures_and_summary(project):
    root = project.parent
    pipeline(project, "embed", "dataset", "train", "eval")
    assert run("report", "--config", project, "--fits", "--programs", "linear-v0") == EXIT_OK
    assert (root / "reports/tree.png").read_bytes()[:4] == b"\x89PNG"
    assert (root / "reports/forest.png").exists()
    assert (root / "reports/fits/linear-v0.png").exists()
    assert len(list((root / "reports/fits").iterdir())) == 1
    summary = (root / "reports/summary.csv").read_text().splitlines()
    assert summary[0] == "classifier,row,precision,recall,f1,support"
    assert len(summary) == 1 + 2 * (11 + 4)


def test_report_before_eval_is_data_error(project):
    assert run("report", "--config", project) == EXIT_DATA


def test_flags_after_subcommand_and_seed_override(project):
    root = project.parent
    pipeline(project, "embed", "dataset")
    assert run("train", "--config", project, "--seed", "5", "--classifier", "tree") == EXIT_OK
    assert json.loads((root / "models/split.json").read_text())["seed"] == 5
    assert not (root / "models/forest.json").exists()


def test_module_entry_point(tmp_path):
    import subprocess

    proc = subprocess.run([sys.executable, "-m", "rtheta", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout
