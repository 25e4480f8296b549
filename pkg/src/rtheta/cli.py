"""Command-line entry point: synth, profile, embed, dataset, train, eval, report.

Exit codes: 0 success, 1 usage, 2 environment (profiler or compiler
missing), 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from rtheta.classify import evaluate, evaluate_binary, load_model, save_model, train_multilabel
from rtheta.classify.metrics import EvalReport
from rtheta.config import TASKS, PipelineConfig
from rtheta.dataset import (
    CATALOGS,
    ingest_labels,
    label_rows,
    load_dataset,
    save_dataset,
    split,
    to_arrays,
)
from rtheta.embedding import build_embedding, format_float, group_by_program, read_table, write_table
from rtheta.errors import (
    CompilerUnavailable,
    EmptyClass,
    InsufficientData,
    ProfilerUnavailable,
    RThetaError,
)
from rtheta.harness.records import InputManifest, ProfileStore
from rtheta.harness.runner import run_suite
from rtheta.harness.synthetic import WORKLOAD_KINDS, generate_corpus

log = logging.getLogger("rtheta")

EXIT_OK, EXIT_USAGE, EXIT_ENV, EXIT_DATA = 0, 1, 2, 3
SPLIT_FILE = "split.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fresh(path: Path, overwrite: bool) -> Path:
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass --overwrite to replace it")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- commands


def cmd_synth(cfg: PipelineConfig, args) -> int:
    out = Path(args.out)
    workloads = generate_corpus(
        out, kinds=tuple(args.kinds), variants=args.variants, seed=cfg.seed,
        repetitions=args.repetitions,
    )
    config_path = out / "rtheta.yaml"
    if not config_path.exists():
        # the corpus is built to separate complexity classes, so target those
        synth_cfg = PipelineConfig(
            events="fallback", impute=True, seed=cfg.seed, catalog="complexity",
            classifiers=["tree", "forest", "boosted"],
        )
        synth_cfg.paths.labels = "complexity_labels.json"
        synth_cfg.save(config_path)
    print(f"{len(workloads)} programs written to {out}")
    return EXIT_OK


def _profile_jobs(cfg: PipelineConfig, args) -> list[tuple[Path, InputManifest]]:
    """Every (binary, manifest) pair, resolved before anything runs."""
    if args.binary or args.manifest:
        if not (args.binary and args.manifest):
            raise UsageError("--binary and --manifest go together")
        binary = Path(args.binary)
        if not binary.is_file():
            raise FileNotFoundError(f"binary not found: {binary}")
        return [(binary, InputManifest.load(args.manifest))]
    bin_root, man_root = cfg.path("binaries"), cfg.path("manifests")
    if not bin_root.is_dir():
        raise FileNotFoundError(f"binaries directory not found: {bin_root}")
    jobs = []
    for problem_dir in sorted(p for p in bin_root.iterdir() if p.is_dir()):
        manifest_path = man_root / f"{problem_dir.name}.yaml"
        if not manifest_path.is_file():
            raise FileNotFoundError(f"missing manifest for problem {problem_dir.name}: {manifest_path}")
        manifest = InputManifest.load(manifest_path)
        for binary in sorted(p for p in problem_dir.iterdir() if p.is_file()):
            jobs.append((binary, manifest))
    if not jobs:
        raise FileNotFoundError(f"no binaries under {bin_root}")
    return jobs


def cmd_profile(cfg: PipelineConfig, args) -> int:
    jobs = _profile_jobs(cfg, args)
    store = ProfileStore(cfg.path("store"))
    total = 0
    for binary, manifest in jobs:
        records = run_suite(
            binary, manifest, sampler=cfg.events, store=store, timeout=cfg.timeout,
        )
        failed = sum(not r.ok for r in records)
        note = f" ({failed} failed)" if failed else ""
        print(f"{records[0].program_id}: {len(records)} records{note}")
        total += len(records)
    print(f"{total} records")
    return EXIT_OK


def cmd_embed(cfg: PipelineConfig, args) -> int:
    store_path = cfg.path("store")
    records = ProfileStore(store_path).read()
    if not records:
        raise InsufficientData(f"store {store_path} is empty or missing")
    out = _fresh(cfg.path("embeddings"), args.overwrite)
    embeddings, skipped = [], []
    for program, recs in group_by_program(records).items():
        try:
            embeddings.append(build_embedding(recs, impute=cfg.impute, weighting=cfg.weighting))
        except InsufficientData as exc:
            skipped.append((program, str(exc)))
    write_table(embeddings, out)
    for program, reason in skipped:
        print(f"skipped {program}: {reason}")
    print(f"{len(embeddings)} embeddings written to {out}")
    return EXIT_OK


def cmd_dataset(cfg: PipelineConfig, args) -> int:
    embeddings = read_table(cfg.path("embeddings"))
    masks, dropped = ingest_labels(cfg.path("labels"), cfg.labels)
    rows, missing = label_rows(embeddings, masks)
    if not rows:
        raise InsufficientData("no embedding matched a labelled problem")
    out = _fresh(cfg.path("dataset"), args.overwrite)
    save_dataset(rows, out, cfg.labels)
    for program in missing:
        print(f"unlabelled {program}")
    if dropped:
        print(f"{dropped} labels outside the {cfg.catalog} catalog dropped")
    print(f"{len(rows)} labelled rows written to {out}")
    return EXIT_OK


def _load_rows(cfg: PipelineConfig):
    rows, catalog = load_dataset(cfg.path("dataset"))
    if tuple(catalog) != cfg.labels:
        raise RThetaError(f"dataset catalog {list(catalog)} differs from configured {cfg.catalog!r}")
    return rows


def _task_targets(cfg: PipelineConfig, masks: np.ndarray):
    """(label masks, class names) the one-vs-rest models are trained on."""
    if cfg.task == "binary":
        bit = cfg.labels.index(cfg.binary_label)
        return (masks >> bit) & 1, (cfg.binary_label,)
    return masks, cfg.labels


def cmd_train(cfg: PipelineConfig, args) -> int:
    rows = _load_rows(cfg)
    train_rows, test_rows = split(rows, cfg.split_spec(), cfg.labels)
    models_dir = cfg.path("models")
    targets = [_fresh(models_dir / f"{name}.json", args.overwrite) for name in cfg.classifiers]
    split_path = _fresh(models_dir / SPLIT_FILE, args.overwrite)
    X, masks = to_arrays(train_rows)
    y, classes = _task_targets(cfg, masks)
    # train everything before writing anything, so a failure leaves no partial output
    with warnings.catch_warnings():
        # empty classes are reported below from the model flags
        warnings.simplefilter("ignore", EmptyClass)
        models = [
            train_multilabel(X, y, classes, base=name, params=cfg.classifier_params(name))
            for name in cfg.classifiers
        ]
    for name, target, model in zip(cfg.classifiers, targets, models):
        save_model(model, target)
        for cls, flag in sorted(model.flags.items()):
            print(f"{name}: class {cls!r} is {flag} in training data")
        print(f"{name}: model written to {target}")
    split_doc = {
        "seed": cfg.seed,
        "train": [r.program_id for r in train_rows],
        "test": [r.program_id for r in test_rows],
    }
    split_path.write_text(_canonical_json(split_doc), encoding="utf-8")
    print(f"split: {len(train_rows)} train / {len(test_rows)} test")
    return EXIT_OK


def _evaluate_model(cfg: PipelineConfig, model, rows) -> EvalReport:
    X, masks = to_arrays(rows)
    y, classes = _task_targets(cfg, masks)
    if tuple(model.classes) != tuple(classes):
        raise RThetaError(f"model classes {model.classes} do not match the configured task")
    pred = model.predict(X)
    if cfg.task == "binary":
        return evaluate_binary(pred, y, names=(f"non-{cfg.binary_label}", cfg.binary_label))
    return evaluate(pred, y, classes)


def cmd_eval(cfg: PipelineConfig, args) -> int:
    rows = _load_rows(cfg)
    models_dir = cfg.path("models")
    split_doc = json.loads((models_dir / SPLIT_FILE).read_text(encoding="utf-8"))
    by_id = {r.program_id: r for r in rows}
    unknown = [pid for pid in split_doc["test"] + split_doc["train"] if pid not in by_id]
    if unknown:
        raise RThetaError(f"split names programs missing from the dataset: {unknown[:5]}")
    test_rows = [by_id[pid] for pid in split_doc["test"]]
    reports_dir = cfg.path("reports")
    outputs = [
        (name, _fresh(reports_dir / f"{name}.txt", args.overwrite),
         _fresh(reports_dir / f"{name}.json", args.overwrite))
        for name in cfg.classifiers
    ]
    provenance = cfg.to_dict()
    for name, txt_path, json_path in outputs:
        model = load_model(models_dir / f"{name}.json")
        report = _evaluate_model(cfg, model, test_rows)
        report.meta = {
            "classifier": name,
            "seed": cfg.seed,
            "config": provenance,
            "train_ids": split_doc["train"],
            "test_ids": split_doc["test"],
        }
        header = [
            f"# classifier: {name}",
            f"# task: {cfg.task}",
            f"# seed: {cfg.seed}",
            f"# config: {json.dumps(provenance, sort_keys=True)}",
            f"# train ids: {' '.join(split_doc['train'])}",
            f"# test ids: {' '.join(split_doc['test'])}",
            "",
        ]
        txt_path.write_text("\n".join(header) + report.to_text(), encoding="utf-8")
        json_path.write_text(_canonical_json(report.to_dict()), encoding="utf-8")
        print(f"== {name} ==")
        print(report.to_text(), end="")
    return EXIT_OK


def cmd_report(cfg: PipelineConfig, args) -> int:
    # deferred so that commands without figures never import matplotlib
    from rtheta.plotting import plot_fits, plot_report

    reports_dir = cfg.path("reports")
    reports_dir.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for name in cfg.classifiers:
        json_path = reports_dir / f"{name}.json"
        if not json_path.exists():
            raise FileNotFoundError(f"no evaluation for {name}: run `rtheta eval` first")
        report = EvalReport.from_dict(json.loads(json_path.read_text(encoding="utf-8")))
        plot_report(report, reports_dir / f"{name}.png", title=name)
        for cls, s in zip(report.classes, report.per_class):
            summary_rows.append([name, cls, s.precision, s.recall, s.f1, s.support])
        if report.accuracy is not None:
            summary_rows.append([name, "accuracy", "", "", report.accuracy, report.n_rows])
        for key, s in report.averages.items():
            summary_rows.append([name, f"{key} avg", s.precision, s.recall, s.f1, s.support])
    summary = reports_dir / "summary.csv"
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["classifier", "row", "precision", "recall", "f1", "support"])
        for row in summary_rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    print(f"summary written to {summary}")

    if args.fits:
        store = ProfileStore(cfg.path("store"))
        grouped = group_by_program(store)
        fits_dir = reports_dir / "fits"
        fits_dir.mkdir(exist_ok=True)
        wanted = set(args.programs or [])
        count = 0
        for emb in read_table(cfg.path("embeddings")):
            if wanted and emb.program_id not in wanted:
                continue
            plot_fits(emb, grouped.get(emb.program_id, []), fits_dir / f"{emb.program_id}.png")
            count += 1
        print(f"{count} fit figures written to {fits_dir}")
    return EXIT_OK


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the global flags appear before or after the subcommand
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML pipeline configuration")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--events", choices=("perf", "all", "fallback"), default=argparse.SUPPRESS,
                        help="all perf counters ('perf' and 'all' are synonyms) or the rusage fallback")
    common.add_argument("--impute", action="store_true", default=argparse.SUPPRESS,
                        help="fill metrics with too few sizes with the missing sentinel")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = _Parser(prog="rtheta", parents=[common], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("synth", "generate a compiled synthetic workload corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--kinds", nargs="+", choices=WORKLOAD_KINDS, default=list(WORKLOAD_KINDS))
    p.add_argument("--variants", type=int, default=8)
    p.add_argument("--repetitions", type=int, default=1)

    p = add("profile", "run programs against their input manifests")
    p.add_argument("--binary")
    p.add_argument("--manifest")
    p.add_argument("--store", "--out", dest="store")
    p.add_argument("--timeout", type=float)

    p = add("embed", "fit every metric and write the embedding table")
    p.add_argument("--store")
    p.add_argument("--out", dest="embeddings")
    p.add_argument("--weighting", choices=("relative", "none"))
    p.add_argument("--overwrite", action="store_true")

    p = add("dataset", "attach problem labels to embeddings")
    p.add_argument("--embeddings")
    p.add_argument("--labels")
    p.add_argument("--catalog", choices=sorted(CATALOGS))
    p.add_argument("--out", dest="dataset")
    p.add_argument("--overwrite", action="store_true")

    for name, help_text in (("train", "train classifiers on the seeded split"),
                            ("eval", "evaluate trained classifiers on the held-out split")):
        p = add(name, help_text)
        p.add_argument("--dataset")
        p.add_argument("--catalog", choices=sorted(CATALOGS))
        p.add_argument("--classifier", nargs="+", dest="classifiers",
                       choices=("tree", "forest", "boosted"))
        p.add_argument("--task", choices=TASKS)
        p.add_argument("--binary-label")
        p.add_argument("--models")
        p.add_argument("--reports")
        p.add_argument("--overwrite", action="store_true")

    p = add("report", "write summary.csv and figures from evaluation reports")
    p.add_argument("--reports")
    p.add_argument("--classifier", nargs="+", dest="classifiers",
                   choices=("tree", "forest", "boosted"))
    p.add_argument("--fits", action="store_true", help="also plot fitted curves per program")
    p.add_argument("--programs", nargs="+", help="restrict --fits to these program ids")
    p.add_argument("--store")
    p.add_argument("--embeddings")
    return parser


_PATH_FLAGS = ("store", "embeddings", "labels", "dataset", "models", "reports")
_VALUE_FLAGS = ("seed", "events", "impute", "timeout", "weighting", "catalog", "classifiers",
                "task", "binary_label")


def resolve_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    paths = {k: getattr(args, k) for k in _PATH_FLAGS if getattr(args, k, None) is not None}
    values = {k: getattr(args, k) for k in _VALUE_FLAGS if getattr(args, k, None) is not None}
    if values.get("events") == "all":
        values["events"] = "perf"
    # command-line paths are relative to the working directory, not the config
    paths = {k: str(Path(v).resolve()) for k, v in paths.items()}
    return dataclasses.replace(cfg, paths=dataclasses.replace(cfg.paths, **paths), **values)


COMMANDS = {
    "synth": cmd_synth,
    "profile": cmd_profile,
    "embed": cmd_embed,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "eval": cmd_eval,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"rtheta: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProfilerUnavailable, CompilerUnavailable) as exc:
        print(f"rtheta: environment error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except (RThetaError, OSError, ValueError) as exc:
        print(f"rtheta: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
