"""Labelled embedding datasets: label maps, masks, splits and persistence."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import yaml

from rtheta.embedding import EMBEDDING_SIZE, HEADER, CodeEmbedding, format_float
from rtheta.errors import DegenerateStratum, MalformedFile, SchemaMismatch

log = logging.getLogger(__name__)

ALGORITHM_LABELS = (
    "strings",
    "implementation",
    "greedy",
    "brute force",
    "dp",
    "divide and conquer",
    "graphs",
    "binary search",
    "math",
    "sortings",
    "shortest paths",
)
COMPLEXITY_LABELS = ("constant", "log", "linear", "quadratic", "cubic", "exponential", "factorial")
CATALOGS = {"algorithms": ALGORITHM_LABELS, "complexity": COMPLEXITY_LABELS}
DATASET_SCHEMA = "# rtheta-dataset v1"


def encode_labels(labels: Iterable[str], catalog: Sequence[str] = ALGORITHM_LABELS) -> int:
    mask = 0
    for label in labels:
        mask |= 1 << catalog.index(label)
    return mask


def decode_mask(mask: int, catalog: Sequence[str] = ALGORITHM_LABELS) -> list[str]:
    return [c for i, c in enumerate(catalog) if mask >> i & 1]


def ingest_labels(path, catalog: Sequence[str] = ALGORITHM_LABELS) -> tuple[dict[str, int], int]:
    """Read a problem -> label list map (JSON or YAML).

    Returns the problem -> mask map and the number of labels dropped
    because they are outside ``catalog``.
    """
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return {}, 0
    try:
        doc = yaml.safe_load(text)  # JSON is a subset of YAML
    except yaml.YAMLError as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedFile(f"{path}: expected a mapping of problem -> labels")
    masks: dict[str, int] = {}
    dropped = 0
    for problem, labels in doc.items():
        if isinstance(labels, str):
            labels = [labels]
        if not isinstance(labels, list):
            raise MalformedFile(f"{path}: labels for {problem!r} must be a list")
        known = [str(label) for label in labels if str(label) in catalog]
        dropped += len(labels) - len(known)
        masks[str(problem)] = encode_labels(known, catalog)
    if dropped:
        log.warning("dropped %d label(s) outside the catalog", dropped)
    return masks, dropped


@dataclass
class LabeledRow:
    program_id: str
    problem_id: str
    embedding: CodeEmbedding
    labels: int

    def __eq__(self, other):
        if not isinstance(other, LabeledRow):
            return NotImplemented
        return (
            self.program_id == other.program_id
            and self.problem_id == other.problem_id
            and self.embedding == other.embedding
            and self.labels == other.labels
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.66
    seed: int = 0
    stratify_on: Optional[str] = None
    group_by_problem: bool = False

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


def label_rows(
    embeddings: Iterable[CodeEmbedding], label_map: dict[str, int]
) -> tuple[list[LabeledRow], list[str]]:
    """Attach problem labels to embeddings; returns rows and unlabelled ids."""
    rows, missing = [], []
    for e in embeddings:
        if e.problem_id not in label_map:
            missing.append(e.program_id)
            continue
        rows.append(LabeledRow(e.program_id, e.problem_id, e, label_map[e.problem_id]))
    return rows, missing


def _train_count(total: int, fraction: float) -> int:
    # 1e-9 absorbs representation error such as 0.66 * 100 = 66.00000000000001
    return int(math.floor(fraction * total + 1e-9))


def split(
    rows: Sequence[LabeledRow],
    spec: SplitSpec = SplitSpec(),
    catalog: Sequence[str] = ALGORITHM_LABELS,
) -> tuple[list[LabeledRow], list[LabeledRow]]:
    """Seeded train/test partition.

    With ``stratify_on`` the positive share of that label is preserved on
    both sides (to within one row); with ``group_by_problem`` whole problems
    go to one side.  Both sides keep the input order.
    """
    rows = list(rows)
    if len(rows) < 10:
        raise ValueError(f"need at least 10 rows to split, got {len(rows)}")
    rng = np.random.default_rng(spec.seed)
    n_train = _train_count(len(rows), spec.train_fraction)

    if spec.group_by_problem:
        problems = sorted({r.problem_id for r in rows})
        order = [problems[i] for i in rng.permutation(len(problems))]
        chosen: set[str] = set()
        count = 0
        for p in order:
            size = sum(1 for r in rows if r.problem_id == p)
            if count + size > n_train and count:
                continue
            chosen.add(p)
            count += size
        train_idx = {i for i, r in enumerate(rows) if r.problem_id in chosen}
    elif spec.stratify_on is None:
        train_idx = set(rng.permutation(len(rows))[:n_train].tolist())
    else:
        bit = 1 << catalog.index(spec.stratify_on)
        pos = [i for i, r in enumerate(rows) if r.labels & bit]
        neg = [i for i, r in enumerate(rows) if not r.labels & bit]
        for name, stratum in (("positive", pos), ("negative", neg)):
            if len(stratum) < 2:
                raise DegenerateStratum(
                    f"{name} stratum of {spec.stratify_on!r} has {len(stratum)} row(s)"
                )
        n_pos = min(max(round(spec.train_fraction * len(pos)), 1), len(pos) - 1)
        n_neg = n_train - n_pos
        if not 1 <= n_neg <= len(neg) - 1:
            raise DegenerateStratum("cannot place negatives on both sides of the split")
        pos = [pos[i] for i in rng.permutation(len(pos))]
        neg = [neg[i] for i in rng.permutation(len(neg))]
        train_idx = set(pos[:n_pos]) | set(neg[:n_neg])

    train = [r for i, r in enumerate(rows) if i in train_idx]
    test = [r for i, r in enumerate(rows) if i not in train_idx]
    return train, test


def to_arrays(rows: Sequence[LabeledRow]) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix (n, 36) and label-mask vector."""
    if not rows:
        return np.zeros((0, EMBEDDING_SIZE)), np.zeros(0, dtype=np.int64)
    X = np.vstack([r.embedding.values for r in rows])
    y = np.array([r.labels for r in rows], dtype=np.int64)
    return X, y


def mask_matrix(masks, n_classes: int) -> np.ndarray:
    """Expand label masks into a (rows, classes) 0/1 matrix."""
    masks = np.asarray(masks, dtype=np.int64)
    return (masks[:, None] >> np.arange(n_classes)) & 1


def save_dataset(rows: Iterable[LabeledRow], path, catalog: Sequence[str] = ALGORITHM_LABELS) -> None:
    buf = io.StringIO()
    buf.write(f"{DATASET_SCHEMA} catalog={json.dumps(list(catalog))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["program_id", "problem_id", *HEADER, "labels"])
    for r in rows:
        writer.writerow(
            [r.program_id, r.problem_id, *(format_float(v) for v in r.embedding.values), r.labels]
        )
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_dataset(path) -> tuple[list[LabeledRow], tuple[str, ...]]:
    """Inverse of :func:`save_dataset`; returns rows and the label catalog."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return [], ALGORITHM_LABELS
    lines = text.splitlines()
    first = lines[0]
    if not first.startswith(DATASET_SCHEMA):
        raise SchemaMismatch(f"{path}: missing {DATASET_SCHEMA!r} header")
    catalog = ALGORITHM_LABELS
    if "catalog=" in first:
        catalog = tuple(json.loads(first.split("catalog=", 1)[1]))
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    if header is None:
        return [], catalog
    if tuple(header[2:-1]) != HEADER:
        raise SchemaMismatch(f"{path}: unexpected header")
    rows = []
    for lineno, row in enumerate(reader, 3):
        if len(row) != EMBEDDING_SIZE + 3:
            raise SchemaMismatch(f"{path}:{lineno}: expected {EMBEDDING_SIZE} values, got {len(row) - 3}")
        values = np.array([float(v) for v in row[2:-1]])
        emb = CodeEmbedding(row[0], values, row[1])
        rows.append(LabeledRow(row[0], row[1], emb, int(row[-1])))
    return rows, catalog
