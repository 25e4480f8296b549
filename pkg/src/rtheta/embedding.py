"""Code embeddings: one fitted quadruple per metric, 36 numbers per program."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from rtheta.errors import EmptyInput, InsufficientData, SchemaMismatch
from rtheta.fitter import MIN_POINTS, FitQuadruple, FitScore, Sample, aggregate_repeats, select_best
from rtheta.harness.records import METRICS, ProfileRecord

SLOTS = ("feature_type", "feature_config", "intercept", "r_val")
EMBEDDING_SIZE = len(METRICS) * len(SLOTS)
MISSING = (-1.0, 0.0, 0.0, 0.0)
HEADER = tuple(f"{m}.{s}" for m in METRICS for s in SLOTS)
TABLE_SCHEMA = "# rtheta-embeddings v1"


@dataclass
class CodeEmbedding:
    program_id: str
    values: np.ndarray
    problem_id: str = ""
    fits: dict[str, Optional[tuple[FitQuadruple, FitScore]]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (EMBEDDING_SIZE,):
            raise SchemaMismatch(f"embedding needs {EMBEDDING_SIZE} values, got {self.values.shape}")

    def __eq__(self, other):
        if not isinstance(other, CodeEmbedding):
            return NotImplemented
        return (
            self.program_id == other.program_id
            and self.problem_id == other.problem_id
            and np.array_equal(self.values, other.values)
        )

    def quadruple(self, metric: str) -> tuple[float, float, float, float]:
        i = METRICS.index(metric) * len(SLOTS)
        return tuple(float(v) for v in self.values[i : i + len(SLOTS)])


def feature_index(metric: str, slot: str) -> int:
    return METRICS.index(metric) * len(SLOTS) + SLOTS.index(slot)


def metric_samples(records: Iterable[ProfileRecord], metric: str, successful_only: bool = True):
    """(size, reading) pairs for one metric, skipping nulls."""
    return [
        Sample(r.size_n, float(r.metrics[metric]))
        for r in records
        if r.metrics.get(metric) is not None and (r.exit_code == 0 or not successful_only)
    ]


def build_embedding(
    records: Sequence[ProfileRecord],
    impute: bool = False,
    weighting: str = "relative",
) -> CodeEmbedding:
    """Fit every metric of one program and lay out the 36-long vector.

    Failed runs (non-zero exit code) are ignored.  A metric with fewer than
    three usable sizes raises InsufficientData unless ``impute`` is set, in
    which case its slots hold the sentinel ``(-1, 0, 0, 0)``.
    """
    records = list(records)
    if not records:
        raise EmptyInput("no profile records")
    program_ids = {r.program_id for r in records}
    if len(program_ids) != 1:
        raise ValueError(f"records mix programs: {sorted(program_ids)}")
    values: list[float] = []
    fits: dict = {}
    for metric in METRICS:
        samples = aggregate_repeats(metric_samples(records, metric))
        if len(samples) < MIN_POINTS:
            if not impute:
                raise InsufficientData(
                    f"{metric}: {len(samples)} usable sizes, need {MIN_POINTS}"
                )
            values.extend(MISSING)
            fits[metric] = None
            continue
        quad, score = select_best(samples, weighting)
        values.extend(float(v) for v in quad.as_tuple())
        fits[metric] = (quad, score)
    problems = sorted({r.problem_id for r in records})
    return CodeEmbedding(program_ids.pop(), np.array(values), problems[0], fits)


def embedding_to_row(e: CodeEmbedding) -> tuple[list[float], tuple[str, ...]]:
    return [float(v) for v in e.values], HEADER


def row_to_embedding(row: Sequence[float], program_id: str, problem_id: str = "") -> CodeEmbedding:
    return CodeEmbedding(program_id, np.array(row, dtype=float), problem_id)


def group_by_program(records: Iterable[ProfileRecord]) -> dict[str, list[ProfileRecord]]:
    groups: dict[str, list[ProfileRecord]] = {}
    for r in records:
        groups.setdefault(r.program_id, []).append(r)
    return dict(sorted(groups.items()))


def format_float(v: float) -> str:
    # repr round-trips exactly
    return repr(float(v))


def write_table(embeddings: Iterable[CodeEmbedding], path) -> None:
    """Tabular export: schema line, header, one row per program."""
    buf = io.StringIO()
    buf.write(TABLE_SCHEMA + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["program_id", "problem_id", *HEADER])
    for e in sorted(embeddings, key=lambda e: e.program_id):
        writer.writerow([e.program_id, e.problem_id, *(format_float(v) for v in e.values)])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_table(path) -> list[CodeEmbedding]:
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if not text.strip():
        return []
    lines = text.splitlines()
    if lines[0] != TABLE_SCHEMA:
        raise SchemaMismatch(f"{path}: expected {TABLE_SCHEMA!r}, got {lines[0]!r}")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header[2:]) != HEADER:
        raise SchemaMismatch(f"{path}: unexpected header")
    out = []
    for row in reader:
        if len(row) != 2 + EMBEDDING_SIZE:
            raise SchemaMismatch(f"{path}: row for {row[:1]} has {len(row) - 2} values")
        out.append(row_to_embedding([float(v) for v in row[2:]], row[0], row[1]))
    return out
