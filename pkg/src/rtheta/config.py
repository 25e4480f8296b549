"""Pipeline configuration: a YAML file with command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from rtheta.dataset import CATALOGS, SplitSpec
from rtheta.errors import MalformedFile
from rtheta.fitter import WEIGHTINGS
from rtheta.harness.records import SAMPLERS
from rtheta.classify.multilabel import TRAINERS

TASKS = ("multilabel", "binary")


@dataclass
class Paths:
    """Locations of every stage's inputs and outputs, relative to the root."""

    binaries: str = "binaries"
    manifests: str = "manifests"
    store: str = "store.jsonl"
    embeddings: str = "embeddings.csv"
    labels: str = "labels.json"
    dataset: str = "dataset.csv"
    models: str = "models"
    reports: str = "reports"


@dataclass
class PipelineConfig:
    paths: Paths = field(default_factory=Paths)
    seed: int = 0
    events: str = "perf"
    impute: bool = False
    weighting: str = "relative"
    timeout: float = 60.0
    catalog: str = "algorithms"
    task: str = "multilabel"
    binary_label: str = "math"
    train_fraction: float = 0.66
    stratify_on: Optional[str] = None
    group_by_problem: bool = False
    classifiers: list[str] = field(default_factory=lambda: ["tree"])
    params: dict[str, dict] = field(default_factory=dict)
    # directory relative paths are taken against; never serialised
    root: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        if isinstance(self.paths, dict):
            unknown = set(self.paths) - {f.name for f in dataclasses.fields(Paths)}
            if unknown:
                raise MalformedFile(f"unknown path keys {sorted(unknown)}")
            self.paths = Paths(**self.paths)
        self.root = Path(self.root)
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.events in SAMPLERS, f"events must be one of {SAMPLERS}"),
            (self.weighting in WEIGHTINGS, f"weighting must be one of {WEIGHTINGS}"),
            (self.catalog in CATALOGS, f"catalog must be one of {sorted(CATALOGS)}"),
            (self.task in TASKS, f"task must be one of {TASKS}"),
            (bool(self.classifiers), "at least one classifier is required"),
            (all(c in TRAINERS for c in self.classifiers), f"classifiers must be in {sorted(TRAINERS)}"),
            (self.timeout > 0, "timeout must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                raise MalformedFile(f"config: {message}")
        if self.task == "binary" and self.binary_label not in self.labels:
            raise MalformedFile(f"config: binary_label {self.binary_label!r} not in the {self.catalog} catalog")
        self.split_spec()

    @property
    def labels(self) -> tuple[str, ...]:
        return CATALOGS[self.catalog]

    def path(self, key: str) -> Path:
        p = Path(getattr(self.paths, key))
        return p if p.is_absolute() else self.root / p

    def split_spec(self) -> SplitSpec:
        try:
            return SplitSpec(self.train_fraction, self.seed, self.stratify_on, self.group_by_problem)
        except ValueError as exc:
            raise MalformedFile(f"config: {exc}") from exc

    def classifier_params(self, name: str) -> dict:
        params = dict(self.params.get(name, {}))
        if name == "forest":
            params.setdefault("seed", self.seed)
        return params

    def to_dict(self) -> dict:
        """Resolved settings for provenance; paths stay relative to the root."""
        d = dataclasses.asdict(self)
        d.pop("root")
        return d

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise MalformedFile(f"{path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise MalformedFile(f"{path}: expected a mapping")
        return cls.from_dict(doc, root=path.parent)

    @classmethod
    def from_dict(cls, doc: dict, root=".") -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)} - {"root"}
        unknown = set(doc) - known
        if unknown:
            raise MalformedFile(f"unknown config keys {sorted(unknown)}")
        return cls(**doc, root=Path(root))

    def save(self, path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")
