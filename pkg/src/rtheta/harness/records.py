"""Profile records, their line-delimited store, and input manifests."""

from __future__ import annotations

import json
import os
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

import yaml

from rtheta.errors import MalformedFile

METRICS = (
    "branch-misses",
    "branches",
    "context-switches",
    "cpu-migrations",
    "cycles",
    "instructions",
    "page-faults",
    "stalled-cycles-frontend",
    "task-clock",
)
HARDWARE_METRICS = ("branch-misses", "branches", "cycles", "instructions", "stalled-cycles-frontend")
FALLBACK_METRICS = ("context-switches", "page-faults", "task-clock")

SAMPLERS = ("perf", "fallback")
# exit_code recorded for runs killed after exceeding their timeout
TIMEOUT_EXIT_CODE = -1000
# exit_code recorded when the profiler itself failed after the first run
PROFILER_ERROR_EXIT_CODE = -1001


@dataclass
class ProfileRecord:
    program_id: str
    problem_id: str
    input_id: str
    size_n: int
    metrics: dict[str, Optional[float]]
    exit_code: int
    wall_seconds: float
    arch_tag: str
    timestamp: str
    sampler: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileRecord":
        missing = set(cls.__dataclass_fields__) - set(d)
        if missing:
            raise MalformedFile(f"profile record lacks fields {sorted(missing)}")
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


class ProfileStore:
    """Append-only JSON-lines file of :class:`ProfileRecord`."""

    def __init__(self, path):
        self.path = Path(path)

    def append(self, record: ProfileRecord) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(record.to_json() + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def extend(self, records: Iterable[ProfileRecord]) -> None:
        for rec in records:
            self.append(rec)

    def __iter__(self) -> Iterator[ProfileRecord]:
        if not self.path.exists():
            return
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedFile(f"{self.path}:{lineno}: {exc}") from exc
                yield ProfileRecord.from_dict(data)

    def read(self) -> list[ProfileRecord]:
        return list(self)

    def __len__(self) -> int:
        return sum(1 for _ in self)


@dataclass
class ManifestEntry:
    input_id: str
    path: Path
    size_n: int
    repetitions: int = 1


@dataclass
class InputManifest:
    problem_id: str
    entries: list[ManifestEntry] = field(default_factory=list)
    input_mode: str = "stdin"

    def __post_init__(self):
        if self.input_mode not in ("stdin", "argv"):
            raise ValueError(f"input_mode must be 'stdin' or 'argv', got {self.input_mode!r}")

    @property
    def total_runs(self) -> int:
        return sum(e.repetitions for e in self.entries)

    def sizes(self) -> list[int]:
        return sorted({e.size_n for e in self.entries})

    def save(self, path) -> None:
        path = Path(path)
        base = path.parent.resolve()
        doc = {
            "problem_id": self.problem_id,
            "input_mode": self.input_mode,
            "entries": [
                {
                    "input_id": e.input_id,
                    "path": _relative(Path(e.path), base),
                    "size_n": int(e.size_n),
                    "repetitions": int(e.repetitions),
                }
                for e in self.entries
            ],
        }
        path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "InputManifest":
        path = Path(path)
        try:
            doc = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise MalformedFile(f"{path}: {exc}") from exc
        if not isinstance(doc, dict) or "problem_id" not in doc:
            raise MalformedFile(f"{path}: manifest needs a problem_id")
        entries = []
        for raw in doc.get("entries") or []:
            try:
                entry_path = Path(raw["path"])
                if not entry_path.is_absolute():
                    entry_path = path.parent / entry_path
                entries.append(
                    ManifestEntry(
                        input_id=str(raw["input_id"]),
                        path=entry_path,
                        size_n=int(raw["size_n"]),
                        repetitions=int(raw.get("repetitions", 1)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedFile(f"{path}: bad entry {raw!r}") from exc
            if entries[-1].size_n < 1 or entries[-1].repetitions < 1:
                raise MalformedFile(f"{path}: size_n and repetitions must be positive in {raw!r}")
        return cls(str(doc["problem_id"]), entries, doc.get("input_mode", "stdin"))


def _relative(path: Path, base: Path) -> str:
    try:
        return str(path.resolve().relative_to(base))
    except ValueError:
        return str(path.resolve())


def default_arch_tag() -> str:
    model = platform.processor() or ""
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("model name"):
                    model = line.split(":", 1)[1].strip()
                    break
    except OSError:
        pass
    return f"{platform.machine()}:{model}" if model else platform.machine()
