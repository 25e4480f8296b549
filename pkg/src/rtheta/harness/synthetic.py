"""Generated C programs whose work grows by a known complexity class.

Each program reads ``n`` (from stdin, or from the file named by its first
argument) and performs ``scale * base * h(n)`` units of work, where ``h``
is the target class and one unit is a pseudo-random state update followed
by a data-dependent branch.  The manifest sizes for each class are chosen
so that the largest input costs roughly ``base * h(n_max)`` ~ 1e7 units.
"""

from __future__ import annotations

import json
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from rtheta.complexity_model import CandidateBasis, FamilyKind
from rtheta.errors import CompilerUnavailable
from rtheta.harness.records import InputManifest, ManifestEntry

WORKLOAD_KINDS = ("constant", "log", "linear", "quadratic", "cubic", "exponential", "factorial")

# the grid member each workload is built to follow
EXPECTED_BASIS = {
    "constant": CandidateBasis(FamilyKind.LOG_POLYNOMIAL, 0),
    "log": CandidateBasis(FamilyKind.LOG_POLYNOMIAL, 1),
    "linear": CandidateBasis(FamilyKind.POLYNOMIAL, 1),
    "quadratic": CandidateBasis(FamilyKind.POLYNOMIAL, 2),
    "cubic": CandidateBasis(FamilyKind.POLYNOMIAL, 3),
    "exponential": CandidateBasis(FamilyKind.POWER, 2),
    "factorial": CandidateBasis(FamilyKind.FACTORIAL, 1),
}

# algorithm tags a competitive-programming solution of each shape would carry
ARCHETYPE_LABELS = {
    "constant": ["implementation", "math"],
    "log": ["binary search", "divide and conquer"],
    "linear": ["greedy", "strings"],
    "quadratic": ["dp", "sortings"],
    "cubic": ["graphs", "shortest paths"],
    "exponential": ["brute force"],
    "factorial": ["brute force", "implementation"],
}

_BASE_UNITS = {
    "constant": 10_000_000,
    "log": 200_000,
    "linear": 12,
    "quadratic": 1,
    "cubic": 1,
    "exponential": 1,
    "factorial": 4,
}


def default_sizes(kind: str) -> list[int]:
    """Ten or more distinct sizes spanning at least a decade."""
    if kind in ("constant", "log"):
        return [2**k for k in range(6, 61, 6)]
    if kind == "linear":
        return _geometric(1_000, 1_000_000, 10)
    if kind == "quadratic":
        return _geometric(100, 3_000, 10)
    if kind == "cubic":
        return _geometric(20, 230, 10)
    if kind == "exponential":
        return list(range(2, 25, 2))
    if kind == "factorial":
        return list(range(1, 12))
    raise ValueError(f"unknown workload kind {kind!r}")


def _geometric(lo, hi, count) -> list[int]:
    return sorted({int(round(v)) for v in np.geomspace(lo, hi, count)})


@dataclass(frozen=True)
class SyntheticWorkloadSpec:
    kind: str
    scale: int = 1
    # fixed units of work done once, independent of n
    offset: int = 0
    seed: int = 1

    def __post_init__(self):
        if self.kind not in WORKLOAD_KINDS:
            raise ValueError(f"kind must be one of {WORKLOAD_KINDS}, got {self.kind!r}")
        if self.scale < 1 or self.offset < 0:
            raise ValueError("scale must be positive and offset nonnegative")


@dataclass
class SyntheticWorkload:
    spec: SyntheticWorkloadSpec
    program_id: str
    binary: Path
    manifest: InputManifest
    manifest_path: Path


_PRELUDE = r"""
#include <stdio.h>
#include <stdint.h>
#include <inttypes.h>

static uint64_t state = UINT64_C(@SEED@), acc = 0;

static void work(uint64_t units) {
    for (uint64_t i = 0; i < units; i++) {
        state = state * UINT64_C(6364136223846793005) + UINT64_C(1442695040888963407);
        if ((state >> 33) & 1) acc += state >> 40; else acc ^= state;
    }
}
"""

_KERNELS = {
    "constant": "static void run(uint64_t n) { (void)n; work(STEP); }",
    "log": "static void run(uint64_t n) { for (uint64_t m = n; m > 1; m >>= 1) work(STEP); }",
    "linear": "static void run(uint64_t n) { for (uint64_t i = 0; i < n; i++) work(STEP); }",
    "quadratic": (
        "static void run(uint64_t n) {\n"
        "    for (uint64_t i = 0; i < n; i++)\n"
        "        for (uint64_t j = 0; j < n; j++) work(STEP);\n"
        "}"
    ),
    "cubic": (
        "static void run(uint64_t n) {\n"
        "    for (uint64_t i = 0; i < n; i++)\n"
        "        for (uint64_t j = 0; j < n; j++)\n"
        "            for (uint64_t k = 0; k < n; k++) work(STEP);\n"
        "}"
    ),
    "exponential": (
        "static void rec(uint64_t d) {\n"
        "    if (d == 0) { work(STEP); return; }\n"
        "    rec(d - 1);\n"
        "    rec(d - 1);\n"
        "}\n"
        "static void run(uint64_t n) { rec(n); }"
    ),
    # (n-1)! leaves, i.e. Gamma(n)
    "factorial": (
        "static void perm(uint64_t k) {\n"
        "    if (k <= 1) { work(STEP); return; }\n"
        "    for (uint64_t i = 0; i < k; i++) perm(k - 1);\n"
        "}\n"
        "static void run(uint64_t n) { perm(n > 0 ? n - 1 : 0); }"
    ),
}

_MAIN = r"""
int main(int argc, char **argv) {
    FILE *in = argc > 1 ? fopen(argv[1], "r") : stdin;
    uint64_t n = 0;
    if (!in || fscanf(in, "%" SCNu64, &n) != 1) return 2;
    work(UINT64_C(@OFFSET@));
    run(n);
    printf("%" PRIu64 "\n", acc);
    return 0;
}
"""


def render_source(spec: SyntheticWorkloadSpec) -> str:
    step = spec.scale * _BASE_UNITS[spec.kind]
    kernel = _KERNELS[spec.kind].replace("STEP", f"UINT64_C({step})")
    source = _PRELUDE + kernel + "\n" + _MAIN
    return source.replace("@SEED@", str(spec.seed)).replace("@OFFSET@", str(spec.offset))


def find_compiler() -> str:
    for cc in ("cc", "gcc", "clang"):
        path = shutil.which(cc)
        if path:
            return path
    raise CompilerUnavailable("no C compiler (cc, gcc, clang) on PATH")


def compile_source(source: str, binary: Path, src: Path, compiler: Optional[str] = None) -> Path:
    compiler = compiler or find_compiler()
    binary.parent.mkdir(parents=True, exist_ok=True)
    src.parent.mkdir(parents=True, exist_ok=True)
    src.write_text(source, encoding="utf-8")
    proc = subprocess.run(
        [compiler, "-O1", "-o", str(binary), str(src)], capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise CompilerUnavailable(f"{compiler} failed: {proc.stderr.strip()}")
    return binary


def write_inputs(problem_id: str, sizes, out_dir, repetitions: int = 1) -> tuple[InputManifest, Path]:
    out_dir = Path(out_dir)
    inputs = out_dir / "inputs" / problem_id
    inputs.mkdir(parents=True, exist_ok=True)
    entries = []
    for n in sizes:
        path = inputs / f"n{n}.txt"
        path.write_text(f"{n}\n", encoding="utf-8")
        entries.append(ManifestEntry(f"n{n}", path, int(n), repetitions))
    manifest = InputManifest(problem_id, entries)
    manifest_path = out_dir / "manifests" / f"{problem_id}.yaml"
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest.save(manifest_path)
    return InputManifest.load(manifest_path), manifest_path


def generate_synthetic_workload(
    spec: SyntheticWorkloadSpec,
    out_dir,
    *,
    program_id: Optional[str] = None,
    problem_id: Optional[str] = None,
    sizes=None,
    repetitions: int = 1,
) -> SyntheticWorkload:
    """Write, compile and describe one synthetic program.

    Layout under ``out_dir``: ``binaries/<problem>/<program>``,
    ``sources/<problem>/<program>.c``, ``inputs/<problem>/n<size>.txt``
    and ``manifests/<problem>.yaml``.
    """
    out_dir = Path(out_dir)
    problem_id = problem_id or spec.kind
    program_id = program_id or f"{spec.kind}-s{spec.scale}"
    binary = compile_source(
        render_source(spec),
        out_dir / "binaries" / problem_id / program_id,
        out_dir / "sources" / problem_id / f"{program_id}.c",
    )
    manifest, manifest_path = write_inputs(
        problem_id, sizes or default_sizes(spec.kind), out_dir, repetitions
    )
    return SyntheticWorkload(spec, program_id, binary, manifest, manifest_path)


def generate_corpus(
    out_dir,
    kinds=WORKLOAD_KINDS,
    variants: int = 8,
    seed: int = 0,
    repetitions: int = 1,
) -> list[SyntheticWorkload]:
    """A labelled corpus: ``variants`` programs per workload kind.

    Variants differ in work scale, fixed offset and generator seed.  Two
    label maps are written next to the corpus: ``complexity_labels.json``
    (problem -> its complexity class) and ``labels.json`` (problem -> the
    algorithm tags of :data:`ARCHETYPE_LABELS`).
    """
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    workloads = []
    for kind in kinds:
        for v in range(variants):
            spec = SyntheticWorkloadSpec(
                kind,
                scale=int(rng.integers(1, 9)),
                offset=int(rng.integers(0, 2_000_000)),
                seed=int(rng.integers(1, 2**31)),
            )
            workloads.append(
                generate_synthetic_workload(
                    spec, out_dir, program_id=f"{kind}-v{v}", repetitions=repetitions
                )
            )
    (out_dir / "complexity_labels.json").write_text(
        json.dumps({k: [k] for k in kinds}, indent=2) + "\n", encoding="utf-8"
    )
    (out_dir / "labels.json").write_text(
        json.dumps({k: ARCHETYPE_LABELS[k] for k in kinds}, indent=2) + "\n", encoding="utf-8"
    )
    return workloads
