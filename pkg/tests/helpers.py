"""Shared builders for in-memory profile records."""

from rtheta.harness.records import METRICS, ProfileRecord


def make_records(program_id, problem_id, fns, sizes, exit_code=0, reps=1):
    """Records whose metric readings are ``fns[metric](n)``; absent metrics are null."""
    out = []
    for n in sizes:
        for rep in range(reps):
            metrics = {m: (float(fns[m](n)) if m in fns else None) for m in METRICS}
            out.append(
                ProfileRecord(program_id, problem_id, f"n{n}", n, metrics, exit_code,
                              0.01, "test-arch", f"2025-01-01T00:00:{rep:02d}", "perf")
            )
    return out


def full_fns(scale=1.0):
    return {
        "branch-misses": lambda n: scale * (50 * n + 7),
        "branches": lambda n: scale * 3 * n * n,
        "context-switches": lambda n: 4.0,
        "cpu-migrations": lambda n: 0.0,
        "cycles": lambda n: scale * (2 * n**3 + 100),
        "instructions": lambda n: scale * 5 * n * n,
        "page-faults": lambda n: 120.0,
        "stalled-cycles-frontend": lambda n: scale * (n**1.5 + 10),
        "task-clock": lambda n: scale * 0.001 * n * n,
    }
