from rtheta.harness.perfstat import parse_counter_line, parse_perf_output
from rtheta.harness.records import (
    FALLBACK_METRICS,
    METRICS,
    TIMEOUT_EXIT_CODE,
    InputManifest,
    ManifestEntry,
    ProfileRecord,
    ProfileStore,
)
from rtheta.harness.runner import fallback_sample, profile_run, profiler_available, run_suite
from rtheta.harness.synthetic import (
    WORKLOAD_KINDS,
    SyntheticWorkloadSpec,
    generate_corpus,
    generate_synthetic_workload,
)

__all__ = [
    "FALLBACK_METRICS",
    "METRICS",
    "TIMEOUT_EXIT_CODE",
    "InputManifest",
    "ManifestEntry",
    "ProfileRecord",
    "ProfileStore",
    "WORKLOAD_KINDS",
    "SyntheticWorkloadSpec",
    "fallback_sample",
    "generate_corpus",
    "generate_synthetic_workload",
    "parse_counter_line",
    "parse_perf_output",
    "profile_run",
    "profiler_available",
    "run_suite",
]
