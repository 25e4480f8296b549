"""Single-executor profiling of binaries against input suites."""

from __future__ import annotations

import logging
import os
import resource
import shutil
import signal
import subprocess
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from rtheta.errors import ProfilerUnavailable, SpawnError
from rtheta.harness.perfstat import parse_perf_output, to_metrics
from rtheta.harness.records import (
    METRICS,
    PROFILER_ERROR_EXIT_CODE,
    TIMEOUT_EXIT_CODE,
    InputManifest,
    ProfileRecord,
    ProfileStore,
    default_arch_tag,
)

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0
_PERMISSION_HINTS = ("perf_event_paranoid", "Permission denied", "No permission", "not supported")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _command(binary, input_path, input_mode: str) -> list[str]:
    cmd = [str(binary)]
    if input_mode == "argv":
        cmd.append(str(input_path))
    return cmd


def _spawn(cmd, input_path, input_mode, timeout):
    """Run ``cmd`` to completion; returns (exit_code, wall_seconds, stderr)."""
    stdin = open(input_path, "rb") if input_mode == "stdin" else subprocess.DEVNULL
    start = time.perf_counter()
    try:
        # own session so a timeout takes down the profiler and its workload together
        proc = subprocess.Popen(
            cmd,
            stdin=stdin,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            start_new_session=True,
        )
    except OSError as exc:
        raise SpawnError(f"cannot run {cmd[0]}: {exc}") from exc
    finally:
        if stdin is not subprocess.DEVNULL:
            stdin.close()
    try:
        _, stderr = proc.communicate(timeout=timeout)
        code = proc.returncode
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        _, stderr = proc.communicate()
        code = TIMEOUT_EXIT_CODE
    return code, time.perf_counter() - start, stderr


def profile_run(
    binary,
    input_path,
    size_n: int,
    events: Sequence[str] = METRICS,
    *,
    program_id: Optional[str] = None,
    problem_id: str = "",
    input_id: Optional[str] = None,
    input_mode: str = "stdin",
    timeout: float = DEFAULT_TIMEOUT,
    profiler: Sequence[str] = ("perf",),
    sep: str = ",",
    arch_tag: Optional[str] = None,
) -> ProfileRecord:
    """Run ``binary`` once under ``perf stat`` and return its record.

    ``profiler`` is the command prefix used to invoke perf.  A non-zero
    exit of the profiled program is recorded on the record, not raised.
    """
    unknown = set(events) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown events {sorted(unknown)}")
    if shutil.which(profiler[0]) is None:
        raise ProfilerUnavailable(f"profiler {profiler[0]!r} not found")
    with tempfile.TemporaryDirectory(prefix="rtheta-perf-") as tmp:
        out = Path(tmp) / "stat.csv"
        cmd = [
            *profiler, "stat", "-x", sep, "-o", str(out), "-e", ",".join(events), "--",
            *_command(binary, input_path, input_mode),
        ]
        stamp = _utc_now()
        code, wall, stderr = _spawn(cmd, input_path, input_mode, timeout)
        text = out.read_text(encoding="utf-8", errors="replace") if out.exists() else ""
    counters = parse_perf_output(text, sep)
    if not counters:
        msg = stderr.decode(errors="replace").strip()
        if code != TIMEOUT_EXIT_CODE:
            if any(h in msg for h in _PERMISSION_HINTS) or not msg or code in (126, 127):
                raise ProfilerUnavailable(f"perf produced no counters: {msg or 'empty output'}")
            # perf reports a workload it could not exec on stderr
            if "No such file" in msg or "not found" in msg:
                raise SpawnError(msg)
    binary = Path(binary)
    return ProfileRecord(
        program_id=program_id or binary.name,
        problem_id=problem_id,
        input_id=input_id or Path(input_path).name,
        size_n=int(size_n),
        metrics=to_metrics(counters, events),
        exit_code=code,
        wall_seconds=wall,
        arch_tag=arch_tag or default_arch_tag(),
        timestamp=stamp,
        sampler="perf",
    )


def fallback_sample(
    binary,
    input_path,
    size_n: int,
    *,
    program_id: Optional[str] = None,
    problem_id: str = "",
    input_id: Optional[str] = None,
    input_mode: str = "stdin",
    timeout: float = DEFAULT_TIMEOUT,
    arch_tag: Optional[str] = None,
) -> ProfileRecord:
    """Run ``binary`` once and read its kernel resource accounting.

    Only task-clock (user + system CPU time), context-switches (voluntary
    and involuntary) and page-faults (minor and major) are available; the
    hardware counters are left null.  Children are measured as the delta of
    ``RUSAGE_CHILDREN``, which is exact because runs never overlap.
    """
    before = resource.getrusage(resource.RUSAGE_CHILDREN)
    stamp = _utc_now()
    code, wall, _ = _spawn(_command(binary, input_path, input_mode), input_path, input_mode, timeout)
    after = resource.getrusage(resource.RUSAGE_CHILDREN)
    cpu_ms = ((after.ru_utime - before.ru_utime) + (after.ru_stime - before.ru_stime)) * 1000.0
    metrics = dict.fromkeys(METRICS)
    metrics["task-clock"] = round(cpu_ms, 6)
    metrics["context-switches"] = float(
        (after.ru_nvcsw - before.ru_nvcsw) + (after.ru_nivcsw - before.ru_nivcsw)
    )
    metrics["page-faults"] = float(
        (after.ru_minflt - before.ru_minflt) + (after.ru_majflt - before.ru_majflt)
    )
    return ProfileRecord(
        program_id=program_id or Path(binary).name,
        problem_id=problem_id,
        input_id=input_id or Path(input_path).name,
        size_n=int(size_n),
        metrics=metrics,
        exit_code=code,
        wall_seconds=wall,
        arch_tag=arch_tag or default_arch_tag(),
        timestamp=stamp,
        sampler="fallback",
    )


def run_suite(
    binary,
    manifest: InputManifest,
    events: Sequence[str] = METRICS,
    *,
    sampler: str = "perf",
    store: Optional[ProfileStore] = None,
    program_id: Optional[str] = None,
    timeout: float = DEFAULT_TIMEOUT,
    profiler: Sequence[str] = ("perf",),
    arch_tag: Optional[str] = None,
    warmup: int = 1,
) -> list[ProfileRecord]:
    """Profile every (entry, repetition) of ``manifest`` strictly in order.

    Records are appended to ``store`` as each run completes.  Only a
    profiler failure on the very first run aborts the suite.  ``warmup``
    unrecorded runs on the first entry come first, so a cold page cache
    does not inflate the first reading.
    """
    if sampler not in ("perf", "fallback"):
        raise ValueError(f"sampler must be 'perf' or 'fallback', got {sampler!r}")
    program_id = program_id or Path(binary).name
    arch_tag = arch_tag or default_arch_tag()
    records: list[ProfileRecord] = []
    if manifest.entries:
        first = manifest.entries[0]
        for _ in range(warmup):
            _spawn(_command(binary, first.path, manifest.input_mode), first.path,
                   manifest.input_mode, timeout)
    for entry in manifest.entries:
        for rep in range(entry.repetitions):
            common = dict(
                program_id=program_id,
                problem_id=manifest.problem_id,
                input_id=entry.input_id,
                input_mode=manifest.input_mode,
                timeout=timeout,
                arch_tag=arch_tag,
            )
            if sampler == "fallback":
                rec = fallback_sample(binary, entry.path, entry.size_n, **common)
            else:
                try:
                    rec = profile_run(
                        binary, entry.path, entry.size_n, events, profiler=profiler, **common
                    )
                except ProfilerUnavailable:
                    if not records:
                        raise
                    log.warning("profiler failed on %s rep %d", entry.input_id, rep)
                    rec = ProfileRecord(
                        program_id=program_id,
                        problem_id=manifest.problem_id,
                        input_id=entry.input_id,
                        size_n=entry.size_n,
                        metrics=dict.fromkeys(METRICS),
                        exit_code=PROFILER_ERROR_EXIT_CODE,
                        wall_seconds=0.0,
                        arch_tag=arch_tag,
                        timestamp=_utc_now(),
                        sampler="perf",
                    )
            if rec.exit_code != 0:
                log.info("%s on %s exited with %d", program_id, entry.input_id, rec.exit_code)
            records.append(rec)
            if store is not None:
                store.append(rec)
    return records


def profiler_available(profiler: Sequence[str] = ("perf",)) -> bool:
    """True when ``perf stat`` can count instructions for a trivial process."""
    if shutil.which(profiler[0]) is None:
        return False
    try:
        with tempfile.TemporaryDirectory() as tmp:
            dummy = Path(tmp) / "in"
            dummy.write_text("")
            rec = profile_run("/bin/true", dummy, 1, ["instructions"], profiler=profiler, timeout=10)
        return rec.metrics["instructions"] is not None
    except (ProfilerUnavailable, SpawnError, OSError):
        return False
