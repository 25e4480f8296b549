"""Parsing of ``perf stat -x<SEP>`` machine-readable output."""

from __future__ import annotations

import re
from typing import Optional

from rtheta.errors import ParseError
from rtheta.harness.records import METRICS

NULL_TOKENS = ("<not counted>", "<not supported>")

# perf spells a few events differently across versions
_ALIASES = {
    "cpu-clock": "task-clock",
    "migrations": "cpu-migrations",
    "faults": "page-faults",
    "cs": "context-switches",
    "idle-cycles-frontend": "stalled-cycles-frontend",
    "branch-instructions": "branches",
    "cpu-cycles": "cycles",
}
_PMU_FORM = re.compile(r"^[\w.-]+/([\w.-]+)/[\w]*$")
_MODIFIER = re.compile(r":[ukhGHpPSD]+$")
# conversion of time units to milliseconds
_TIME_UNITS = {"msec": 1.0, "ms": 1.0, "ns": 1e-6, "usec": 1e-3, "us": 1e-3, "sec": 1e3, "s": 1e3}


def normalize_event(name: str) -> str:
    """Canonical spelling of an event: no PMU prefix, no modifier, lowercase."""
    name = name.strip()
    m = _PMU_FORM.match(name)
    if m:
        name = m.group(1)
    name = _MODIFIER.sub("", name).lower()
    return _ALIASES.get(name, name)


def parse_counter_line(line: str, sep: str = ",") -> tuple[str, Optional[float]]:
    """Parse one counter line into ``(event, value)``.

    ``value`` is None for ``<not counted>`` / ``<not supported>``.  Time
    events are converted to milliseconds.  Raises ParseError, keeping the
    line verbatim, for anything that is not a counter line.
    """
    fields = line.rstrip("\r\n").split(sep)
    if len(fields) < 3:
        raise ParseError("expected value, unit and event fields", line)
    raw, unit, event = fields[0].strip(), fields[1].strip(), fields[2].strip()
    if not event:
        raise ParseError("missing event name", line)
    event = normalize_event(event)
    if raw in NULL_TOKENS:
        return event, None
    try:
        value = float(raw)
    except ValueError:
        raise ParseError("unrecognized counter value", line) from None
    if value < 0 or value != value:
        raise ParseError("counter value must be a nonnegative number", line)
    if unit:
        if unit not in _TIME_UNITS:
            raise ParseError(f"unknown unit {unit!r}", line)
        value *= _TIME_UNITS[unit]
    return event, value


def parse_perf_output(text: str, sep: str = ",") -> dict[str, Optional[float]]:
    """Parse a whole ``perf stat`` output file.

    Blank lines and ``#`` comments (perf's header) are skipped; every other
    line must be a counter line.  Repeated events are summed.
    """
    counters: dict[str, Optional[float]] = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        event, value = parse_counter_line(line, sep)
        if event not in counters:
            counters[event] = value
        elif value is not None:
            counters[event] = (counters[event] or 0.0) + value
    return counters


def to_metrics(counters: dict[str, Optional[float]], events=METRICS) -> dict[str, Optional[float]]:
    """Project parsed counters onto the canonical metric map.

    Every canonical metric is present; metrics that were not requested or
    not reported are explicit nulls.
    """
    return {m: (counters.get(m) if m in events else None) for m in METRICS}
