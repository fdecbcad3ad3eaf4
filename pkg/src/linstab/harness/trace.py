"""Line-delimited JSON traces: one header line, then one record per step."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..model import InputError, config_from_json
from ..potentials import potential_report
from ..predicates import flags, monitor_step
from ..semantics import StepNotEnabled, apply_step, step_from_json


class TraceError(InputError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


@dataclass
class Trace:
    header: dict | None = None
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


class TraceWriter:
    """Writes records as they are produced, flushing each one."""

    def __init__(self, stream):
        self.stream = stream
        self.count = 0

    def write(self, record: dict):
        self.stream.write(json.dumps(record, separators=(",", ":")))
        self.stream.write("\n")
        self.stream.flush()
        self.count += 1


def write_trace(trace: Trace, stream) -> None:
    w = TraceWriter(stream)
    if trace.header is not None:
        w.write({"header": trace.header})
    for rec in trace.records:
        w.write(rec)


def read_trace(path) -> Trace:
    trace = Trace()
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"malformed record ({exc.msg})", lineno) from None
            if not isinstance(obj, dict):
                raise TraceError("record is not an object", lineno)
            if "header" in obj:
                if trace.header is not None or trace.records:
                    raise TraceError("unexpected second header", lineno)
                trace.header = obj["header"]
                continue
            if "i" not in obj or "step" not in obj:
                raise TraceError("record lacks 'i' or 'step'", lineno)
            trace.records.append(obj)
    return trace


def replay(trace: Trace, check_monitors: bool = False) -> list:
    """Rebuild configurations from the header and compare recorded values.

    Returns a list of ``(record index, problem)``; empty means the trace is
    consistent with a from-scratch recomputation.
    """
    if trace.header is None or "init" not in trace.header:
        raise TraceError("trace has no initial configuration")
    c = config_from_json(trace.header["init"])
    problems = []
    want = trace.header.get("potentials")
    if want is not None and potential_report(c).to_json() != want:
        problems.append((-1, f"initial potentials {want} != {potential_report(c).to_json()}"))
    for k, rec in enumerate(trace.records):
        if rec["i"] != k:
            problems.append((k, f"index {rec['i']} out of sequence"))
        s = step_from_json(rec["step"])
        try:
            nxt = apply_step(c, s)
        except StepNotEnabled as exc:
            problems.append((k, f"step not enabled: {exc}"))
            break
        got = potential_report(nxt).to_json()
        if "potentials" in rec and rec["potentials"] != got:
            problems.append((k, f"potentials {rec['potentials']} != recomputed {got}"))
        if "flags" in rec and rec["flags"] != flags(nxt):
            problems.append((k, f"flags {rec['flags']} != recomputed {flags(nxt)}"))
        if check_monitors:
            rep = monitor_step(c, s, nxt, k)
            problems.extend((k, f"monitor {name}: {ev}") for name, ev in rep.violations)
        c = nxt
    return problems
