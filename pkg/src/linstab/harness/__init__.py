"""Runs, exploration, census and trace I/O."""
from .explore import explore
from .simulate import RunResult, simulate
from .trace import Trace, TraceError, read_trace, replay, write_trace

__all__ = ["simulate", "RunResult", "explore", "read_trace", "write_trace", "replay", "Trace", "TraceError"]
