"""Simulator, invariant checker and bounded explorer for asynchronous list linearization."""
from .model import Configuration, IdUniverse, InputError
from .semantics import Add, KeepAlive, LinLeft, LinRight, MatchNoOp, Receive, apply_step, enabled_steps

__all__ = [
    "Configuration", "IdUniverse", "InputError",
    "KeepAlive", "LinLeft", "LinRight", "MatchNoOp", "Receive", "Add",
    "apply_step", "enabled_steps",
]
