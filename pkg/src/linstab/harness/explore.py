"""Bounded breadth-first exploration of the reachable state space."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..model import Configuration, canonical_key, require_valid
from ..predicates import is_correct, monitor_step
from ..semantics import all_successor_steps, apply_step, enabled_steps, step_to_json

GOALS = ("all_correct", "no_violation", "reach_correct", "no_deadlock")


@dataclass
class ExplorationResult:
    goal: str
    holds: bool
    states: int = 0
    expanded: int = 0
    boundary: int = 0
    transitions: int = 0
    deadlocks: int = 0
    correct_states: int = 0
    max_depth: int = 0
    partial: bool = False
    counterexample: list | None = None  # steps from the initial configuration
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        if self.counterexample is not None:
            out["counterexample"] = [step_to_json(s) for s in self.counterexample]
        return out


def _over_caps(c: Configuration, mult_cap, total_cap) -> bool:
    if mult_cap is not None and any(m > mult_cap for m in c.msgs.values()):
        return True
    return total_cap is not None and sum(c.msgs.values()) > total_cap


def explore(
    init: Configuration,
    strategy=None,
    mult_cap: int | None = 2,
    total_cap: int | None = None,
    depth: int = 6,
    goal: str = "all_correct",
    max_states: int = 2_000_000,
) -> ExplorationResult:
    """BFS from ``init`` deduplicated by canonical key.

    With ``strategy=None`` every linearization pair is a separate branch;
    otherwise matching follows the given selection.  States whose messages
    exceed the caps are checked but not expanded.  Goals:

    - ``all_correct``: every reached state is correct
    - ``reach_correct``: some reached state is correct
    - ``no_violation``: no per-step monitor fires on any explored transition
    - ``no_deadlock``: every expanded state has an enabled step
    """
    if goal not in GOALS:
        raise ValueError(f"unknown goal {goal!r}")
    require_valid(init)
    res = ExplorationResult(goal, True)
    parent = {canonical_key(init): None}
    todo = deque([(init, 0)])

    def path_to(key):
        steps = []
        while parent[key] is not None:
            key, s = parent[key]
            steps.append(s)
        return steps[::-1]

    while todo:
        c, d = todo.popleft()
        key = canonical_key(c)
        res.states += 1
        res.max_depth = max(res.max_depth, d)
        ok = is_correct(c)
        res.correct_states += ok
        if goal == "all_correct" and not ok and res.holds:
            res.holds = False
            res.counterexample = path_to(key)
        if d >= depth or _over_caps(c, mult_cap, total_cap):
            res.boundary += 1
            continue
        steps = all_successor_steps(c) if strategy is None else enabled_steps(c, strategy)
        res.expanded += 1
        if not steps:
            res.deadlocks += 1
            if goal == "no_deadlock" and res.holds:
                res.holds = False
                res.counterexample = path_to(key)
        for s in steps:
            nxt = apply_step(c, s, check=False)
            res.transitions += 1
            if goal == "no_violation":
                rep = monitor_step(c, s, nxt)
                if rep.violations:
                    res.violations.append((step_to_json(s), rep.names))
                    if res.holds:
                        res.holds = False
                        res.counterexample = path_to(key) + [s]
            k2 = canonical_key(nxt)
            if k2 not in parent:
                if len(parent) >= max_states:
                    res.partial = True
                    continue
                parent[k2] = (key, s)
                todo.append((nxt, d + 1))
    if goal == "reach_correct":
        res.holds = res.correct_states > 0
    return res
