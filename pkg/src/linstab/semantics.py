"""Step kinds, linearization-pair selection, enabled steps and pure step application."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import ClassVar

from .model import Configuration, InputError


class StepNotEnabled(ValueError):
    """Raised when a step is applied to a configuration where it is not enabled."""


# -- steps --------------------------------------------------------------------

# match steps sort before receives, receives before adds
_MATCH, _RECEIVE, _ADD = 0, 1, 2


@dataclass(frozen=True)
class KeepAlive:
    actor: object
    kind: ClassVar[str] = "keepalive"
    group: ClassVar[int] = _MATCH


@dataclass(frozen=True)
class LinLeft:
    """``actor`` drops ``j`` and tells ``j`` about ``k`` (j < k < actor)."""

    actor: object
    j: object
    k: object
    kind: ClassVar[str] = "lin_left"
    group: ClassVar[int] = _MATCH


@dataclass(frozen=True)
class LinRight:
    """``actor`` drops ``k`` and tells ``k`` about ``j`` (actor < j < k)."""

    actor: object
    j: object
    k: object
    kind: ClassVar[str] = "lin_right"
    group: ClassVar[int] = _MATCH


@dataclass(frozen=True)
class MatchNoOp:
    actor: object
    kind: ClassVar[str] = "noop"
    group: ClassVar[int] = _MATCH


@dataclass(frozen=True)
class Receive:
    actor: object
    payload: object
    kind: ClassVar[str] = "receive"
    group: ClassVar[int] = _RECEIVE


@dataclass(frozen=True)
class Add:
    actor: object
    payload: object
    kind: ClassVar[str] = "add"
    group: ClassVar[int] = _ADD


Step = KeepAlive | LinLeft | LinRight | MatchNoOp | Receive | Add
MATCH_KINDS = (KeepAlive, LinLeft, LinRight, MatchNoOp)
LIN_KINDS = (LinLeft, LinRight)
_BY_KIND = {cls.kind: cls for cls in (KeepAlive, LinLeft, LinRight, MatchNoOp, Receive, Add)}


def step_to_json(s) -> dict:
    out = {"kind": s.kind, "actor": s.actor}
    if isinstance(s, LIN_KINDS):
        out["j"], out["k"] = s.j, s.k
    elif isinstance(s, (Receive, Add)):
        out["payload"] = s.payload
    return out


def step_from_json(obj) -> Step:
    try:
        cls = _BY_KIND[obj["kind"]]
        if cls in LIN_KINDS:
            return cls(obj["actor"], obj["j"], obj["k"])
        if cls in (Receive, Add):
            return cls(obj["actor"], obj["payload"])
        return cls(obj["actor"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed step {obj!r}") from exc


def step_sort_key(u, s):
    payload = getattr(s, "payload", None)
    return (u.index(s.actor), s.group, -1 if payload is None else u.index(payload))


# -- neighborhoods and selection ----------------------------------------------


def left_n(p, y) -> set:
    return {q for q in y if q < p}


def right_n(p, y) -> set:
    return {q for q in y if q > p}


def find_lin(p, y) -> set:
    """All pairs ``(q, r)`` with ``q < r`` lying on the same side of ``p``."""
    out = set()
    for side in (sorted(left_n(p, y)), sorted(right_n(p, y))):
        for i, q in enumerate(side):
            for r in side[i + 1:]:
                out.add((q, r))
    return out


class AllMin:
    """Lexicographically smallest linearization pair."""

    name = "all-min"

    def select(self, p, y, universe=None):
        left = sorted(q for q in y if q < p)
        if len(left) >= 2:
            return (left[0], left[1])
        right = sorted(q for q in y if q > p)
        if len(right) >= 2:
            return (right[0], right[1])
        return None


class AllRandom:
    """Seeded uniform pick among all linearization pairs.

    The pick is a fixed function of (seed, p, y), so repeated queries on the
    same neighborhood agree and a run is reproducible from its seed.
    """

    name = "all-random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def select(self, p, y, universe=None):
        left = sorted(q for q in y if q < p)
        right = sorted(q for q in y if q > p)
        nl = len(left) * (len(left) - 1) // 2
        nr = len(right) * (len(right) - 1) // 2
        if nl + nr == 0:
            return None
        h = hashlib.blake2b(repr((self.seed, p, left, right)).encode(), digest_size=8)
        i = int.from_bytes(h.digest(), "little") % (nl + nr)
        side = left
        if i >= nl:
            i -= nl
            side = right
        # unrank i among pairs (a, b), a < b, in lexicographic order
        a = 0
        while i >= len(side) - 1 - a:
            i -= len(side) - 1 - a
            a += 1
        return (side[a], side[a + 1 + i])


class MaxRule:
    """Remove the farthest neighbor on a crowded side, handing it the next one.

    Left side: (min, second min).  Right side: (second max, max).  When both
    sides qualify the longer removed edge wins, ties going left.
    """

    name = "max"

    def __init__(self, universe=None):
        self.universe = universe

    def select(self, p, y, universe=None):
        left = sorted(q for q in y if q < p)
        right = sorted(q for q in y if q > p)
        lpair = (left[0], left[1]) if len(left) >= 2 else None
        rpair = (right[-2], right[-1]) if len(right) >= 2 else None
        if lpair and rpair:
            dist = (universe or self.universe or _Abs).dist
            if dist(p, right[-1]) > dist(p, left[0]):
                return rpair
            return lpair
        return lpair or rpair


class _Abs:
    # plain integer distance, used only when no universe is at hand
    @staticmethod
    def dist(p, q):
        return abs(p - q)


def make_strategy(name: str, seed: int = 0, universe=None):
    if name in ("all-min", "min"):
        return AllMin()
    if name in ("all-random", "random"):
        return AllRandom(seed)
    if name in ("max", "max-rule"):
        return MaxRule(universe)
    raise InputError(f"unknown select strategy {name!r}")


def select_pair(strategy, p, y, universe=None):
    return strategy.select(p, y, universe)


def match_outcome(c: Configuration, p, strategy) -> Step:
    pair = strategy.select(p, c.nb[p], c.universe)
    if pair is None:
        return KeepAlive(p)
    j, k = pair
    if j < k < p:
        return LinLeft(p, j, k)
    if p < j < k:
        return LinRight(p, j, k)
    return MatchNoOp(p)


def enabled_steps(c: Configuration, strategy) -> list:
    steps = [match_outcome(c, p, strategy) for p in c.universe.ids]
    steps += [Receive(r, q) for (r, q) in c.msgs if r not in c.add]
    steps += [Add(p, q) for p, q in c.add.items()]
    u = c.universe
    steps.sort(key=lambda s: step_sort_key(u, s))
    return steps


def all_successor_steps(c: Configuration) -> list:
    """Enabled steps under every possible selection (each linearization pair)."""
    steps = []
    for p in c.universe.ids:
        pairs = sorted(find_lin(p, c.nb[p]))
        if not pairs:
            steps.append(KeepAlive(p))
        for j, k in pairs:
            steps.append(LinLeft(p, j, k) if k < p else LinRight(p, j, k))
    steps += [Receive(r, q) for (r, q) in c.msgs if r not in c.add]
    steps += [Add(p, q) for p, q in c.add.items()]
    u = c.universe
    steps.sort(key=lambda s: (step_sort_key(u, s), getattr(s, "j", None) or 0, getattr(s, "k", None) or 0))
    return steps


def check_enabled(c: Configuration, s) -> None:
    """Raise StepNotEnabled unless ``s`` is a legal transition from ``c``.

    Linearization pairs are accepted for any selection, i.e. whenever the
    pair is one of the actor's possible linearization steps.
    """
    if s.actor not in c.universe:
        raise StepNotEnabled(f"{s}: unknown actor")
    p = s.actor
    nb = c.nb[p]
    if isinstance(s, KeepAlive):
        if find_lin(p, nb):
            raise StepNotEnabled(f"{s}: {p!r} has a linearization step, keep-alive not enabled")
    elif isinstance(s, LinLeft):
        if not (s.j < s.k < p and s.j in nb and s.k in nb):
            raise StepNotEnabled(f"{s}: needs j < k < actor with j, k in nb={sorted(nb)}")
    elif isinstance(s, LinRight):
        if not (p < s.j < s.k and s.j in nb and s.k in nb):
            raise StepNotEnabled(f"{s}: needs actor < j < k with j, k in nb={sorted(nb)}")
    elif isinstance(s, MatchNoOp):
        raise StepNotEnabled(f"{s}: no-op match is unreachable for the built-in selections")
    elif isinstance(s, Receive):
        if c.msgs.get((p, s.payload), 0) <= 0:
            raise StepNotEnabled(f"{s}: no message ({p!r},{s.payload!r}) in transit")
        if p in c.add:
            raise StepNotEnabled(f"{s}: reception blocked by pending addition of {c.add[p]!r}")
    elif isinstance(s, Add):
        if c.add.get(p, None) != s.payload or p not in c.add:
            raise StepNotEnabled(f"{s}: pending addition is {c.add.get(p)!r}")
    else:
        raise StepNotEnabled(f"unknown step {s!r}")


def apply_step(c: Configuration, s, check: bool = True) -> Configuration:
    """Return the successor configuration; ``c`` is left untouched."""
    if check:
        check_enabled(c, s)
    p = s.actor
    nb, msgs, add = c.nb, c.msgs, c.add
    if isinstance(s, KeepAlive):
        msgs = dict(msgs)
        for j in c.nb[p]:
            msgs[(j, p)] = msgs.get((j, p), 0) + 1
    elif isinstance(s, LinLeft):
        nb = dict(nb)
        nb[p] = nb[p] - {s.j}
        msgs = dict(msgs)
        msgs[(s.j, s.k)] = msgs.get((s.j, s.k), 0) + 1
    elif isinstance(s, LinRight):
        nb = dict(nb)
        nb[p] = nb[p] - {s.k}
        msgs = dict(msgs)
        msgs[(s.k, s.j)] = msgs.get((s.k, s.j), 0) + 1
    elif isinstance(s, Receive):
        msgs = dict(msgs)
        key = (p, s.payload)
        if msgs[key] == 1:
            del msgs[key]
        else:
            msgs[key] -= 1
        add = dict(add)
        add[p] = s.payload
    elif isinstance(s, Add):
        nb = dict(nb)
        nb[p] = nb[p] | {s.payload}
        add = dict(add)
        del add[p]
    return Configuration(c.universe, nb, msgs, add)


__all__ = [
    "Step", "KeepAlive", "LinLeft", "LinRight", "MatchNoOp", "Receive", "Add",
    "StepNotEnabled", "left_n", "right_n", "find_lin", "select_pair",
    "AllMin", "AllRandom", "MaxRule", "make_strategy", "match_outcome",
    "enabled_steps", "all_successor_steps", "apply_step", "check_enabled",
    "step_to_json", "step_from_json",
]
