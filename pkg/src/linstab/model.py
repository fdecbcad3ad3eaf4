"""Identifier universe, configurations and their topology graphs.

A configuration is kept in standard form: per-process neighborhoods, the
multiset of in-transit messages ``(receiver, payload)`` and the partial map
of pending additions.  The set of processes currently adding something is
simply ``add.keys()``.
"""
from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Iterator, Mapping

ProcessId = Hashable
DirectedEdges = frozenset  # of (p, q) tuples
UndirectedEdges = frozenset  # of (p, q) tuples with p < q


class InputError(ValueError):
    """Raised on malformed ids, configurations or configuration files."""


@dataclass(frozen=True)
class IdUniverse:
    """Finite, strictly increasing sequence of process ids."""

    ids: tuple
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(self.ids)
        if not ids:
            raise InputError("universe must contain at least one id")
        for a, b in zip(ids, ids[1:]):
            if not a < b:
                raise InputError(f"ids must be strictly increasing, got {a!r} before {b!r}")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(ids)})

    @classmethod
    def range(cls, n: int, start: int = 1) -> "IdUniverse":
        return cls(tuple(range(start, start + n)))

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def maxdist(self) -> int:
        return len(self.ids) - 1

    @property
    def min(self):
        return self.ids[0]

    @property
    def max(self):
        return self.ids[-1]

    def __contains__(self, p) -> bool:
        try:
            return p in self._index
        except TypeError:
            return False

    def __iter__(self) -> Iterator:
        return iter(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def index(self, p) -> int:
        """1-based position of ``p``."""
        return self._pos(p) + 1

    def _pos(self, p) -> int:
        try:
            return self._index[p]
        except (KeyError, TypeError):
            raise InputError(f"unknown process id {p!r}") from None

    def pred(self, p):
        i = self._pos(p)
        return self.ids[i - 1] if i > 0 else None

    def succ(self, p):
        i = self._pos(p)
        return self.ids[i + 1] if i + 1 < len(self.ids) else None

    def desired(self, p) -> frozenset:
        """``{pred(p), succ(p)}`` without the missing ends."""
        return frozenset(q for q in (self.pred(p), self.succ(p)) if q is not None)

    def dist(self, p, q) -> int:
        return abs(self._pos(p) - self._pos(q))


def g_lin(u: IdUniverse) -> DirectedEdges:
    pairs = list(zip(u.ids, u.ids[1:]))
    return frozenset(pairs) | frozenset((b, a) for a, b in pairs)


def ug_lin(u: IdUniverse) -> UndirectedEdges:
    return frozenset(zip(u.ids, u.ids[1:]))


def undirected(edges: Iterable[tuple]) -> UndirectedEdges:
    return frozenset((p, q) if p < q else (q, p) for p, q in edges)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Immutable global state.

    ``nb`` maps every id to a frozenset, ``msgs`` maps ``(receiver, payload)``
    to a positive multiplicity, ``add`` is the pending-addition partial map.
    Build instances with :meth:`build`; the mappings must not be mutated.
    """

    universe: IdUniverse
    nb: Mapping[Any, frozenset]
    msgs: Mapping[tuple, int]
    add: Mapping[Any, Any]

    @classmethod
    def build(cls, universe: IdUniverse, nb=None, msgs=(), add=None) -> "Configuration":
        if not isinstance(universe, IdUniverse):
            universe = IdUniverse(tuple(universe))
        nb = dict(nb or {})
        full_nb = {p: frozenset(nb.pop(p, ())) for p in universe.ids}
        if nb:
            raise InputError(f"neighborhood given for unknown ids {sorted(map(repr, nb))}")
        if isinstance(msgs, Mapping):
            counts = Counter({tuple(k): v for k, v in msgs.items()})
        else:
            counts = Counter(tuple(m) for m in msgs)
        if any(v < 0 for v in counts.values()):
            raise InputError("negative message multiplicity")
        return cls(universe, full_nb, {k: v for k, v in counts.items() if v > 0}, dict(add or {}))

    @property
    def n(self) -> int:
        return self.universe.n

    def msg_count(self) -> int:
        return sum(self.msgs.values())

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.universe == other.universe
            and self.nb == other.nb
            and self.msgs == other.msgs
            and self.add == other.add
        )

    def __hash__(self):
        return hash(canonical_key(self))

    def __repr__(self):
        nb = {p: sorted(s) for p, s in self.nb.items() if s}
        return f"Configuration(ids={list(self.universe.ids)}, nb={nb}, msgs={dict(self.msgs)}, add={dict(self.add)})"


def validate(c: Configuration) -> list[str]:
    """Return the list of constraint violations of ``c`` (empty iff valid)."""
    u = c.universe
    out = []
    for p, s in c.nb.items():
        if p not in u:
            out.append(f"unknown process {p!r} in nb")
            continue
        if p in s:
            out.append(f"self in neighborhood of {p!r}")
        for q in s:
            if q not in u:
                out.append(f"unknown id {q!r} in neighborhood of {p!r}")
    for key, mult in c.msgs.items():
        if len(key) != 2:
            out.append(f"malformed message {key!r}")
            continue
        x, y = key
        if x not in u or y not in u:
            out.append(f"message {key!r} mentions unknown id")
        elif x == y:
            out.append(f"self-addressed payload {key!r}")
        if not isinstance(mult, int) or mult <= 0:
            out.append(f"bad multiplicity {mult!r} for message {key!r}")
    for p, q in c.add.items():
        if p not in u or q not in u:
            out.append(f"pending addition {p!r}->{q!r} mentions unknown id")
        elif p == q:
            out.append(f"self addition pending at {p!r}")
    return out


def require_valid(c: Configuration) -> None:
    problems = validate(c)
    if problems:
        raise InputError("invalid configuration: " + "; ".join(problems))


def nt(c: Configuration) -> DirectedEdges:
    return frozenset((p, q) for p, s in c.nb.items() for q in s)


def ntm(c: Configuration) -> DirectedEdges:
    return nt(c) | frozenset(c.msgs) | frozenset(c.add.items())


def unt(c: Configuration) -> UndirectedEdges:
    return undirected(nt(c))


def untm(c: Configuration) -> UndirectedEdges:
    return undirected(ntm(c))


def out_connections(c: Configuration, p) -> set:
    """Targets of every outgoing connection of ``p`` (NTM successors)."""
    out = set(c.nb[p])
    a = c.add.get(p)
    if a is not None:
        out.add(a)
    # msgs are keyed by receiver; scanning is fine at the sizes used here
    out.update(q for (r, q) in c.msgs if r == p)
    return out


def is_connected(edges: Iterable[tuple], u: IdUniverse) -> bool:
    """Connectivity of the undirected graph with vertex set ``u``."""
    adj = {p: [] for p in u.ids}
    for p, q in edges:
        adj[p].append(q)
        adj[q].append(p)
    start = u.ids[0]
    seen = {start}
    todo = deque([start])
    while todo:
        for q in adj[todo.popleft()]:
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return len(seen) == u.n


def canonical_key(c: Configuration) -> bytes:
    """Order-independent byte encoding; equal configurations give equal keys."""
    u = c.universe
    pos = u._pos
    nb = [sorted(pos(q) for q in c.nb[p]) for p in u.ids]
    msgs = sorted((pos(r), pos(q), m) for (r, q), m in c.msgs.items())
    add = [pos(c.add[p]) if p in c.add else -1 for p in u.ids]
    body = [[repr(p) for p in u.ids], nb, msgs, add]
    return json.dumps(body, separators=(",", ":")).encode()


# -- JSON file format ---------------------------------------------------------


def config_to_json(c: Configuration) -> dict:
    msgs = []
    for (r, q), m in sorted(c.msgs.items()):
        msgs.extend([[r, q]] * m)
    return {
        "ids": list(c.universe.ids),
        "nb": {str(p): sorted(s) for p, s in c.nb.items() if s},
        "msgs": msgs,
        "add": {str(p): q for p, q in sorted(c.add.items())},
    }


def config_from_json(obj: Any) -> Configuration:
    if not isinstance(obj, dict) or "ids" not in obj:
        raise InputError("configuration object must contain 'ids'")
    try:
        ids = [int(x) for x in obj["ids"]]
        universe = IdUniverse(tuple(ids))
        nb = {int(k): [int(q) for q in v] for k, v in obj.get("nb", {}).items()}
        msgs = [(int(r), int(q)) for r, q in obj.get("msgs", [])]
        add = {int(k): int(v) for k, v in obj.get("add", {}).items()}
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed configuration: {exc}") from None
    c = Configuration.build(universe, nb, msgs, add)
    require_valid(c)
    return c


def load_config(path) -> Configuration:
    try:
        with open(path) as fh:
            return config_from_json(json.load(fh))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None


def dump_config(c: Configuration, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_json(c), fh)
        fh.write("\n")
