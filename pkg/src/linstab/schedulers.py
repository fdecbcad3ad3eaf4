"""Fair step schedulers and the keep-alive oracle.

A scheduler is a small stateful object owned by one run:

    sched.start(c)                 # once, with the initial configuration
    s = sched.choose(enabled)      # pick one of the offered steps
    sched.observe(s, c)            # with the configuration s is applied to

Steps are grouped into classes (one per process for matching and adding,
one per distinct in-transit message for receiving); fairness is tracked per
class.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace

from .model import Configuration, InputError
from .semantics import KeepAlive, LinLeft, LinRight, Receive


def step_class(s):
    if isinstance(s, Receive):
        return ("recv", s.actor, s.payload)
    if s.kind == "add":
        return ("add", s.actor)
    return ("match", s.actor)


_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Tiny 64-bit generator.

    Used instead of ``random.Random`` so that the compiled census kernel can
    reproduce the exact same choices as the Python scheduler for a seed.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = z = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


class FairRandom:
    """Random choice weighted by how long each class has been waiting.

    Weight of a class is ``1 + aging * rounds_skipped``; skipped rounds are
    counted only while the class is continuously offered.
    """

    name = "fair"

    def __init__(self, seed: int = 0, aging: int = 1):
        if int(aging) != aging or aging < 0:
            raise InputError("aging must be a non-negative integer")
        self.seed = seed
        self.aging = int(aging)
        self.rng = SplitMix64(seed)
        self.ages = {}

    def start(self, c):
        self.ages = {}

    def choose(self, enabled):
        ages = self.ages
        aging = self.aging
        weights = [1 + aging * ages.get(step_class(s), 0) for s in enabled]
        r = self.rng.next() % sum(weights)
        for pick, w in zip(enabled, weights):
            if r < w:
                break
            r -= w
        chosen = step_class(pick)
        self.ages = {k: self.ages.get(k, 0) + 1 for k in map(step_class, enabled) if k != chosen}
        return pick

    def observe(self, s, c_before):
        pass


class BoundedDelay:
    """Earliest-deadline scheduling with per-message and per-process bounds.

    A message sent at round t is due at ``t + delay_bound``; a process that
    last matched at round t is due to match at ``t + match_bound``.  A
    pending addition inherits the deadline of the oldest message it blocks.
    The most overdue class is forced; otherwise the choice is uniform.
    """

    name = "bounded"

    def __init__(self, seed: int = 0, delay_bound=None, match_bound=None):
        self.seed = seed
        self.delay_bound = delay_bound
        self.match_bound = match_bound
        self.rng = random.Random(seed)

    def start(self, c: Configuration):
        n = c.n
        self.D = self.delay_bound if self.delay_bound is not None else 4 * n
        self.M = self.match_bound if self.match_bound is not None else 2 * n
        if self.D < 0 or self.M < 0:
            raise InputError("bounds must be non-negative")
        self.now = 0
        self.sent = {}  # (receiver, payload) -> deque of send rounds, oldest first
        for key, m in c.msgs.items():
            self.sent[key] = deque([0] * m)
        self.add_since = {p: 0 for p in c.add}
        self.last_match = {p: 0 for p in c.universe.ids}
        self.inbox = {}
        for r, q in c.msgs:
            self.inbox.setdefault(r, set()).add(q)

    def _deadline(self, s):
        p = s.actor
        if isinstance(s, Receive):
            return self.sent[(p, s.payload)][0] + self.D
        if s.kind == "add":
            due = self.add_since[p] + self.D
            for q in self.inbox.get(p, ()):
                due = min(due, self.sent[(p, q)][0] + self.D)
            return due
        return self.last_match[p] + self.M

    def choose(self, enabled):
        best, best_due = None, None
        for s in enabled:
            due = self._deadline(s)
            if due <= self.now and (best_due is None or due < best_due):
                best, best_due = s, due
        if best is None:
            best = enabled[self.rng.randrange(len(enabled))]
        return best

    def _send(self, r, q):
        self.sent.setdefault((r, q), deque()).append(self.now)
        self.inbox.setdefault(r, set()).add(q)

    def observe(self, s, c_before: Configuration):
        p = s.actor
        if isinstance(s, KeepAlive):
            for j in c_before.nb[p]:
                self._send(j, p)
        elif isinstance(s, LinLeft):
            self._send(s.j, s.k)
        elif isinstance(s, LinRight):
            self._send(s.k, s.j)
        if s.group == 0:
            self.last_match[p] = self.now + 1
        elif isinstance(s, Receive):
            key = (p, s.payload)
            q = self.sent[key]
            q.popleft()
            if not q:
                del self.sent[key]
                self.inbox[p].discard(s.payload)
            self.add_since[p] = self.now + 1
        else:
            self.add_since.pop(p, None)
        self.now += 1


def make_scheduler(name: str, seed: int = 0, aging: int = 1, delay_bound=None, match_bound=None):
    if name == "fair":
        return FairRandom(seed, aging)
    if name == "bounded":
        return BoundedDelay(seed, delay_bound, match_bound)
    raise InputError(f"unknown scheduler {name!r}")


# -- oracle -------------------------------------------------------------------

SUPPRESS, GRANT, FREE = "suppress", "grant", "free"


@dataclass(frozen=True)
class Grant:
    grantee: object
    activation: tuple  # pairs (x, y) meaning y must be in nb(x)
    used: bool = False

    def active(self, nb) -> bool:
        return all(y in nb[x] for x, y in self.activation)


@dataclass(frozen=True)
class OracleState:
    mode: str = FREE
    grants: tuple = field(default_factory=tuple)

    def live_grantees(self) -> list:
        return sorted({g.grantee for g in self.grants if not g.used})

    def decision(self) -> dict:
        return {"oracle": self.mode, "grantees": self.live_grantees()}


def _side_fanout(adj) -> bool:
    for p, out in adj.items():
        left = right = 0
        for q in out:
            if q < p:
                left += 1
                if left == 2:
                    return True
            else:
                right += 1
                if right == 2:
                    return True
    return False


def _incoming(adj) -> dict:
    inc = {p: set() for p in adj}
    for p, out in adj.items():
        for q in out:
            inc[q].add(p)
    return inc


def find_grants(adj) -> tuple:
    """Grants resolving an undirected-only linearization pattern.

    ``adj`` maps each process to its NTM out-neighbors.  Prefers a single
    sender: q with (q, p) and (p, r) in NTM, q and r on the same side of p;
    q is allowed to keep-alive once r in nb(p) and p in nb(q).  Otherwise two
    senders q < r on the same side of p, both pointing at p.  The
    lexicographically smallest triple (p, q, r) is used.
    """
    inc = _incoming(adj)
    for p in sorted(adj):
        for q in sorted(inc[p]):
            for r in sorted(adj[p]):
                if r != q and (q < p) == (r < p):
                    return (Grant(q, ((p, r), (q, p))),)
    for p in sorted(adj):
        senders = sorted(inc[p])
        for i, q in enumerate(senders):
            for r in senders[i + 1:]:
                if (q < p) == (r < p):
                    act = ((q, p), (r, p))
                    return (Grant(q, act), Grant(r, act))
    return ()


def ntm_adjacency(c: Configuration) -> dict:
    adj = {p: set(s) for p, s in c.nb.items()}
    for r, q in c.msgs:
        adj[r].add(q)
    for p, q in c.add.items():
        adj[p].add(q)
    return adj


def oracle_filter(o: OracleState, c: Configuration, enabled, adj=None):
    """Return ``(allowed steps, new oracle state)`` for configuration ``c``.

    ``adj`` may carry a precomputed NTM adjacency (any mapping of process to
    iterable of out-neighbors); ``c`` then only needs a ``nb`` mapping.
    """
    if adj is None:
        adj = ntm_adjacency(c)
    if _side_fanout(adj):
        o = OracleState(SUPPRESS)
        return [s for s in enabled if not isinstance(s, KeepAlive)], o
    both = {p: set(out) for p, out in adj.items()}
    for p, out in adj.items():
        for q in out:
            both[q].add(p)
    if not _side_fanout(both):
        return list(enabled), OracleState(FREE)
    if o.mode != GRANT:
        o = OracleState(GRANT, find_grants(adj))
    ok = {g.grantee for g in o.grants if not g.used and g.active(c.nb)}
    allowed = [s for s in enabled if not isinstance(s, KeepAlive) or s.actor in ok]
    if not allowed:
        # the episode cannot make progress any more: start a fresh one
        o = OracleState(GRANT, find_grants(adj))
        ok = {g.grantee for g in o.grants if not g.used and g.active(c.nb)}
        allowed = [s for s in enabled if not isinstance(s, KeepAlive) or s.actor in ok]
    return allowed, o


def oracle_commit(o: OracleState, s) -> OracleState:
    """Mark the grant of ``s``'s actor used when ``s`` is a granted keep-alive."""
    if o.mode != GRANT or not isinstance(s, KeepAlive):
        return o
    grants = []
    hit = False
    for g in o.grants:
        if not hit and not g.used and g.grantee == s.actor:
            g = replace(g, used=True)
            hit = True
        grants.append(g)
    return OracleState(GRANT, tuple(grants))


class Oracle:
    """Mutable wrapper around :func:`oracle_filter` for use inside a run."""

    def __init__(self):
        self.state = OracleState()

    def filter(self, c, enabled, adj=None):
        allowed, self.state = oracle_filter(self.state, c, enabled, adj)
        return allowed

    def commit(self, s):
        self.state = oracle_commit(self.state, s)

    def decision(self) -> dict:
        return self.state.decision()
