"""Potential functions over configurations and longest-edge statistics.

``psi`` sums the lengths of all undesired connections, ``psi_e`` measures how
far each process is from knowing its nearest neighbor on either side, and
``psi_sigma`` combines them as ``psi + n * psi_e``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass

from .model import Configuration, ntm
from .semantics import Add, KeepAlive, LinLeft, LinRight


@dataclass(frozen=True)
class PotentialReport:
    psi: int
    psi_e: int
    psi_sigma: int
    lenmax: int

    def to_json(self) -> dict:
        return asdict(self)


def rec_multiset(c: Configuration, p) -> Counter:
    """Payloads of in-transit messages to ``p`` that are not desired for ``p``."""
    desired = c.universe.desired(p)
    out = Counter()
    for (r, q), m in c.msgs.items():
        if r == p and q not in desired:
            out[q] += m
    return out


def psi_p(c: Configuration, p) -> int:
    u = c.universe
    desired = u.desired(p)
    total = sum(u.dist(p, q) for q in c.nb[p] if q not in desired)
    total += sum(u.dist(p, q) * m for q, m in rec_multiset(c, p).items())
    a = c.add.get(p)
    if a is not None and a not in desired:
        total += u.dist(p, a)
    return total


def psi(c: Configuration) -> int:
    u = c.universe
    total = 0
    for p, s in c.nb.items():
        desired = u.desired(p)
        total += sum(u.dist(p, q) for q in s if q not in desired)
    for (r, q), m in c.msgs.items():
        if q not in u.desired(r):
            total += u.dist(r, q) * m
    for p, q in c.add.items():
        if q not in u.desired(p):
            total += u.dist(p, q)
    return total


def _nm(c: Configuration, p) -> set:
    out = set(c.nb[p])
    if p in c.add:
        out.add(c.add[p])
    out.update(q for (r, q) in c.msgs if r == p)
    return out


def left_nm(c: Configuration, p) -> set:
    return {q for q in _nm(c, p) if q < p}


def right_nm(c: Configuration, p) -> set:
    return {q for q in _nm(c, p) if q > p}


def shortest_left(c: Configuration, p):
    left = left_nm(c, p)
    return max(left) if left else None


def shortest_right(c: Configuration, p):
    right = right_nm(c, p)
    return min(right) if right else None


def side_penalties(u, p, nearest_left, nearest_right) -> int:
    """Per-process nearest-neighbor term given the nearest known ids (or None)."""
    miss = u.maxdist + 1
    if p == u.min:
        left = 0
    else:
        left = u.dist(p, nearest_left) if nearest_left is not None else miss
    if p == u.max:
        right = 0
    else:
        right = u.dist(p, nearest_right) if nearest_right is not None else miss
    return left + right


def psi_e_p(c: Configuration, p) -> int:
    return side_penalties(c.universe, p, shortest_left(c, p), shortest_right(c, p))


def psi_e(c: Configuration) -> int:
    u = c.universe
    known = {p: set(s) for p, s in c.nb.items()}
    for p, q in c.add.items():
        known[p].add(q)
    for r, q in c.msgs:
        known[r].add(q)
    total = 0
    for p in u.ids:
        ks = known[p]
        nl = max((q for q in ks if q < p), default=None)
        nr = min((q for q in ks if q > p), default=None)
        total += side_penalties(u, p, nl, nr)
    return total


def psi_sigma(c: Configuration) -> int:
    return psi(c) + c.n * psi_e(c)


def lenmax_edge(c: Configuration) -> int:
    u = c.universe
    return max((u.dist(p, q) for p, q in ntm(c)), default=0)


def max_edges(c: Configuration) -> frozenset:
    u = c.universe
    edges = ntm(c)
    top = max((u.dist(p, q) for p, q in edges), default=0)
    return frozenset(e for e in edges if u.dist(*e) == top) if edges else frozenset()


def potential_report(c: Configuration) -> PotentialReport:
    a, b = psi(c), psi_e(c)
    return PotentialReport(a, b, a + c.n * b, lenmax_edge(c))


def predicted_psi_delta(c: Configuration, s) -> int:
    """Exact change of ``psi`` caused by applying ``s`` to ``c``."""
    u = c.universe
    p = s.actor
    if isinstance(s, KeepAlive):
        desired = u.desired(p)
        return sum(u.dist(q, p) for q in c.nb[p] if q not in desired)
    if isinstance(s, LinLeft):
        gain = u.dist(s.j, s.k) if s.k != u.succ(s.j) else 0
        return gain - u.dist(p, s.j)
    if isinstance(s, LinRight):
        gain = u.dist(s.k, s.j) if s.j != u.pred(s.k) else 0
        return gain - u.dist(p, s.k)
    if isinstance(s, Add):
        q = s.payload
        if q not in u.desired(p) and q in c.nb[p]:
            return -u.dist(p, q)
        return 0
    # Receive and no-op leave psi unchanged
    return 0
