"""Initial configurations: the correct one, seeded families, and exhaustive enumeration."""
from __future__ import annotations

import itertools
import random

from .model import Configuration, IdUniverse, InputError, canonical_key, is_connected, untm

KINDS = ("nb", "msg", "add")


def _universe(n: int) -> IdUniverse:
    if n < 1:
        raise InputError("n must be at least 1")
    return IdUniverse.range(n)


def gen_correct(n: int) -> Configuration:
    u = _universe(n)
    return Configuration.build(u, {p: u.desired(p) for p in u.ids})


class _Builder:
    def __init__(self, u):
        self.u = u
        self.nb = {p: set() for p in u.ids}
        self.msgs = []
        self.add = {}

    def place(self, p, q, kind, rng=None):
        """Realize the connection p -> q; falls back when the kind is unavailable."""
        if kind == "add" and p in self.add:
            kind = rng.choice(("nb", "msg")) if rng else "msg"
        if kind == "nb" and q in self.nb[p]:
            kind = "msg"
        if kind == "nb":
            self.nb[p].add(q)
        elif kind == "msg":
            self.msgs.append((p, q))
        else:
            self.add[p] = q

    def build(self):
        return Configuration.build(self.u, self.nb, self.msgs, self.add)


def gen_missing_edges(n: int, seed: int) -> Configuration:
    """One desired connection per consecutive pair, direction and kind by seed."""
    u = _universe(n)
    rng = random.Random(seed)
    b = _Builder(u)
    for a, c in zip(u.ids, u.ids[1:]):
        p, q = (a, c) if rng.random() < 0.5 else (c, a)
        b.place(p, q, rng.choice(KINDS), rng)
    return b.build()


def gen_supergraph(n: int, seed: int, extra: int) -> Configuration:
    """All desired neighbors present plus ``extra`` distinct undesired connections."""
    u = _universe(n)
    if extra < 0:
        raise InputError("extra must be non-negative")
    undesired = [(p, q) for p in u.ids for q in u.ids if p != q and u.dist(p, q) > 1]
    if extra > len(undesired):
        raise InputError(f"extra={extra} exceeds the {len(undesired)} available undesired connections")
    rng = random.Random(seed)
    b = _Builder(u)
    for p in u.ids:
        b.nb[p].update(u.desired(p))
    for p, q in rng.sample(undesired, extra):
        b.place(p, q, rng.choice(KINDS), rng)
    return b.build()


def gen_random_connected(n: int, seed: int, extra: int = 0) -> Configuration:
    """Random spanning tree plus ``extra`` random connections."""
    u = _universe(n)
    if extra < 0:
        raise InputError("extra must be non-negative")
    rng = random.Random(seed)
    b = _Builder(u)
    order = list(u.ids)
    rng.shuffle(order)
    for i in range(1, len(order)):
        a, c = order[i], order[rng.randrange(i)]
        p, q = (a, c) if rng.random() < 0.5 else (c, a)
        b.place(p, q, rng.choice(KINDS), rng)
    if n > 1:
        for _ in range(extra):
            p, q = rng.sample(u.ids, 2)
            b.place(p, q, rng.choice(KINDS), rng)
    return b.build()


def _multisets(keys, mult_cap, total_cap):
    """All count vectors over ``keys`` with entries <= mult_cap and sum <= total_cap."""

    def rec(i, left):
        if i == len(keys):
            yield ()
            return
        for m in range(min(mult_cap, left) + 1):
            for rest in rec(i + 1, left - m):
                yield (m,) + rest

    yield from rec(0, total_cap)


def enumerate_configs(n: int, mult_cap: int = 1, total_cap: int = 6, connected_only: bool = True):
    """Every valid configuration on n processes within the message caps.

    Only configurations whose UNTM is connected are emitted unless
    ``connected_only`` is False.
    """
    if mult_cap < 0 or total_cap < 0:
        raise InputError("caps must be non-negative")
    u = _universe(n)
    ids = u.ids
    others = {p: [q for q in ids if q != p] for p in ids}
    nb_choices = []
    for p in ids:
        subsets = []
        for k in range(len(others[p]) + 1):
            subsets.extend(frozenset(s) for s in itertools.combinations(others[p], k))
        nb_choices.append(subsets)
    add_choices = [[None] + others[p] for p in ids]
    keys = [(p, q) for p in ids for q in others[p]]
    msg_choices = list(_multisets(keys, mult_cap, total_cap))
    seen = set()
    for nbs in itertools.product(*nb_choices):
        for adds in itertools.product(*add_choices):
            for counts in msg_choices:
                c = Configuration(
                    u,
                    dict(zip(ids, nbs)),
                    {k: m for k, m in zip(keys, counts) if m},
                    {p: q for p, q in zip(ids, adds) if q is not None},
                )
                if connected_only and not is_connected(untm(c), u):
                    continue
                key = canonical_key(c)
                if key in seen:
                    continue
                seen.add(key)
                yield c
