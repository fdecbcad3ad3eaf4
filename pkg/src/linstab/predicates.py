"""Correctness predicates, linearization-pattern detection and run monitors."""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import Configuration, g_lin, is_connected, ntm, nt, ug_lin, untm, validate
from .potentials import lenmax_edge, predicted_psi_delta, psi, psi_e
from .semantics import LIN_KINDS, KeepAlive, LinLeft, LinRight


def is_correct(c: Configuration) -> bool:
    u = c.universe
    for p, s in c.nb.items():
        if s != u.desired(p):
            return False
    for r, q in c.msgs:
        if q not in u.desired(r):
            return False
    return all(q in u.desired(p) for p, q in c.add.items())


def is_undirected_correct(c: Configuration) -> bool:
    return untm(c) == ug_lin(c.universe)


def contains_glin(c: Configuration) -> bool:
    # NT is a subset of NTM, so checking NT covers both
    return g_lin(c.universe) <= nt(c)


def within_glin(c: Configuration) -> bool:
    return ntm(c) <= g_lin(c.universe)


def flags(c: Configuration) -> dict:
    return {
        "correct": is_correct(c),
        "undirected_correct": is_undirected_correct(c),
        "contains_glin": contains_glin(c),
        "within_glin": within_glin(c),
    }


def _fan_out(adj: dict) -> bool:
    for p, out in adj.items():
        left = right = 0
        for q in out:
            if q < p:
                left += 1
            else:
                right += 1
        if left >= 2 or right >= 2:
            return True
    return False


def ntm_out(c: Configuration) -> dict:
    adj = {p: set(s) for p, s in c.nb.items()}
    for r, q in c.msgs:
        adj[r].add(q)
    for p, q in c.add.items():
        adj[p].add(q)
    return adj


def directed_lin_pattern(c: Configuration) -> bool:
    """Some process has two outgoing NTM edges on the same side."""
    return _fan_out(ntm_out(c))


def undirected_lin_pattern(c: Configuration) -> bool:
    """Some process has two UNTM edges on the same side."""
    adj = ntm_out(c)
    both = {p: set(s) for p, s in adj.items()}
    for p, s in adj.items():
        for q in s:
            both[q].add(p)
    return _fan_out(both)


# -- per-step monitor ---------------------------------------------------------

PROPERTIES = (
    "valid",
    "connectivity",
    "monotone_neighborhood",
    "desired_neighbor_kept",
    "desired_edge_kept",
    "edge_length_bound",
    "nearest_neighbor",
    "psi_delta",
    "psi_e_monotone",
    "psi_e_strict",
    "psi_sigma_strict",
    "closure_correct",
    "closure_undirected_correct",
    "closure_contains_glin",
)


@dataclass
class MonitorReport:
    index: int = 0
    violations: list = field(default_factory=list)  # (name, evidence) pairs

    @property
    def names(self) -> list:
        return [name for name, _ in self.violations]

    def add(self, name, evidence=""):
        self.violations.append((name, evidence))

    def __bool__(self):
        # truthy when something went wrong
        return bool(self.violations)


def _nearest(p, s):
    left = max((q for q in s if q < p), default=None)
    right = min((q for q in s if q > p), default=None)
    return left, right


def _known(c: Configuration, p) -> set:
    out = set(c.nb[p])
    if p in c.add:
        out.add(c.add[p])
    out.update(q for (r, q) in c.msgs if r == p)
    return out


def strict_progress_expected(c: Configuration, s) -> bool:
    """True when ``s`` hands some receiver a strictly nearer same-side id.

    Only the two clear-cut cases are covered: the forwarded id of a
    linearization step, and the sender id of a keep-alive.
    """
    if isinstance(s, LinLeft):
        recv, sent = s.j, s.k
    elif isinstance(s, LinRight):
        recv, sent = s.k, s.j
    elif isinstance(s, KeepAlive):
        return any(_improves(c, q, s.actor) for q in c.nb[s.actor])
    else:
        return False
    return _improves(c, recv, sent)


def _improves(c, recv, sent) -> bool:
    known = _known(c, recv)
    if sent > recv:
        return all(q > sent for q in known if q > recv)
    return all(q < sent for q in known if q < recv)


def monitor_step(before: Configuration, s, after: Configuration, index: int = 0) -> MonitorReport:
    """Check every per-step property for the transition ``before --s--> after``."""
    rep = MonitorReport(index)
    u = before.universe

    problems = validate(after)
    if problems:
        rep.add("valid", "; ".join(problems))

    if is_connected(untm(before), u) and not is_connected(untm(after), u):
        rep.add("connectivity", f"untm disconnected by {s}")

    lin_actor = s.actor if isinstance(s, LIN_KINDS) else None
    for p in u.ids:
        nb0, nb1 = before.nb[p], after.nb[p]
        if p != lin_actor and not nb0 <= nb1:
            rep.add("monotone_neighborhood", f"{p}: {sorted(nb0)} -> {sorted(nb1)}")
        lost = (u.desired(p) & nb0) - nb1
        if lost:
            rep.add("desired_neighbor_kept", f"{p} lost {sorted(lost)}")
        l0, r0 = _nearest(p, nb0)
        l1, r1 = _nearest(p, nb1)
        if (l0 is not None and (l1 is None or l1 < l0)) or (r0 is not None and (r1 is None or r1 > r0)):
            rep.add("nearest_neighbor", f"{p}: nearest ({l0},{r0}) -> ({l1},{r1})")

    e0, e1 = ntm(before), ntm(after)
    lost_edges = (g_lin(u) & e0) - e1
    if lost_edges:
        rep.add("desired_edge_kept", f"lost {sorted(lost_edges)}")
    len0, len1 = lenmax_edge(before), lenmax_edge(after)
    if len1 > len0:
        rep.add("edge_length_bound", f"lenmax {len0} -> {len1}")

    psi0, psi1 = psi(before), psi(after)
    want = predicted_psi_delta(before, s)
    if psi1 - psi0 != want:
        rep.add("psi_delta", f"observed {psi1 - psi0}, predicted {want}")
    pe0, pe1 = psi_e(before), psi_e(after)
    if pe1 > pe0:
        rep.add("psi_e_monotone", f"psi_e {pe0} -> {pe1}")
    if strict_progress_expected(before, s):
        if not pe1 < pe0:
            rep.add("psi_e_strict", f"psi_e {pe0} -> {pe1} on {s}")
    n = u.n
    if isinstance(s, LIN_KINDS) or strict_progress_expected(before, s):
        sig0, sig1 = psi0 + n * pe0, psi1 + n * pe1
        if not sig1 < sig0:
            rep.add("psi_sigma_strict", f"psi_sigma {sig0} -> {sig1} on {s}")

    if is_correct(before) and not is_correct(after):
        rep.add("closure_correct", str(s))
    if is_undirected_correct(before) and not is_undirected_correct(after):
        rep.add("closure_undirected_correct", str(s))
    if contains_glin(before) and not contains_glin(after):
        rep.add("closure_contains_glin", str(s))
    return rep


# -- multi-step monitors ------------------------------------------------------


class HorizonWatch:
    """Online checker for properties that span many steps.

    Feed it every step with the actor's neighborhood before and after.
    Tracks: (a) settled processes never keep-alive to undesired ids,
    (b) keep-alive targets never move farther away on either side,
    (c) after a linearization step drops r and r has added the forwarded
    id, r never keep-alives while the linearizing process is in nb(r).
    """

    def __init__(self, universe, initial_nb, horizon=None):
        self.u = universe
        self.horizon = horizon
        self.settled = {p: universe.desired(p) <= set(initial_nb[p]) for p in universe.ids}
        self.last_targets = {}
        self.pending = []  # (dropped r, forwarded q, linearizer p)
        self.active = []  # (r, p, started at index)
        self.violations = {"a": [], "b": [], "c": []}
        self.checked_c = 0

    def observe(self, index, s, nb_before, nb_after):
        u, p = self.u, s.actor
        if isinstance(s, KeepAlive):
            if self.settled[p]:
                bad = sorted(q for q in nb_before if q not in u.desired(p))
                if bad:
                    self.violations["a"].append((index, p, bad))
            l1, r1 = _nearest(p, nb_before)
            if p in self.last_targets:
                l0, r0 = self.last_targets[p]
                if (l0 is not None and l1 is not None and l1 < l0) or (
                    r0 is not None and r1 is not None and r1 > r0
                ):
                    self.violations["b"].append((index, p, (l0, r0), (l1, r1)))
            self.last_targets[p] = (l1, r1)
            live = []
            for r, lin, start in self.active:
                if self.horizon is not None and index - start > self.horizon:
                    continue
                live.append((r, lin, start))
                if r == p and lin in nb_before:
                    self.violations["c"].append((index, r, lin))
            self.active = live
        elif isinstance(s, LinLeft):
            self.pending.append((s.j, s.k, p))
        elif isinstance(s, LinRight):
            self.pending.append((s.k, s.j, p))
        elif s.kind == "add":
            keep = []
            for r, q, lin in self.pending:
                if r == p and q == s.payload:
                    self.active.append((r, lin, index))
                    self.checked_c += 1
                else:
                    keep.append((r, q, lin))
            self.pending = keep
        if not self.settled[p] and u.desired(p) <= set(nb_after):
            self.settled[p] = True

    def report(self) -> dict:
        v = self.violations
        return {
            "settled_no_undesired_keepalive": "violated" if v["a"] else "pass",
            "keepalive_targets_closer": "violated" if v["b"] else "pass",
            "no_keepalive_back_after_lin": "violated" if v["c"] else "unfalsified",
            "lin_episodes_watched": self.checked_c,
            "violations": {k: list(x) for k, x in v.items() if x},
        }


def horizon_monitors(init: Configuration, steps, horizon=None) -> dict:
    """Replay ``steps`` from ``init`` and evaluate the multi-step monitors."""
    from .semantics import apply_step

    watch = HorizonWatch(init.universe, init.nb, horizon)
    c = init
    for i, s in enumerate(steps):
        nxt = apply_step(c, s)
        watch.observe(i, s, c.nb[s.actor], nxt.nb[s.actor])
        c = nxt
    return watch.report()
