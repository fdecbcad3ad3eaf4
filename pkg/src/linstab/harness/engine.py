"""In-place run state with incrementally maintained potentials and monitors.

Every quantity tracked here is a sum of per-process terms that depend only on
that process's own neighborhood, inbox and pending addition.  A step changes
the local state of at most a few processes (the actor, or the receivers of
its messages), so only those terms are recomputed.  The results must agree
with the from-scratch functions in ``potentials`` and ``predicates``; the test
suite checks this on every step of randomized runs.
"""
from __future__ import annotations

from collections import deque

from ..model import Configuration, is_connected, untm
from ..potentials import PotentialReport
from ..semantics import (
    Add,
    KeepAlive,
    LinLeft,
    LinRight,
    MatchNoOp,
    Receive,
    StepNotEnabled,
)


class Engine:
    def __init__(self, init: Configuration, strategy):
        u = init.universe
        self.u = u
        self.ids = u.ids
        self.n = u.n
        self.strategy = strategy
        self.pos = {p: i for i, p in enumerate(u.ids)}
        self.desired = {p: u.desired(p) for p in u.ids}
        self.pred = {p: u.pred(p) for p in u.ids}
        self.succ = {p: u.succ(p) for p in u.ids}
        self.nb = {p: set(init.nb[p]) for p in u.ids}
        self.inbox = {p: {} for p in u.ids}
        for (r, q), m in init.msgs.items():
            self.inbox[r][q] = m
        self.add = dict(init.add)
        self._match = {}
        self._recv = {}
        self.out = {}
        self.psi_p = {}
        self.pe_p = {}
        self.hist = {}
        self.missing = set()
        for p in u.ids:
            self.out[p] = self._out_of(p)
            self.psi_p[p] = self._psi_of(p)
            self.pe_p[p] = self._pe_of(p)
            for q in self.out[p]:
                d = self._dist(p, q)
                self.hist[d] = self.hist.get(d, 0) + 1
            if not self.desired[p] <= self.nb[p]:
                self.missing.add(p)
        self.psi = sum(self.psi_p.values())
        self.psi_e = sum(self.pe_p.values())
        self.lenmax = max((d for d, k in self.hist.items() if k), default=0)
        self.uncovered = {p for p in u.ids[:-1] if not self._covered(p)}
        self.connected = is_connected(untm(init), u)
        self.steps = 0

    # -- local terms ----------------------------------------------------------

    def _dist(self, p, q):
        d = self.pos[p] - self.pos[q]
        return d if d >= 0 else -d

    def _out_of(self, p):
        out = dict.fromkeys(self.nb[p], 1)
        for q, m in self.inbox[p].items():
            out[q] = out.get(q, 0) + m
        a = self.add.get(p)
        if a is not None:
            out[a] = out.get(a, 0) + 1
        return out

    def _psi_of(self, p):
        des = self.desired[p]
        dist = self._dist
        total = 0
        for q in self.nb[p]:
            if q not in des:
                total += dist(p, q)
        for q, m in self.inbox[p].items():
            if q not in des:
                total += dist(p, q) * m
        a = self.add.get(p)
        if a is not None and a not in des:
            total += dist(p, a)
        return total

    def _pe_of(self, p):
        left = right = None
        for q in self.out[p]:
            if q < p:
                if left is None or q > left:
                    left = q
            elif right is None or q < right:
                right = q
        miss = self.n
        total = 0
        if self.pred[p] is not None:
            total += self._dist(p, left) if left is not None else miss
        if self.succ[p] is not None:
            total += self._dist(p, right) if right is not None else miss
        return total

    def _covered(self, p):
        s = self.succ[p]
        return s in self.out[p] or p in self.out[s]

    # -- views ----------------------------------------------------------------

    @property
    def correct(self) -> bool:
        return self.psi == 0 and not self.missing

    def flags(self) -> dict:
        return {
            "correct": self.psi == 0 and not self.missing,
            "undirected_correct": self.psi == 0 and not self.uncovered,
            "contains_glin": not self.missing,
            "within_glin": self.psi == 0,
        }

    def report(self) -> PotentialReport:
        return PotentialReport(self.psi, self.psi_e, self.psi + self.n * self.psi_e, self.lenmax)

    def snapshot(self) -> Configuration:
        msgs = {(r, q): m for r, box in self.inbox.items() for q, m in box.items()}
        return Configuration(self.u, {p: frozenset(s) for p, s in self.nb.items()}, msgs, dict(self.add))

    def msg_total(self) -> int:
        return sum(sum(box.values()) for box in self.inbox.values())

    def match_step(self, p):
        s = self._match.get(p)
        if s is None:
            pair = self.strategy.select(p, self.nb[p], self.u)
            if pair is None:
                s = KeepAlive(p)
            else:
                j, k = pair
                if j < k < p:
                    s = LinLeft(p, j, k)
                elif p < j < k:
                    s = LinRight(p, j, k)
                else:
                    s = MatchNoOp(p)
            self._match[p] = s
        return s

    def enabled(self) -> list:
        """Enabled steps in the same order as ``semantics.enabled_steps``."""
        out = []
        add = self.add
        recv = self._recv
        for p in self.ids:
            out.append(self.match_step(p))
            box = self.inbox[p]
            if box and p not in add:
                for q in sorted(box, key=self.pos.__getitem__):
                    s = recv.get((p, q))
                    if s is None:
                        s = recv[(p, q)] = Receive(p, q)
                    out.append(s)
            if p in add:
                out.append(Add(p, add[p]))
        return out

    # -- stepping -------------------------------------------------------------

    def _send(self, r, q):
        box = self.inbox[r]
        box[q] = box.get(q, 0) + 1

    def _strict_expected(self, s):
        if isinstance(s, KeepAlive):
            return any(self._improves(q, s.actor) for q in self.nb[s.actor])
        if isinstance(s, LinLeft):
            return self._improves(s.j, s.k)
        if isinstance(s, LinRight):
            return self._improves(s.k, s.j)
        return False

    def _improves(self, recv, sent):
        if sent > recv:
            return all(q > sent for q in self.out[recv] if q > recv)
        return all(q < sent for q in self.out[recv] if q < recv)

    def _predicted_delta(self, s):
        p = s.actor
        dist = self._dist
        if isinstance(s, KeepAlive):
            des = self.desired[p]
            return sum(dist(q, p) for q in self.nb[p] if q not in des)
        if isinstance(s, LinLeft):
            gain = dist(s.j, s.k) if s.k != self.succ[s.j] else 0
            return gain - dist(p, s.j)
        if isinstance(s, LinRight):
            gain = dist(s.k, s.j) if s.j != self.pred[s.k] else 0
            return gain - dist(p, s.k)
        if isinstance(s, Add):
            q = s.payload
            if q not in self.desired[p] and q in self.nb[p]:
                return -dist(p, q)
        return 0

    def apply(self, s, monitor: bool = True) -> list:
        """Apply ``s`` in place; return a list of ``(property, evidence)`` violations."""
        p = s.actor
        nb = self.nb
        if isinstance(s, KeepAlive):
            if self._has_lin(p):
                raise StepNotEnabled(f"{s}: {p!r} has a linearization step")
            touched = list(nb[p])
        elif isinstance(s, LinLeft):
            if not (s.j < s.k < p and s.j in nb[p] and s.k in nb[p]):
                raise StepNotEnabled(f"{s}: not a linearization step of nb={sorted(nb[p])}")
            touched = [p, s.j]
        elif isinstance(s, LinRight):
            if not (p < s.j < s.k and s.j in nb[p] and s.k in nb[p]):
                raise StepNotEnabled(f"{s}: not a linearization step of nb={sorted(nb[p])}")
            touched = [p, s.k]
        elif isinstance(s, Receive):
            if self.inbox[p].get(s.payload, 0) <= 0 or p in self.add:
                raise StepNotEnabled(f"{s}: message absent or reception blocked")
            touched = [p]
        elif isinstance(s, Add):
            if self.add.get(p, None) != s.payload or p not in self.add:
                raise StepNotEnabled(f"{s}: pending addition is {self.add.get(p)!r}")
            touched = [p]
        elif isinstance(s, MatchNoOp):
            raise StepNotEnabled(f"{s}: no-op match is unreachable")
        else:
            raise StepNotEnabled(f"unknown step {s!r}")

        if monitor:
            predicted = self._predicted_delta(s)
            strict = self._strict_expected(s)
            before = [(t, frozenset(nb[t]), self.out[t]) for t in touched]
            psi0, pe0, len0 = self.psi, self.psi_e, self.lenmax
            flags0 = self.flags()
            conn0 = self.connected

        # mutate
        if isinstance(s, KeepAlive):
            for j in nb[p]:
                self._send(j, p)
        elif isinstance(s, LinLeft):
            nb[p].discard(s.j)
            self._match.pop(p, None)
            self._send(s.j, s.k)
        elif isinstance(s, LinRight):
            nb[p].discard(s.k)
            self._match.pop(p, None)
            self._send(s.k, s.j)
        elif isinstance(s, Receive):
            box = self.inbox[p]
            if box[s.payload] == 1:
                del box[s.payload]
            else:
                box[s.payload] -= 1
            self.add[p] = s.payload
        else:
            if s.payload not in nb[p]:
                nb[p].add(s.payload)
                self._match.pop(p, None)
            del self.add[p]
        self.steps += 1

        # refresh local terms
        lost_undirected = gained_undirected = False
        hist = self.hist
        for t in touched:
            old = self.out[t]
            new = self._out_of(t)
            self.out[t] = new
            if old.keys() != new.keys():
                for q in old:
                    if q not in new:
                        d = self._dist(t, q)
                        hist[d] -= 1
                        if t not in self.out[q]:
                            lost_undirected = True
                for q in new:
                    if q not in old:
                        d = self._dist(t, q)
                        hist[d] = hist.get(d, 0) + 1
                        if d > self.lenmax:
                            self.lenmax = d
                        if t not in self.out[q]:
                            gained_undirected = True
                for a in (self.pred[t], t):
                    if a is not None and self.succ[a] is not None:
                        if self._covered(a):
                            self.uncovered.discard(a)
                        else:
                            self.uncovered.add(a)
            v = self._psi_of(t)
            self.psi += v - self.psi_p[t]
            self.psi_p[t] = v
            v = self._pe_of(t)
            self.psi_e += v - self.pe_p[t]
            self.pe_p[t] = v
            if self.desired[t] <= nb[t]:
                self.missing.discard(t)
            else:
                self.missing.add(t)
        while self.lenmax > 0 and not hist.get(self.lenmax):
            self.lenmax -= 1
        if lost_undirected or (gained_undirected and not self.connected):
            self.connected = self._check_connected()

        if not monitor:
            return []
        bad = []
        if self.connected is False and conn0:
            bad.append(("connectivity", f"untm disconnected by {s}"))
        lin_actor = p if isinstance(s, (LinLeft, LinRight)) else None
        for t, nb0, out0 in before:
            nb1, out1 = nb[t], self.out[t]
            if t in nb1 or t in out1:
                bad.append(("valid", f"{t} connected to itself"))
            if t != lin_actor and not nb0 <= nb1:
                bad.append(("monotone_neighborhood", f"{t}: {sorted(nb0)} -> {sorted(nb1)}"))
            des = self.desired[t]
            if not (des & nb0) <= nb1:
                bad.append(("desired_neighbor_kept", f"{t} lost {sorted((des & nb0) - nb1)}"))
            if any(q in out0 and q not in out1 for q in des):
                bad.append(("desired_edge_kept", f"{t} lost a desired connection"))
            l0 = max((q for q in nb0 if q < t), default=None)
            r0 = min((q for q in nb0 if q > t), default=None)
            l1 = max((q for q in nb1 if q < t), default=None)
            r1 = min((q for q in nb1 if q > t), default=None)
            if (l0 is not None and (l1 is None or l1 < l0)) or (r0 is not None and (r1 is None or r1 > r0)):
                bad.append(("nearest_neighbor", f"{t}: nearest ({l0},{r0}) -> ({l1},{r1})"))
        if self.lenmax > len0:
            bad.append(("edge_length_bound", f"lenmax {len0} -> {self.lenmax}"))
        if self.psi - psi0 != predicted:
            bad.append(("psi_delta", f"observed {self.psi - psi0}, predicted {predicted}"))
        if self.psi_e > pe0:
            bad.append(("psi_e_monotone", f"psi_e {pe0} -> {self.psi_e}"))
        if strict and not self.psi_e < pe0:
            bad.append(("psi_e_strict", f"psi_e {pe0} -> {self.psi_e} on {s}"))
        if strict or lin_actor is not None:
            n = self.n
            if not self.psi + n * self.psi_e < psi0 + n * pe0:
                bad.append(("psi_sigma_strict", f"on {s}"))
        flags1 = self.flags()
        for name, key in (
            ("closure_correct", "correct"),
            ("closure_undirected_correct", "undirected_correct"),
            ("closure_contains_glin", "contains_glin"),
        ):
            if flags0[key] and not flags1[key]:
                bad.append((name, str(s)))
        return bad

    def _has_lin(self, p):
        left = sum(1 for q in self.nb[p] if q < p)
        return left >= 2 or len(self.nb[p]) - left >= 2

    def _check_connected(self) -> bool:
        adj = {p: set(o) for p, o in self.out.items()}
        for p, o in self.out.items():
            for q in o:
                adj[q].add(p)
        start = self.ids[0]
        seen = {start}
        todo = deque([start])
        while todo:
            for q in adj[todo.popleft()]:
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return len(seen) == self.n
