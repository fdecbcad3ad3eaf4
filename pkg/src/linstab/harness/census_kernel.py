"""Compiled run loop for exhaustive small-n convergence studies.

Implements exactly the step semantics of ``Engine`` with the all-min
selection and the ``FairRandom`` scheduler (same generator, same step order,
same weights), so a run here and ``simulate(..., tail=0)`` with the same seed
take identical steps.  Processes are positions 0..n-1; neighborhoods are bit
masks, so n must stay below 63.

Per step the kernel recomputes the potentials from scratch and checks the
per-step monitors that are cheap at this size.
"""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

# violation bits
V_PSI_DELTA = 1
V_PSI_E = 2
V_LENMAX = 4
V_DESIRED_KEPT = 8
V_NEAREST = 16
V_CONNECTIVITY = 32
V_CLOSURE = 64
V_NOT_ENABLED = 128

VIOLATION_NAMES = {
    V_PSI_DELTA: "psi_delta",
    V_PSI_E: "psi_e_monotone",
    V_LENMAX: "edge_length_bound",
    V_DESIRED_KEPT: "desired_neighbor_kept",
    V_NEAREST: "nearest_neighbor",
    V_CONNECTIVITY: "connectivity",
    V_CLOSURE: "closure_correct",
    V_NOT_ENABLED: "no_enabled_step",
}


@njit(cache=True)
def _splitmix(state):
    state = state + uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return state, z ^ (z >> uint64(31))


@njit(cache=True)
def _desired(p, q):
    return q == p - 1 or q == p + 1


@njit(cache=True)
def _measure(nb, msgs, add, n):
    """Return psi, psi_e, lenmax, correct, connected."""
    psi = 0
    pe = 0
    lenmax = 0
    correct = True
    adj = np.zeros(n, np.int64)
    for p in range(n):
        out = nb[p]
        for q in range(n):
            if msgs[p, q] > 0:
                out |= np.int64(1) << q
                if not _desired(p, q):
                    psi += abs(p - q) * msgs[p, q]
                    correct = False
        if add[p] >= 0:
            out |= np.int64(1) << add[p]
            if not _desired(p, add[p]):
                psi += abs(p - add[p])
                correct = False
        want = np.int64(0)
        if p > 0:
            want |= np.int64(1) << (p - 1)
        if p < n - 1:
            want |= np.int64(1) << (p + 1)
        if nb[p] != want:
            correct = False
        left = -1
        right = -1
        for q in range(n):
            if (nb[p] >> q) & 1 and not _desired(p, q):
                psi += abs(p - q)
            if (out >> q) & 1:
                d = abs(p - q)
                if d > lenmax:
                    lenmax = d
                if q < p:
                    left = q
                elif right < 0:
                    right = q
                adj[p] |= np.int64(1) << q
                adj[q] |= np.int64(1) << p
        if p > 0:
            pe += (p - left) if left >= 0 else n
        if p < n - 1:
            pe += (right - p) if right >= 0 else n
    seen = np.int64(1)
    frontier = np.int64(1)
    while frontier:
        nxt = np.int64(0)
        for p in range(n):
            if (frontier >> p) & 1:
                nxt |= adj[p]
        frontier = nxt & ~seen
        seen |= nxt
    connected = seen == (np.int64(1) << n) - 1
    return psi, pe, lenmax, correct, connected


@njit(cache=True)
def _nearest(mask, p, n):
    left = -1
    right = -1
    for q in range(n):
        if (mask >> q) & 1:
            if q < p:
                left = q
            elif q > p and right < 0:
                right = q
    return left, right


@njit(cache=True)
def _low_two(mask):
    a = -1
    b = -1
    q = 0
    while mask:
        if mask & 1:
            if a < 0:
                a = q
            else:
                b = q
                break
        mask >>= 1
        q += 1
    return a, b


@njit(cache=True)
def run_one(nb0, msgs0, add0, n, seed, budget, aging, steps_out):
    """One fair run; returns (converged_at or -1, violation bits, steps taken).

    When ``steps_out`` has room, the chosen steps are written into it as rows
    (kind, actor, a, b) with kind 0 keep-alive, 1 lin-left, 2 lin-right,
    3 receive, 4 add.
    """
    nb = nb0.copy()
    msgs = msgs0.copy()
    add = add0.copy()
    nclass = n + n * n + n
    ages = np.zeros(nclass, np.int64)
    newages = np.zeros(nclass, np.int64)
    cls = np.zeros(nclass, np.int64)
    state = uint64(seed)
    psi, pe, lenmax, correct, connected = _measure(nb, msgs, add, n)
    if correct:
        return 0, 0, 0
    record = steps_out.shape[0]
    viol = 0
    step = 0
    while step < budget:
        cnt = 0
        for p in range(n):
            cls[cnt] = p
            cnt += 1
            if add[p] < 0:
                for q in range(n):
                    if msgs[p, q] > 0:
                        cls[cnt] = n + p * n + q
                        cnt += 1
            else:
                cls[cnt] = n + n * n + p
                cnt += 1
        total = 0
        for i in range(cnt):
            total += 1 + aging * ages[cls[i]]
        state, r = _splitmix(state)
        r = np.int64(r % uint64(total))
        pick = 0
        for i in range(cnt):
            w = 1 + aging * ages[cls[i]]
            if r < w:
                pick = i
                break
            r -= w
        chosen = cls[pick]
        for i in range(cnt):
            c = cls[i]
            newages[c] = 0 if c == chosen else ages[c] + 1
        for i in range(nclass):
            ages[i] = 0
        for i in range(cnt):
            ages[cls[i]] = newages[cls[i]]

        nb_before = nb.copy()
        predicted = 0
        kind = -1
        actor = 0
        a = -1
        b = -1
        if chosen < n:
            p = chosen
            actor = p
            lowmask = (np.int64(1) << p) - 1
            left = nb[p] & lowmask
            right = nb[p] & ~lowmask & ~(np.int64(1) << p)
            j, k = _low_two(left)
            if k >= 0:
                kind = 1
                a = j
                b = k
                predicted = (abs(k - j) if k != j + 1 else 0) - (p - j)
                nb[p] &= ~(np.int64(1) << j)
                msgs[j, k] += 1
            else:
                j, k = _low_two(right)
                if k >= 0:
                    kind = 2
                    a = j
                    b = k
                    predicted = (abs(k - j) if j != k - 1 else 0) - (k - p)
                    nb[p] &= ~(np.int64(1) << k)
                    msgs[k, j] += 1
                else:
                    kind = 0
                    for q in range(n):
                        if (nb[p] >> q) & 1:
                            msgs[q, p] += 1
                            if not _desired(p, q):
                                predicted += abs(p - q)
        elif chosen < n + n * n:
            x = chosen - n
            p = x // n
            q = x % n
            kind = 3
            actor = p
            a = q
            if msgs[p, q] <= 0 or add[p] >= 0:
                viol |= V_NOT_ENABLED
                break
            msgs[p, q] -= 1
            add[p] = q
        else:
            p = chosen - n - n * n
            kind = 4
            actor = p
            q = add[p]
            a = q
            if (nb[p] >> q) & 1 and not _desired(p, q):
                predicted = -abs(p - q)
            nb[p] |= np.int64(1) << q
            add[p] = -1
        if step < record:
            steps_out[step, 0] = kind
            steps_out[step, 1] = actor
            steps_out[step, 2] = a
            steps_out[step, 3] = b
        step += 1

        psi1, pe1, len1, correct1, conn1 = _measure(nb, msgs, add, n)
        if psi1 - psi != predicted:
            viol |= V_PSI_DELTA
        if pe1 > pe:
            viol |= V_PSI_E
        if len1 > lenmax:
            viol |= V_LENMAX
        if connected and not conn1:
            viol |= V_CONNECTIVITY
        if correct and not correct1:
            viol |= V_CLOSURE
        for t in range(n):
            for d in (t - 1, t + 1):
                if 0 <= d < n and (nb_before[t] >> d) & 1 and not (nb[t] >> d) & 1:
                    viol |= V_DESIRED_KEPT
            l0, r0 = _nearest(nb_before[t], t, n)
            l1, r1 = _nearest(nb[t], t, n)
            if (l0 >= 0 and (l1 < 0 or l1 < l0)) or (r0 >= 0 and (r1 < 0 or r1 > r0)):
                viol |= V_NEAREST
        psi, pe, lenmax, correct, connected = psi1, pe1, len1, correct1, conn1
        if viol:
            break
        if correct:
            return step, viol, step
    return -1, viol, step


@njit(cache=True)
def run_batch(nbs, msgss, adds, n, seeds, budget, aging, conv, viols, steps):
    """Run every configuration of the batch with every seed."""
    scratch = np.zeros((0, 4), np.int64)
    for c in range(nbs.shape[0]):
        for s in range(seeds.shape[0]):
            ca, v, st = run_one(nbs[c], msgss[c], adds[c], n, seeds[s], budget, aging, scratch)
            conv[c, s] = ca
            viols[c, s] = v
            steps[c, s] = st


def encode(configs, universe):
    """Pack configurations into the kernel's array form."""
    n = universe.n
    pos = {p: i for i, p in enumerate(universe.ids)}
    m = len(configs)
    nbs = np.zeros((m, n), np.int64)
    msgss = np.zeros((m, n, n), np.int64)
    adds = np.full((m, n), -1, np.int64)
    for i, c in enumerate(configs):
        for p, s in c.nb.items():
            mask = 0
            for q in s:
                mask |= 1 << pos[q]
            nbs[i, pos[p]] = mask
        for (r, q), k in c.msgs.items():
            msgss[i, pos[r], pos[q]] = k
        for p, q in c.add.items():
            adds[i, pos[p]] = pos[q]
    return nbs, msgss, adds


def decode_steps(rows, universe):
    """Turn recorded kernel step rows back into step objects."""
    from ..semantics import Add, KeepAlive, LinLeft, LinRight, Receive

    ids = universe.ids
    out = []
    for kind, actor, a, b in rows:
        p = ids[actor]
        if kind == 0:
            out.append(KeepAlive(p))
        elif kind == 1:
            out.append(LinLeft(p, ids[a], ids[b]))
        elif kind == 2:
            out.append(LinRight(p, ids[a], ids[b]))
        elif kind == 3:
            out.append(Receive(p, ids[a]))
        else:
            out.append(Add(p, ids[a]))
    return out
