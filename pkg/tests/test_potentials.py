from collections import Counter

from hypothesis import given, settings

from conftest import cfg, configurations
from linstab.generators import enumerate_configs, gen_correct
from linstab.model import g_lin, ntm
from linstab.potentials import (
    left_nm,
    lenmax_edge,
    max_edges,
    potential_report,
    predicted_psi_delta,
    psi,
    psi_e,
    psi_e_p,
    psi_p,
    psi_sigma,
    rec_multiset,
    right_nm,
    shortest_left,
    shortest_right,
)
from linstab.semantics import KeepAlive, LinRight, all_successor_steps, apply_step


class TestRec:
    def test_examples(self):
        assert rec_multiset(cfg(3, msgs=[(3, 1), (3, 1), (3, 2)]), 3) == Counter({1: 2})
        assert rec_multiset(cfg(3), 3) == Counter()
        assert rec_multiset(cfg(3, msgs=[(3, 2)]), 3) == Counter()


class TestPsi:
    def test_psi_p(self):
        assert psi_p(cfg(5, {2: {1, 3, 5}}), 2) == 3
        assert psi_p(cfg(3, add={3: 1}), 3) == 2

    def test_psi(self, lin3):
        assert psi(lin3) == 0
        assert psi(cfg(5, {2: {1, 3, 5}})) == 3

    def test_keepalive_increase(self):
        c = cfg(5, {3: {1}})
        assert psi(apply_step(c, KeepAlive(3))) - psi(c) == 2


class TestNearest:
    def test_nm_sets(self):
        c = cfg(3, {2: {1}}, msgs=[(2, 3)])
        assert left_nm(c, 2) == {1} and right_nm(c, 2) == {3}
        assert left_nm(cfg(3), 2) == set() == right_nm(cfg(3), 2)
        assert left_nm(cfg(3, add={3: 1}), 3) == {1}

    def test_shortest(self):
        assert shortest_left(cfg(5, {5: {1, 4}}), 5) == 4
        assert shortest_right(cfg(5, {1: {2, 5}}), 1) == 2
        assert shortest_left(cfg(5), 3) is None


class TestPsiE:
    def test_hand_example(self):
        c = cfg(3, {2: {1}}, msgs=[(3, 2)])
        assert [psi_e_p(c, p) for p in (1, 2, 3)] == [3, 4, 1]
        assert psi_e(c) == 8
        assert psi_sigma(c) == 24

    def test_single(self):
        assert psi_e(cfg(1)) == 0

    def test_minimum_n5(self):
        assert psi_e(gen_correct(5)) == 8


class TestPsiSigma:
    def test_values(self, lin3):
        assert psi_sigma(lin3) == 12
        assert psi_sigma(gen_correct(5)) == 40


class TestLenmax:
    def test_examples(self, lin3):
        assert lenmax_edge(lin3) == 1
        assert lenmax_edge(cfg(5, {1: {5}})) == 4
        assert lenmax_edge(cfg(3)) == 0 and max_edges(cfg(3)) == frozenset()
        assert max_edges(cfg(5, {1: {5, 2}}, msgs=[(5, 1)])) == {(1, 5), (5, 1)}


class TestDelta:
    def test_lin_right_example(self):
        c = cfg(5, {2: {1, 3, 5}})
        s = LinRight(2, 3, 5)
        assert predicted_psi_delta(c, s) == -1
        assert psi(apply_step(c, s)) - psi(c) == -1

    @settings(max_examples=200)
    @given(configurations(max_n=7))
    def test_formula_matches_recomputation(self, c):
        for s in all_successor_steps(c):
            d = apply_step(c, s)
            assert psi(d) - psi(c) == predicted_psi_delta(c, s)
            assert psi_e(d) <= psi_e(c)

    @given(configurations())
    def test_report_consistent(self, c):
        r = potential_report(c)
        assert r.psi_sigma == r.psi + c.n * r.psi_e
        assert r.psi_e >= 2 * (c.n - 1)
        assert r.lenmax <= c.n - 1


class TestMinimality:
    """Minimal values hold exactly on the matching topology classes."""

    def _check(self, c):
        u = c.universe
        n = c.n
        e = ntm(c)
        assert (psi(c) == 0) == (e <= g_lin(u))
        assert (psi_e(c) == 2 * (n - 1)) == (g_lin(u) <= e)
        assert (psi_sigma(c) == 2 * n * (n - 1)) == (e == g_lin(u))

    def test_enumerated_small(self):
        for n in (1, 2):
            for c in enumerate_configs(n, 2, 4, connected_only=False):
                self._check(c)
        count = 0
        for c in enumerate_configs(3, 1, 1, connected_only=False):
            count += 1
            if count % 7 == 0:
                self._check(c)

    @given(configurations())
    def test_random(self, c):
        self._check(c)
