import pytest
from hypothesis import given
from hypothesis import strategies as st

from linstab.generators import (
    enumerate_configs,
    gen_correct,
    gen_missing_edges,
    gen_random_connected,
    gen_supergraph,
)
from linstab.model import InputError, canonical_key, is_connected, untm, validate
from linstab.potentials import psi, psi_e, psi_sigma
from linstab.predicates import contains_glin, is_correct, is_undirected_correct

seeds = st.integers(0, 10**6)


def connection_count(c):
    return sum(len(s) for s in c.nb.values()) + sum(c.msgs.values()) + len(c.add)


class TestCorrect:
    def test_examples(self, lin3):
        assert gen_correct(3) == lin3
        one = gen_correct(1)
        assert one.nb == {1: frozenset()} and not one.msgs and not one.add
        assert is_correct(one)
        assert psi_sigma(gen_correct(5)) == 40

    def test_bad_n(self):
        with pytest.raises(InputError):
            gen_correct(0)


class TestMissingEdges:
    @given(st.integers(1, 16), seeds)
    def test_postconditions(self, n, seed):
        c = gen_missing_edges(n, seed)
        assert validate(c) == []
        assert is_undirected_correct(c)
        assert psi(c) == 0
        assert connection_count(c) == n - 1

    def test_two_processes(self):
        for seed in range(20):
            assert connection_count(gen_missing_edges(2, seed)) == 1

    def test_usually_not_correct(self):
        assert sum(is_correct(gen_missing_edges(8, s)) for s in range(50)) < 5


class TestSupergraph:
    @given(st.integers(1, 12), seeds, st.integers(0, 40))
    def test_postconditions(self, n, seed, extra):
        extra = min(extra, (n - 1) * (n - 2))
        c = gen_supergraph(n, seed, extra)
        assert validate(c) == []
        assert contains_glin(c)
        assert psi_e(c) == 2 * (n - 1)
        assert connection_count(c) == 2 * (n - 1) + extra

    def test_extra_zero_is_correct(self):
        assert is_correct(gen_supergraph(6, 3, 0))

    def test_capacity(self):
        gen_supergraph(4, 0, 6)
        with pytest.raises(InputError):
            gen_supergraph(4, 0, 7)
        with pytest.raises(InputError):
            gen_supergraph(4, 0, -1)


class TestRandomConnected:
    @given(st.integers(1, 24), seeds, st.integers(0, 48))
    def test_postconditions(self, n, seed, extra):
        c = gen_random_connected(n, seed, extra)
        assert validate(c) == []
        assert is_connected(untm(c), c.universe)

    def test_deterministic(self):
        a = gen_random_connected(12, 5, 8)
        assert canonical_key(a) == canonical_key(gen_random_connected(12, 5, 8))
        assert a != gen_random_connected(12, 6, 8)


class TestEnumerate:
    def test_single(self):
        out = list(enumerate_configs(1))
        assert len(out) == 1 and is_correct(out[0])

    def test_two_processes_count(self):
        # nb: 2x2, add: 2x2, msgs over 2 keys with caps 1/6: 4 -> 64 total,
        # minus those with no connection at all (1 x 1 x 1)
        assert len(list(enumerate_configs(2, 1, 6))) == 63
        assert len(list(enumerate_configs(2, 1, 6, connected_only=False))) == 64

    def test_three_processes(self, lin3):
        out = list(enumerate_configs(3, 1, 6))
        assert len(out) == 110402
        keys = {canonical_key(c) for c in out}
        assert len(keys) == len(out)
        assert canonical_key(lin3) in keys
        for c in out[::997]:
            assert validate(c) == []
            assert is_connected(untm(c), c.universe)

    def test_caps_respected(self):
        for c in enumerate_configs(3, 2, 3):
            assert sum(c.msgs.values()) <= 3
            assert all(m <= 2 for m in c.msgs.values())
