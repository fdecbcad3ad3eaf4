import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cfg, configurations
from linstab.model import IdUniverse, validate
from linstab.semantics import (
    Add,
    AllMin,
    AllRandom,
    KeepAlive,
    LinLeft,
    LinRight,
    MatchNoOp,
    MaxRule,
    Receive,
    StepNotEnabled,
    all_successor_steps,
    apply_step,
    enabled_steps,
    find_lin,
    left_n,
    match_outcome,
    right_n,
    select_pair,
    step_from_json,
    step_to_json,
)

STRATEGIES = [AllMin(), AllRandom(7), MaxRule()]


class TestNeighborhoods:
    def test_left_right(self):
        assert left_n(3, {1, 2, 5}) == {1, 2}
        assert right_n(3, {1, 2, 5}) == {5}
        assert left_n(1, set()) == set()

    def test_find_lin(self):
        assert find_lin(4, {1, 2, 3}) == {(1, 2), (1, 3), (2, 3)}
        assert find_lin(3, {2, 4}) == set()
        assert find_lin(2, {1, 3, 5}) == {(3, 5)}

    @given(st.sets(st.integers(1, 12)), st.integers(1, 12))
    def test_split_is_partition(self, y, p):
        y = y - {p}
        assert left_n(p, y) | right_n(p, y) == y
        assert not left_n(p, y) & right_n(p, y)


class TestSelect:
    def test_all_min(self):
        assert select_pair(AllMin(), 4, {1, 2, 3}) == (1, 2)

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_none_when_one_per_side(self, strategy):
        assert select_pair(strategy, 3, {2, 4}) is None

    def test_max_rule(self):
        assert select_pair(MaxRule(), 5, {1, 2, 4}) == (1, 2)
        assert select_pair(MaxRule(), 1, {2, 4, 5}) == (4, 5)

    def test_max_rule_longer_side_wins(self):
        u = IdUniverse.range(9)
        # left removes 1 (dist 4), right removes 9 (dist 4): tie goes left
        assert select_pair(MaxRule(), 5, {1, 3, 7, 9}, u) == (1, 3)
        assert select_pair(MaxRule(), 5, {2, 3, 7, 9}, u) == (7, 9)

    @given(st.sets(st.integers(1, 10), max_size=8), st.integers(1, 10), st.integers(0, 50))
    def test_member_of_find_lin(self, y, p, seed):
        y = y - {p}
        pairs = find_lin(p, y)
        for strategy in (AllMin(), AllRandom(seed), MaxRule()):
            got = select_pair(strategy, p, y)
            assert (got is None) == (not pairs)
            assert got is None or got in pairs

    def test_random_is_reproducible_and_spread(self):
        y = {1, 2, 3, 4, 5, 6}
        picks = {select_pair(AllRandom(s), 7, y) for s in range(200)}
        assert select_pair(AllRandom(3), 7, y) == select_pair(AllRandom(3), 7, y)
        assert picks == find_lin(7, y)


class TestMatchOutcome:
    def test_examples(self):
        c = cfg(5, {2: {1, 3, 5}, 3: {1}, 4: {1, 2}})
        assert match_outcome(c, 2, AllMin()) == LinRight(2, 3, 5)
        assert match_outcome(c, 3, AllMin()) == KeepAlive(3)
        assert match_outcome(c, 4, AllMin()) == LinLeft(4, 1, 2)

    @given(configurations(max_n=7))
    def test_keepalive_vs_linearization_by_size(self, c):
        for p in c.universe.ids:
            for strategy in STRATEGIES:
                s = match_outcome(c, p, strategy)
                assert not isinstance(s, MatchNoOp)
                size = len(c.nb[p])
                if size > 2:
                    assert isinstance(s, (LinLeft, LinRight))
                elif size < 2:
                    assert isinstance(s, KeepAlive)
                else:
                    one_each = len(left_n(p, c.nb[p])) == 1
                    assert isinstance(s, KeepAlive) == one_each


class TestEnabled:
    def test_lin3(self, lin3):
        assert enabled_steps(lin3, AllMin()) == [KeepAlive(1), KeepAlive(2), KeepAlive(3)]

    def test_pending_message(self):
        c = cfg(3, {1: {2}, 2: {1, 3}, 3: {2}}, msgs=[(1, 2), (1, 2)])
        assert enabled_steps(c, AllMin()) == [KeepAlive(1), Receive(1, 2), KeepAlive(2), KeepAlive(3)]

    def test_add_blocks_receive(self):
        steps = enabled_steps(cfg(3, add={3: 1}, msgs=[(3, 2)]), AllMin())
        assert Add(3, 1) in steps
        assert Receive(3, 2) not in steps

    @given(configurations())
    def test_exact_counts(self, c):
        steps = enabled_steps(c, AllMin())
        matches = [s for s in steps if s.group == 0]
        assert sorted(s.actor for s in matches) == list(c.universe.ids)
        assert {(s.actor, s.payload) for s in steps if isinstance(s, Receive)} == {
            k for k in c.msgs if k[0] not in c.add
        }
        assert sum(isinstance(s, Add) for s in steps) == len(c.add)
        # match steps always exist, so there is never a deadlock
        assert steps


class TestApply:
    def test_lin_right(self):
        c = cfg(5, {2: {1, 3, 5}})
        d = apply_step(c, LinRight(2, 3, 5))
        assert d.nb[2] == {1, 3} and d.msgs == {(5, 3): 1}
        assert c.nb[2] == {1, 3, 5} and not c.msgs

    def test_keepalive(self):
        d = apply_step(cfg(3, {3: {1}}), KeepAlive(3))
        assert d.msgs == {(1, 3): 1} and d.nb[3] == {1}

    def test_add(self):
        d = apply_step(cfg(3, add={3: 1}), Add(3, 1))
        assert d.nb[3] == {1} and d.add == {}

    def test_receive(self):
        d = apply_step(cfg(3, msgs=[(2, 3), (2, 3)]), Receive(2, 3))
        assert d.msgs == {(2, 3): 1} and d.add == {2: 3}

    def test_not_enabled(self):
        c = cfg(3, {1: {2}}, msgs=[(3, 2)], add={3: 1})
        with pytest.raises(StepNotEnabled):
            apply_step(c, Receive(3, 2))
        with pytest.raises(StepNotEnabled):
            apply_step(c, Add(1, 2))
        with pytest.raises(StepNotEnabled):
            apply_step(c, LinLeft(3, 1, 2))
        with pytest.raises(StepNotEnabled):
            apply_step(cfg(4, {4: {1, 2}}), KeepAlive(4))

    @settings(max_examples=150)
    @given(configurations())
    def test_validity_closed(self, c):
        for s in all_successor_steps(c):
            assert validate(apply_step(c, s)) == []

    @given(configurations(min_n=2))
    def test_receive_then_add(self, c):
        for (p, q) in list(c.msgs):
            if p in c.add:
                continue
            d = apply_step(apply_step(c, Receive(p, q)), Add(p, q))
            assert q in d.nb[p]

    @given(configurations())
    def test_step_json_roundtrip(self, c):
        for s in all_successor_steps(c):
            assert step_from_json(step_to_json(s)) == s

    def test_step_json_format(self):
        assert step_to_json(LinLeft(4, 1, 2)) == {"kind": "lin_left", "actor": 4, "j": 1, "k": 2}
        assert step_to_json(Receive(1, 2)) == {"kind": "receive", "actor": 1, "payload": 2}
        assert step_to_json(KeepAlive(3)) == {"kind": "keepalive", "actor": 3}
