import pytest
from hypothesis import given, settings

from conftest import cfg, configurations
from linstab.generators import gen_correct, gen_random_connected
from linstab.model import InputError
from linstab.predicates import directed_lin_pattern
from linstab.semantics import (
    Add,
    AllMin,
    KeepAlive,
    LinRight,
    Receive,
    apply_step,
    enabled_steps,
)
from linstab.schedulers import (
    FREE,
    GRANT,
    SUPPRESS,
    BoundedDelay,
    FairRandom,
    Oracle,
    OracleState,
    SplitMix64,
    make_scheduler,
    oracle_commit,
    oracle_filter,
)


def drive(sched, c, steps=200):
    """Run ``sched`` for a while and return the chosen steps."""
    sched.start(c)
    out = []
    for _ in range(steps):
        en = enabled_steps(c, AllMin())
        s = sched.choose(en)
        assert s in en
        sched.observe(s, c)
        c = apply_step(c, s)
        out.append(s)
    return out


class TestRng:
    def test_frozen_sequence(self):
        r = SplitMix64(0)
        assert [r.next() for _ in range(2)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]


class TestFairRandom:
    def test_single_step(self):
        sched = FairRandom(3)
        sched.start(cfg(1))
        assert sched.choose([KeepAlive(1)]) == KeepAlive(1)

    def test_deterministic(self):
        c = gen_random_connected(6, 2, 4)
        assert drive(FairRandom(9), c) == drive(FairRandom(9), c)
        assert drive(FairRandom(9), c) != drive(FairRandom(10), c)

    def test_aging_grows_waiting_weight(self):
        sched = FairRandom(0, aging=5)
        sched.start(cfg(3))
        en = [KeepAlive(1), KeepAlive(2), KeepAlive(3)]
        pick = sched.choose(en)
        assert all(sched.ages[("match", s.actor)] == 1 for s in en if s != pick)
        assert ("match", pick.actor) not in sched.ages

    def test_every_class_served(self):
        c = gen_correct(6)
        seen = {s.actor for s in drive(FairRandom(1), c, 300) if isinstance(s, KeepAlive)}
        assert seen == set(range(1, 7))

    def test_bad_aging(self):
        with pytest.raises(InputError):
            FairRandom(0, aging=-1)


class TestBoundedDelay:
    def test_forced_receive(self):
        c = cfg(3, {1: {2}, 2: {1, 3}, 3: {2}}, msgs=[(1, 2)])
        sched = BoundedDelay(0, delay_bound=5, match_bound=100)
        sched.start(c)
        # let five rounds pass with other steps
        for _ in range(5):
            sched.observe(KeepAlive(3), c)
        assert sched.choose(enabled_steps(c, AllMin())) == Receive(1, 2)

    def test_forced_match(self):
        c = gen_correct(3)
        sched = BoundedDelay(0, delay_bound=100, match_bound=2)
        sched.start(c)
        sched.observe(KeepAlive(1), c)
        sched.observe(KeepAlive(1), c)
        sched.observe(KeepAlive(1), c)
        assert sched.choose([KeepAlive(1), KeepAlive(2)]) == KeepAlive(2)

    def test_add_inherits_blocked_deadline(self):
        c = cfg(3, msgs=[(3, 2)], add={3: 1})
        sched = BoundedDelay(0, delay_bound=1, match_bound=100)
        sched.start(c)
        sched.observe(KeepAlive(1), c)
        assert sched.choose(enabled_steps(c, AllMin())) == Add(3, 1)

    @settings(max_examples=30, deadline=None)
    @given(configurations(max_n=5))
    def test_overdue_class_served_first(self, c):
        sched = BoundedDelay(1)
        sched.start(c)
        for _ in range(120):
            en = enabled_steps(c, AllMin())
            due = [sched._deadline(s) for s in en]
            s = sched.choose(en)
            overdue = [d for d in due if d <= sched.now]
            if overdue:
                assert sched._deadline(s) == min(overdue)
            sched.observe(s, c)
            c = apply_step(c, s)
        assert sched.now == 120

    def test_deterministic(self):
        c = gen_random_connected(5, 1, 3)
        assert drive(BoundedDelay(4), c) == drive(BoundedDelay(4), c)

    def test_factory(self):
        assert isinstance(make_scheduler("fair", 1), FairRandom)
        assert isinstance(make_scheduler("bounded", 1, delay_bound=3), BoundedDelay)
        with pytest.raises(InputError):
            make_scheduler("adversary")


class TestOracle:
    def test_two_sender_grants(self):
        c = cfg(3, {2: {1}, 3: {1}})
        en = enabled_steps(c, AllMin())
        allowed, o = oracle_filter(OracleState(), c, en)
        assert o.mode == GRANT
        assert o.live_grantees() == [2, 3]
        assert KeepAlive(2) in allowed and KeepAlive(3) in allowed
        assert KeepAlive(1) not in allowed
        o = oracle_commit(o, KeepAlive(2))
        allowed, o = oracle_filter(o, c, en)
        assert KeepAlive(2) not in allowed and KeepAlive(3) in allowed
        assert o.decision() == {"oracle": "grant", "grantees": [3]}

    def test_one_sender_grant_then_linearize(self):
        c = cfg(3, {1: {3}, 2: {1}})
        en = enabled_steps(c, AllMin())
        allowed, o = oracle_filter(OracleState(), c, en)
        assert o.mode == GRANT and o.live_grantees() == [2]
        assert [s for s in allowed if isinstance(s, KeepAlive)] == [KeepAlive(2)]
        o = oracle_commit(o, KeepAlive(2))
        c = apply_step(c, KeepAlive(2))
        c = apply_step(apply_step(c, Receive(1, 2)), Add(1, 2))
        assert c.nb[1] == {2, 3}
        assert LinRight(1, 2, 3) in enabled_steps(c, AllMin())
        _, o = oracle_filter(o, c, enabled_steps(c, AllMin()))
        assert o.mode == SUPPRESS

    def test_free_on_correct(self, lin3):
        en = enabled_steps(lin3, AllMin())
        allowed, o = oracle_filter(OracleState(), lin3, en)
        assert o.mode == FREE and allowed == en

    def test_non_keepalive_always_pass(self):
        c = cfg(4, {1: {2, 3}}, msgs=[(4, 1)], add={2: 4})
        en = enabled_steps(c, AllMin())
        allowed, o = oracle_filter(OracleState(), c, en)
        assert o.mode == SUPPRESS
        assert allowed == [s for s in en if not isinstance(s, KeepAlive)]

    @given(configurations())
    def test_suppress_never_allows_keepalive(self, c):
        en = enabled_steps(c, AllMin())
        allowed, o = oracle_filter(OracleState(), c, en)
        if directed_lin_pattern(c):
            assert o.mode == SUPPRESS
            assert not any(isinstance(s, KeepAlive) for s in allowed)
        assert set(allowed) <= set(en)

    def test_grant_fires_at_most_once(self):
        o = Oracle()
        c = cfg(3, {2: {1}, 3: {1}})
        en = enabled_steps(c, AllMin())
        o.filter(c, en)
        o.commit(KeepAlive(2))
        used = [g.used for g in o.state.grants]
        o.commit(KeepAlive(2))
        assert [g.used for g in o.state.grants] == used == [True, False]
