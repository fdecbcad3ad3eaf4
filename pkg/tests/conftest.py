import pytest
from hypothesis import strategies as st

from linstab.model import Configuration, IdUniverse

ACCEPTANCE_LINES = []


def cfg(n, nb=None, msgs=(), add=None):
    return Configuration.build(IdUniverse.range(n), nb or {}, msgs, add or {})


@st.composite
def configurations(draw, min_n=1, max_n=6, max_msgs=6):
    n = draw(st.integers(min_n, max_n))
    ids = list(range(1, n + 1))
    nb = {}
    for p in ids:
        others = [q for q in ids if q != p]
        nb[p] = draw(st.sets(st.sampled_from(others), max_size=len(others))) if others else set()
    msgs = []
    add = {}
    if n > 1:
        pair = st.tuples(st.sampled_from(ids), st.sampled_from(ids)).filter(lambda t: t[0] != t[1])
        msgs = draw(st.lists(pair, max_size=max_msgs))
        for p in ids:
            if draw(st.booleans()):
                add[p] = draw(st.sampled_from([q for q in ids if q != p]))
    return cfg(n, nb, msgs, add)


@pytest.fixture
def lin3():
    return cfg(3, {1: {2}, 2: {1, 3}, 3: {2}})


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
