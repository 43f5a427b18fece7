import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from rangeassign.core import ArrivalInstance

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line (shown in the terminal summary) and assert it."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rng(seed):
    return np.random.default_rng(seed)


# lattice coordinates: plenty of exact distance ties
_coord = st.integers(-20, 20)


@st.composite
def line_instances(draw, min_n=1, max_n=10):
    xs = draw(st.lists(_coord, min_size=min_n, max_size=max_n, unique=True))
    return ArrivalInstance.line([x / 4 for x in xs])


@st.composite
def plane_instances(draw, min_n=1, max_n=10):
    pts = draw(st.lists(st.tuples(_coord, _coord), min_size=min_n, max_size=max_n, unique=True))
    return ArrivalInstance.plane([(x / 4, y / 4) for x, y in pts])


@st.composite
def metric_instances(draw, min_n=1, max_n=9):
    n = draw(st.integers(min_n, max_n))
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = draw(st.integers(1, 12))
    for k in range(n):
        w = np.minimum(w, w[:, k : k + 1] + w[k : k + 1, :])
    return ArrivalInstance.metric(w)


def any_instances(min_n=1, max_n=9):
    return st.one_of(
        line_instances(min_n, max_n), plane_instances(min_n, max_n), metric_instances(min_n, max_n)
    )
