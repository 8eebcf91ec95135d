import random

import pytest
from hypothesis import strategies as st

from qgkit.table import CayleyTable


def random_latin(n, rng):
    """Cyclic square with rows, columns and symbols shuffled."""
    rp, cp, sp = (rng.sample(range(n), n) for _ in range(3))
    return CayleyTable(tuple(tuple(sp[(rp[i] + cp[j]) % n] for j in range(n)) for i in range(n)))


@st.composite
def latin_tables(draw, min_order=1, max_order=12):
    n = draw(st.integers(min_order, max_order))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_latin(n, random.Random(seed))


@st.composite
def any_tables(draw, max_order=5):
    n = draw(st.integers(1, max_order))
    flat = draw(st.lists(st.integers(0, n - 1), min_size=n * n, max_size=n * n))
    return CayleyTable(tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)))


@pytest.fixture
def z3():
    return CayleyTable(tuple(tuple((i + j) % 3 for j in range(3)) for i in range(3)))


# --------------------------------------------------------------------------
# acceptance summary: one line per criterion, failing if any of its cases fail

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion the test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            num, title = m.args
            _CRITERIA.setdefault(num, {"title": title, "ids": set(), "failed": [], "ran": 0})["ids"].add(item.nodeid)


def pytest_runtest_logreport(report):
    for c in _CRITERIA.values():
        if report.nodeid in c["ids"]:
            if report.when == "call":
                c["ran"] += 1
            if report.failed:
                c["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        c = _CRITERIA[num]
        if c["ran"] == 0 and not c["failed"]:
            verdict = "NOT RUN"
        else:
            verdict = "FAIL" if c["failed"] else "PASS"
        line = f"criterion {num:2d} {verdict:4s}  {c['title']}"
        if c["failed"]:
            line += f"  (failing: {', '.join(sorted(set(c['failed'])))})"
        tr.write_line(line)
