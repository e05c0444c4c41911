import numpy as np
import pytest

from dualmink.bodies import make_height_body
from dualmink.errors import UnboundedBody

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one PASS/FAIL line per acceptance criterion."""

    def _record(key, ok, detail=""):
        line = "%s %s%s" % ("PASS" if ok else "FAIL", key, (": " + detail) if detail else "")
        _ACCEPTANCE[key] = line
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0].lstrip("AC"))):
        terminalreporter.write_line(_ACCEPTANCE[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_polygon(rng, m, jitter=0.3, spread=0.3):
    """Polygon with ``m`` roughly equispaced normals and heights near 1; every facet active."""
    while True:
        ang = 2 * np.pi * (np.arange(m) + rng.uniform(-jitter, jitter, m)) / m
        N = np.column_stack([np.cos(ang), np.sin(ang)])
        h = rng.uniform(1 - spread, 1 + spread, m)
        try:
            K = make_height_body(N, h)
        except UnboundedBody:
            # jitter can open an angular gap wider than pi when m is small
            continue
        if K.active.all():
            return K


def square():
    N = np.array([[1.0, 0], [0, 1], [-1, 0], [0, -1]])
    return make_height_body(N, np.ones(4))


def cube():
    N = np.vstack([np.eye(3), -np.eye(3)])
    return make_height_body(N, np.ones(6))
