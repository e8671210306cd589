import numpy as np
import pytest

from sync_geom.graph import build_graph
from sync_geom.netgen import random_orthogonal
from sync_geom.potentials import potential_from_vertex


def random_connected_graph(n, rng, extra=0.3, weighted=True):
    """Random tree plus each remaining pair with probability ``extra``."""
    edges = {}
    perm = rng.permutation(n)
    for k in range(1, n):
        a, b = int(perm[k]), int(perm[rng.integers(k)])
        edges[(min(a, b), max(a, b))] = None
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edges and rng.random() < extra:
                edges[(a, b)] = None
    w = rng.uniform(0.5, 2.0, size=len(edges)) if weighted else np.ones(len(edges))
    return build_graph([(a, b, float(x)) for (a, b), x in zip(sorted(edges), w)], n=n)


def haar_stack(k, d, rng):
    return np.stack([random_orthogonal(d, rng) for _ in range(k)]) if k else np.zeros((0, d, d))


def planted_instance(n, d, rng, **kw):
    g = random_connected_graph(n, rng, **kw)
    gv = haar_stack(n, d, rng)
    return g, gv, potential_from_vertex(gv, g)


def noisy_instance(n, d, rng, **kw):
    g = random_connected_graph(n, rng, **kw)
    return g, haar_stack(g.m, d, rng)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return build_graph([(0, 1, 1), (1, 2, 1), (0, 2, 1)])


@pytest.fixture
def square():
    return build_graph([(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])


@pytest.fixture
def path3():
    return build_graph([(0, 1, 1), (1, 2, 1)])


def pytest_addoption(parser):
    parser.addoption(
        "--paper-scale",
        action="store_true",
        help="also run the long N=100, d=5 benchmark (no numeric gate)",
    )
    parser.addoption("--paper-trials", type=int, default=100)


CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[CRITERIA_KEY] = {}


@pytest.fixture
def criterion(request):
    """``criterion(label, ok, detail)`` records and asserts one acceptance line."""
    table = request.config.stash[CRITERIA_KEY]

    def record(label, ok, detail=""):
        table[label] = (bool(ok), detail)
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, config):
    table = config.stash.get(CRITERIA_KEY, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(table, key=lambda s: (int(s.split()[0].rstrip("abc")), s)):
        ok, detail = table[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
