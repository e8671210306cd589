import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sync_geom.errors import LengthMismatch, NotGraphical, ValidationError
from sync_geom.graph import induced_subgraph
from sync_geom.holonomy import is_synchronizable
from sync_geom.netgen import (
    BENCH_COLUMNS,
    SimConfig,
    error_ratio,
    is_graphical,
    random_connected_degree_graph,
    random_orthogonal,
    run_benchmark,
    simulate_network,
)
from sync_geom.potentials import edge_frustrations


def test_five_cycle():
    g = random_connected_degree_graph([2] * 5, np.random.default_rng(0))
    assert g.m == 5 and np.all(g.degrees == 2)


def test_regular_degree_five():
    g = random_connected_degree_graph([5] * 100, np.random.default_rng(1))
    assert g.m == 250 and np.all(g.degrees == 5)


def test_star():
    g = random_connected_degree_graph([3, 1, 1, 1], np.random.default_rng(2))
    assert [(a, b) for a, b, _ in g.edges] == [(0, 1), (0, 2), (0, 3)]


def test_not_graphical():
    assert not is_graphical([3, 3, 1, 1])
    assert not is_graphical([1, 1, 1])
    assert is_graphical([2, 2, 2])
    with pytest.raises(NotGraphical):
        random_connected_degree_graph([3, 3, 1, 1], np.random.default_rng(0))


def _eg_brute(seq):
    seq = sorted(seq, reverse=True)
    if sum(seq) % 2:
        return False
    n = len(seq)
    return all(
        sum(seq[:k]) <= k * (k - 1) + sum(min(x, k) for x in seq[k:]) for k in range(1, n + 1)
    )


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=1, max_size=10))
def test_graphical_matches_direct_formula(seq):
    assert is_graphical(seq) == _eg_brute(seq)


def test_random_orthogonal():
    rng = np.random.default_rng(4)
    signs = np.array([random_orthogonal(1, rng)[0, 0] for _ in range(10_000)])
    assert set(np.unique(signs)) == {-1.0, 1.0}
    plus = np.mean(signs > 0)
    assert abs(plus - 0.5) <= 3 * math.sqrt(0.25 / 10_000)
    for d in range(1, 7):
        Q = random_orthogonal(d, rng)
        assert np.linalg.norm(Q.T @ Q - np.eye(d)) <= 1e-13
        assert abs(abs(np.linalg.det(Q)) - 1) <= 1e-10


SMALL = SimConfig(n_per_component=20, d=2, degree_min=3, degree_max=6, inter_links_min=5, inter_links_max=30)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_simulate_components_synchronizable(seed):
    inst = simulate_network(SMALL, seed)
    g, lab = inst.graph, inst.planted_labels
    for c in (0, 1):
        sub, verts, eids = induced_subgraph(g, np.flatnonzero(lab == c))
        ok, _ = is_synchronizable(inst.rho[eids], sub)
        assert ok
        assert list(np.bincount(sub.u, minlength=sub.n) + np.bincount(sub.v, minlength=sub.n)) == (
            inst.degree_sequences[c]
        )
    intra = lab[g.u] == lab[g.v]
    assert edge_frustrations(inst.planted_g, inst.rho, g)[intra].max() <= 1e-20
    assert int((~intra).sum()) == inst.n_inter_links
    assert SMALL.inter_links_min <= inst.n_inter_links <= SMALL.inter_links_max


def test_simulate_deterministic():
    a, b = simulate_network(SMALL, 9), simulate_network(SMALL, 9)
    assert a.graph.edges == b.graph.edges
    assert a.rho.tobytes() == b.rho.tobytes()
    assert a.planted_g.tobytes() == b.planted_g.tobytes()
    assert a.spectral_gap == b.spectral_gap


@pytest.mark.slow
def test_gap_correlates_with_inter_links():
    cfg = replace(SMALL, d=1, inter_links_min=1, inter_links_max=60)
    pairs = [(inst.n_inter_links, inst.spectral_gap) for inst in (simulate_network(cfg, s) for s in range(200))]
    x, y = np.array(pairs).T
    assert np.corrcoef(x, y)[0, 1] > 0.5


def test_config_validation(tmp_path):
    with pytest.raises(ValidationError):
        SimConfig(degree_min=9, degree_max=8)
    with pytest.raises(ValidationError):
        SimConfig.from_dict({"bogus": 1})
    p = tmp_path / "c.json"
    p.write_text('{"n_per_component": 12, "d": 2}')
    assert SimConfig.from_json(p) == SimConfig(n_per_component=12, d=2)


def test_error_ratio_examples():
    t = np.repeat([0, 1], 50)
    assert error_ratio(t, t) == 0.0
    assert error_ratio(1 - t, t) == 0.0
    assert error_ratio([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5
    with pytest.raises(LengthMismatch):
        error_ratio([0, 1], [0, 1, 1])
    t3 = np.arange(30) % 8
    perm = np.random.default_rng(0).permutation(8)
    assert error_ratio(perm[t3], t3, 8) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_error_ratio_properties(K, seed):
    rng = np.random.default_rng(seed)
    pred, true = rng.integers(K, size=40), rng.integers(K, size=40)
    r = error_ratio(pred, true, K)
    assert 0.0 <= r <= 1 - 1 / K + 1e-12
    assert error_ratio(rng.permutation(K)[pred], true, K) == pytest.approx(r)


def _random_guess_errors(n=200, trials=10_000, seed=0):
    rng = np.random.default_rng(seed)
    t = np.repeat([0, 1], n // 2)
    return np.array([error_ratio(rng.integers(2, size=n), t, 2) for _ in range(trials)])


def test_random_guess_matches_exact_mean():
    n = 200
    # agreements X ~ Bin(n, 1/2); error = min(X, n - X) / n
    exact = sum(math.comb(n, x) * min(x, n - x) for x in range(n + 1)) / 2**n / n
    errs = _random_guess_errors(n)
    assert abs(errs.mean() - exact) <= 4 * errs.std() / math.sqrt(len(errs))


@pytest.mark.xfail(strict=True, reason="permutation minimum pulls the mean to about 0.472")
def test_random_guess_literal_range():
    assert 0.48 <= _random_guess_errors().mean() <= 0.5


def test_benchmark_single_trial():
    rows = run_benchmark(SMALL, 1, 0)
    assert len(rows) == 1
    assert set(rows[0]) == set(BENCH_COLUMNS)
    assert rows[0]["error"] == ""
    with pytest.raises(ValidationError):
        run_benchmark(SMALL, 0, 0)


def test_benchmark_parallel_matches_serial():
    serial = run_benchmark(SMALL, 3, 5)
    parallel = run_benchmark(SMALL, 3, 5, jobs=2)
    assert serial == parallel
