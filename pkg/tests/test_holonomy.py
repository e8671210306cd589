import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sync_geom.errors import BrokenPath, DisconnectedGraph
from sync_geom.graph import build_graph, cycle_basis, spanning_tree
from sync_geom.hodge import kernel_dim
from sync_geom.holonomy import (
    cycle_holonomies,
    hol_path,
    holonomy_generators,
    is_synchronizable,
    potential_from_generators,
    tree_gauge,
)
from sync_geom.netgen import random_orthogonal
from sync_geom.potentials import gauge_act, identity_potential, potential_from_vertex

from conftest import haar_stack, noisy_instance, planted_instance, random_connected_graph


def _square_with_loop(square, R):
    # rho_01 = rho_12 = rho_23 = I and rho_30 = R, stored on canonical (0, 3) as R^T
    d = R.shape[0]
    rho = identity_potential(4, d)
    e, _ = square.edge_index(0, 3)
    rho[e] = R.T
    return rho


def test_hol_path_basics(square, rng):
    rho = haar_stack(4, 3, rng)
    np.testing.assert_array_equal(hol_path(rho, square, []), np.eye(3))
    path = [(0, 1), (1, 2), (2, 3)]
    back = [(b, a) for a, b in reversed(path)]
    np.testing.assert_allclose(hol_path(rho, square, path + back), np.eye(3), atol=1e-12)
    with pytest.raises(BrokenPath):
        hol_path(rho, square, [(0, 1), (2, 3)])


def test_square_loop_holonomy(square, rng):
    R = random_orthogonal(3, rng)
    rho = _square_with_loop(square, R)
    np.testing.assert_allclose(hol_path(rho, square, [(0, 1), (1, 2), (2, 3), (3, 0)]), R, atol=1e-14)
    report = holonomy_generators(rho, square)
    assert len(report.generators) == 1
    # the generator is conjugate to R: same spectrum, and the Frobenius deviation matches
    assert report.max_deviation == pytest.approx(np.linalg.norm(R - np.eye(3)), rel=1e-12)
    np.testing.assert_allclose(
        np.sort_complex(np.linalg.eigvals(report.generators[0])),
        np.sort_complex(np.linalg.eigvals(R)),
        atol=1e-12,
    )


def test_square_sign_flip_not_synchronizable(square):
    rho = _square_with_loop(square, -np.eye(1))
    flag, dev = is_synchronizable(rho, square)
    assert not flag and dev == pytest.approx(2.0)
    assert kernel_dim(rho, square).dim == 0


def test_identity_potential_synchronizable(rng):
    g = random_connected_graph(10, rng)
    assert is_synchronizable(identity_potential(g.m, 2), g) == (True, 0.0)


def test_tree_gauge_examples(path3, rng):
    np.testing.assert_array_equal(tree_gauge(identity_potential(2, 2), path3), np.broadcast_to(np.eye(2), (3, 2, 2)))
    f = tree_gauge(-np.ones((2, 1, 1)), path3)
    assert f.ravel().tolist() == [1, -1, 1]
    g, gv, rho = planted_instance(9, 3, rng)
    f = tree_gauge(rho, g)
    t = spanning_tree(g, 0)
    np.testing.assert_allclose(f, np.einsum("nab,cb->nac", gv, gv[0]), atol=1e-12)
    acted = gauge_act(f, rho, g)
    np.testing.assert_allclose(acted[t.tree_edge_mask], identity_potential(g.n - 1, 3), atol=1e-12)


def test_tree_graph_has_no_generators(path3, rng):
    report = holonomy_generators(haar_stack(2, 3, rng), path3)
    assert report.synchronizable and len(report.generators) == 0


def test_disconnected_rejected():
    g = build_graph([(0, 1, 1), (2, 3, 1)])
    with pytest.raises(DisconnectedGraph):
        holonomy_generators(identity_potential(2, 1), g)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 4), n=st.integers(3, 15))
def test_planted_recovered(seed, d, n):
    rng = np.random.default_rng(seed)
    g, gv, rho = planted_instance(n, d, rng)
    report = holonomy_generators(rho, g)
    assert report.synchronizable
    assert len(report.generators) == g.m - g.n + 1
    if len(report.generators):
        assert np.abs(report.generators - np.eye(d)).max() < 1e-10
    # the tree gauge solves the synchronization problem on every edge
    np.testing.assert_allclose(gauge_act(report.gauge, rho, g), identity_potential(g.m, d), atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 3), n=st.integers(4, 12))
def test_decision_is_gauge_and_root_invariant(seed, d, n):
    rng = np.random.default_rng(seed)
    g, rho = noisy_instance(n, d, rng)
    h = haar_stack(n, d, rng)
    flag, dev = is_synchronizable(rho, g)
    flag2, dev2 = is_synchronizable(gauge_act(h, rho, g), g)
    assert flag == flag2
    assert dev == pytest.approx(dev2, abs=1e-10)
    for root in range(n):
        assert is_synchronizable(rho, g, root=root)[0] == flag


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 4))
def test_concatenation_law(seed, d):
    rng = np.random.default_rng(seed)
    g, rho = noisy_instance(10, d, rng, extra=0.5)
    # random walk split into two composable halves
    walk = [0]
    for _ in range(12):
        nbrs = [j for j, _, _ in g.adjacency[walk[-1]]]
        walk.append(int(rng.choice(nbrs)))
    steps = list(zip(walk, walk[1:]))
    left, right = steps[:5], steps[5:]
    np.testing.assert_allclose(
        hol_path(rho, g, steps), hol_path(rho, g, left) @ hol_path(rho, g, right), atol=1e-12
    )


def test_generators_conjugate_to_cycle_holonomy(rng):
    g, rho = noisy_instance(10, 3, rng)
    report = holonomy_generators(rho, g)
    basis = cycle_basis(g, report.tree)
    for H, cyc, hol in zip(report.generators, basis.cycles, cycle_holonomies(rho, g)):
        start = cyc[0][0]
        f = report.gauge[start]
        np.testing.assert_allclose(H, f.T @ hol @ f, atol=1e-12)


def test_potential_from_generators_round_trip(square, rng):
    t = spanning_tree(square, 0)
    np.testing.assert_array_equal(potential_from_generators(square, t, [np.eye(2)]), identity_potential(4, 2))
    R = random_orthogonal(3, rng)
    rho = potential_from_generators(square, t, [R])
    cyc = cycle_basis(square, t).cycles[0]
    np.testing.assert_allclose(hol_path(rho, square, cyc), R, atol=1e-14)

    g = random_connected_graph(12, rng)
    t = spanning_tree(g, 0)
    H = haar_stack(g.m - g.n + 1, 3, rng)
    report = holonomy_generators(potential_from_generators(g, t, H), g)
    np.testing.assert_allclose(report.generators, H, atol=1e-14)
    np.testing.assert_allclose(report.gauge, np.broadcast_to(np.eye(3), report.gauge.shape), atol=0)
