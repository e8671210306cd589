"""Holonomy of edge potentials and the synchronizability test.

Generators are reported in the gauge fixed by a breadth-first spanning
tree: after the gauge transformation the potential is the identity on every
tree edge, and its value on each remaining edge is the holonomy around the
corresponding fundamental cycle (up to conjugation by the gauge at the
cycle's start vertex).
"""

from dataclasses import dataclass

import numpy as np

from .errors import BrokenPath, DimensionMismatch, ValidationError
from .graph import cycle_basis, require_connected, spanning_tree
from .potentials import ORTH_TOL, check_edge_potential, directed, gauge_act

SYNC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HolonomyReport:
    base: int
    tree: object
    non_tree_edges: list
    generators: np.ndarray  # (m - n + 1, d, d), aligned with non_tree_edges
    max_deviation: float
    synchronizable: bool
    gauge: np.ndarray  # (n, d, d)

    def to_json(self, g):
        return {
            "base": self.base,
            "n_generators": len(self.non_tree_edges),
            "max_deviation": self.max_deviation,
            "synchronizable": self.synchronizable,
            "generators": [
                {"edge": [int(g.u[e]), int(g.v[e])], "matrix": H.tolist()}
                for e, H in zip(self.non_tree_edges, self.generators)
            ],
        }


def hol_path(rho, g, path):
    """Ordered product of the potential along ``[(i0, i1), (i1, i2), ...]``."""
    rho = check_edge_potential(rho, g)
    H = np.eye(rho.shape[1])
    prev = None
    for k, (i, j) in enumerate(path):
        if prev is not None and i != prev:
            raise BrokenPath(f"step {k} starts at {i} but the previous step ended at {prev}")
        H = H @ directed(rho, g, i, j)
        prev = j
    return H


def tree_gauge(rho, g, tree=None):
    """Vertex potential making ``rho`` the identity on every tree edge."""
    rho = check_edge_potential(rho, g)
    tree = spanning_tree(g, 0) if tree is None else tree
    require_connected(g)
    d = rho.shape[1]
    f = np.empty((g.n, d, d))
    f[tree.root] = np.eye(d)
    for j in tree.order[1:]:
        i = int(tree.parent[j])
        f[j] = directed(rho, g, int(j), i) @ f[i]
    return f


def holonomy_generators(rho, g, root=0, sync_tol=SYNC_TOL):
    rho = check_edge_potential(rho, g)
    require_connected(g)
    tree = spanning_tree(g, root)
    f = tree_gauge(rho, g, tree)
    non_tree = [int(e) for e in np.flatnonzero(~tree.tree_edge_mask)]
    d = rho.shape[1]
    gens = gauge_act(f, rho, g)[non_tree] if non_tree else np.zeros((0, d, d))
    dev = np.linalg.norm(gens - np.eye(d), axis=(1, 2))
    max_dev = float(dev.max()) if len(dev) else 0.0
    return HolonomyReport(
        base=int(root),
        tree=tree,
        non_tree_edges=non_tree,
        generators=gens,
        max_deviation=max_dev,
        synchronizable=max_dev <= sync_tol,
        gauge=f,
    )


def is_synchronizable(rho, g, sync_tol=SYNC_TOL, root=0):
    """``(flag, max_deviation)`` from the cycle-basis holonomies."""
    report = holonomy_generators(rho, g, root=root, sync_tol=sync_tol)
    return report.synchronizable, report.max_deviation


def cycle_holonomies(rho, g, root=0):
    """Holonomy of every fundamental cycle, each based at its own start vertex."""
    tree = spanning_tree(g, root)
    basis = cycle_basis(g, tree)
    return [hol_path(rho, g, c) for c in basis.cycles]


def potential_from_generators(g, tree, generators, d=None, orth_tol=ORTH_TOL):
    """Edge potential equal to the identity on tree edges and to the given
    generators on the non-tree edges (in increasing edge-index order, or as a
    ``{edge_index: matrix}`` mapping)."""
    non_tree = [int(e) for e in np.flatnonzero(~tree.tree_edge_mask)]
    if isinstance(generators, dict):
        gens = [np.asarray(generators[e], dtype=float) for e in non_tree]
    else:
        gens = [np.asarray(H, dtype=float) for H in generators]
    if len(gens) != len(non_tree):
        raise DimensionMismatch(f"{len(gens)} generators for {len(non_tree)} non-tree edges")
    if d is None:
        if not gens:
            raise DimensionMismatch("cannot infer the fibre dimension without generators")
        d = gens[0].shape[0]
    rho = np.broadcast_to(np.eye(d), (g.m, d, d)).copy()
    for e, H in zip(non_tree, gens):
        if H.shape != (d, d):
            raise DimensionMismatch(f"generator for edge {e} has shape {H.shape}")
        if np.linalg.norm(H.T @ H - np.eye(d)) > orth_tol:
            raise ValidationError(f"generator for edge {e} is not orthogonal")
        rho[e] = H
    return rho
