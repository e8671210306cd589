"""Edge and vertex potentials over O(d) and their frustration functionals.

Array conventions used throughout the package:

* edge potential: ``(m, d, d)`` array aligned with the canonical edges of a
  graph; the value on the reversed edge is the transpose.
* vertex potential: ``(n, d, d)`` array of orthogonal blocks.
* 0-cochain: ``(n, d)`` array, or ``(n, d, k)`` for ``k`` stacked sections.
"""

import math

import numpy as np

from .errors import DimensionMismatch, EmptySubset, RankDeficient, ZeroNorm

ORTH_TOL = 1e-9
RANK_RTOL = 1e-12


def check_edge_potential(rho, g):
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 3 or rho.shape[0] != g.m or rho.shape[1] != rho.shape[2]:
        raise DimensionMismatch(
            f"edge potential of shape {rho.shape} does not fit a graph with {g.m} edges"
        )
    return rho


def check_vertex_values(f, g, d=None):
    f = np.asarray(f, dtype=float)
    if f.ndim < 2 or f.shape[0] != g.n or (d is not None and f.shape[1] != d):
        want = f"({g.n}, {d}, ...)" if d is not None else f"({g.n}, ...)"
        raise DimensionMismatch(f"vertex values of shape {f.shape}, expected {want}")
    return f


def identity_potential(m, d):
    return np.broadcast_to(np.eye(d), (m, d, d)).copy()


def directed(rho, g, i, j):
    """Value of the edge potential on the directed edge ``i -> j``."""
    e, forward = g.edge_index(i, j)
    return rho[e] if forward else rho[e].T


def orthogonality_defects(mats):
    """Frobenius norm of ``Q^T Q - I`` for each block of a stack."""
    mats = np.asarray(mats, dtype=float)
    d = mats.shape[-1]
    gram = np.einsum("...ki,...kj->...ij", mats, mats)
    return np.linalg.norm(gram - np.eye(d), axis=(-2, -1))


def validate_edge_potential(rho, g, orth_tol=ORTH_TOL):
    """Indices of edges whose block fails orthogonality beyond ``orth_tol``."""
    rho = check_edge_potential(rho, g)
    return [int(e) for e in np.flatnonzero(orthogonality_defects(rho) > orth_tol)]


def gauge_act(f, rho, g):
    """Right action ``(f . rho)_ij = f_i^T rho_ij f_j`` on canonical edges."""
    rho = check_edge_potential(rho, g)
    f = check_vertex_values(f, g, rho.shape[1])
    return np.einsum("eba,ebc,ecd->ead", f[g.u], rho, f[g.v])


def potential_from_vertex(gv, g):
    """The synchronizable potential ``rho_ij = g_i g_j^T``."""
    gv = check_vertex_values(gv, g)
    if gv.ndim != 3:
        raise DimensionMismatch(f"vertex potential must be (n, d, d), got {gv.shape}")
    return np.einsum("eab,ecb->eac", gv[g.u], gv[g.v])


def edge_residuals(f, rho, g):
    """``f_i - rho_ij f_j`` on each canonical edge ``i -> j``."""
    rho = check_edge_potential(rho, g)
    f = check_vertex_values(f, g, rho.shape[1])
    return f[g.u] - np.einsum("eab,eb...->ea...", rho, f[g.v])


def edge_frustrations(f, rho, g):
    """Squared residual norm on every canonical edge (unweighted)."""
    r = edge_residuals(f, rho, g)
    return np.sum(r.reshape(len(r), -1) ** 2, axis=1)


def edge_frustration(f, rho, g, i, j):
    e, forward = g.edge_index(i, j)
    rho = check_edge_potential(rho, g)
    f = check_vertex_values(f, g, rho.shape[1])
    a, b = (i, j) if forward else (j, i)
    r = f[a] - np.tensordot(rho[e], f[b], axes=1)
    return float(np.sum(r**2))


def _fsum(values):
    return math.fsum(np.ravel(values).tolist())


def _weights_and_degrees(g, weights):
    if weights is None:
        return g.w, g.degrees
    w = np.asarray(weights, dtype=float)
    if w.shape != g.w.shape:
        raise DimensionMismatch(f"expected {g.m} weights, got {w.shape}")
    deg = np.zeros(g.n)
    np.add.at(deg, g.u, w)
    np.add.at(deg, g.v, w)
    return w, deg


def eta_frustration(f, rho, g, weights=None):
    """Normalized frustration of a vector-valued cochain, in ``[0, 2]``."""
    f = check_vertex_values(f, g)
    w, deg = _weights_and_degrees(g, weights)
    norm = _fsum(deg * np.sum(f.reshape(g.n, -1) ** 2, axis=1))
    if not norm > 0:
        raise ZeroNorm("cochain has zero degree-weighted norm")
    num = _fsum(w * edge_frustrations(f, rho, g))
    return num / norm


def nu_graph(f, rho, g, weights=None):
    """``(1 / 2d vol) sum_{i,j} w_ij |f_i - rho_ij f_j|_F^2`` over ordered pairs."""
    rho = check_edge_potential(rho, g)
    d = rho.shape[1]
    w, deg = _weights_and_degrees(g, weights)
    total = 2.0 * _fsum(w * edge_frustrations(f, rho, g))
    return total / (2.0 * d * _fsum(deg))


def nu_subgraph(subset, f, rho, g, weights=None):
    """Frustration of ``f`` restricted to the subgraph induced by ``subset``.

    Summed over ordered pairs ``j, k`` in the subset, so ``subset = V`` gives
    ``2 d vol(G) nu_graph(f)``.
    """
    members = np.zeros(g.n, dtype=bool)
    idx = np.asarray(list(subset) if not isinstance(subset, np.ndarray) else subset)
    if idx.size == 0:
        raise EmptySubset("subset is empty")
    members[idx] = True
    intra = members[g.u] & members[g.v]
    if not intra.any():
        return 0.0
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    fr = edge_frustrations(f, rho, g)
    return 2.0 * _fsum(w[intra] * fr[intra])


def project_to_orthogonal(M, rtol=RANK_RTOL):
    """Nearest orthogonal matrix ``U V^T`` in Frobenius norm.

    Raises :class:`RankDeficient` when the smallest singular value is below
    ``rtol`` times the largest.
    """
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M)
    if s[0] == 0 or s[-1] < rtol * s[0]:
        raise RankDeficient(f"singular values {s[-1]:.3e} / {s[0]:.3e}")
    return U @ Vt


def project_blocks(X, rtol=RANK_RTOL):
    """Polar factor of every block in a ``(n, d, d)`` stack.

    Rank-deficient blocks become the identity; their indices are returned.
    """
    X = np.asarray(X, dtype=float)
    U, s, Vt = np.linalg.svd(X)
    Q = U @ Vt
    bad = (s[:, 0] == 0) | (s[:, -1] < rtol * s[:, 0])
    if bad.any():
        Q[bad] = np.eye(X.shape[-1])
    return Q, [int(i) for i in np.flatnonzero(bad)]
