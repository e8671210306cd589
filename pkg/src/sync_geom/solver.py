"""Spectral synchronization, k-means and normalized-cut clustering."""

from dataclasses import dataclass, field

import numpy as np

from .eigen import smallest_eigenpairs
from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    DisconnectedGraph,
    NotSynchronizable,
    TooFewPoints,
)
from .graph import build_graph, connected_components
from .hodge import ZERO_RTOL, build_operators
from .potentials import check_edge_potential, eta_frustration, nu_graph, project_blocks

RESTARTS = 10
DEGENERATE_WEIGHT = 1e-300


@dataclass(frozen=True, eq=False)
class SyncResult:
    f: np.ndarray  # (n, d, d) orthogonal blocks
    eta: float  # of the raw eigenvector cochain
    nu: float  # of the projected potential
    eigenvalues: np.ndarray  # smallest d + 1 of D^{-1} L
    rank_deficient: list = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class Partition:
    K: int
    labels: np.ndarray
    connected_flags: list

    def classes(self):
        return [np.flatnonzero(self.labels == k) for k in range(self.K)]


def _positive_connected(g, weights):
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    if w.shape != g.w.shape:
        raise DimensionMismatch(f"expected {g.m} weights, got {w.shape}")
    keep = w > 0
    sub = build_graph(zip(g.u[keep].tolist(), g.v[keep].tolist(), w[keep].tolist()), n=g.n)
    if g.n > 1 and connected_components(sub).max() > 0:
        raise DisconnectedGraph("graph is not connected under the given weights")
    return w


def _kernel_frame(g, rho, weights):
    """The ``d`` lowest eigenvectors of ``D^{-1} L``, as ``(n, d, d)`` blocks."""
    ops = build_operators(g, rho, weights)
    d = ops.d
    k = min(d + 1, g.n * d)
    vals, Y = smallest_eigenpairs(ops.normalized, k)
    X = Y[:, :d] / np.repeat(np.sqrt(ops.degrees), d)[:, None]
    return vals, X


def spectral_sync(g, rho, weights=None):
    """Spectral relaxation followed by per-vertex polar projection.

    ``weights`` replaces the graph weights in the operator and in the
    reported frustrations.
    """
    rho = check_edge_potential(rho, g)
    w = _positive_connected(g, weights)
    d = rho.shape[1]
    vals, X = _kernel_frame(g, rho, w)
    blocks = X.reshape(g.n, d, d)
    f, bad = project_blocks(blocks)
    return SyncResult(
        f=f,
        eta=eta_frustration(blocks, rho, g, w),
        nu=nu_graph(f, rho, g, w),
        eigenvalues=vals,
        rank_deficient=bad,
    )


def gram_schmidt(X):
    """Modified Gram-Schmidt on the columns of ``X``, returning unit columns."""
    Q = np.array(X, dtype=float, copy=True)
    for j in range(Q.shape[1]):
        for i in range(j):
            Q[:, j] -= (Q[:, i] @ Q[:, j]) * Q[:, i]
        Q[:, j] /= np.linalg.norm(Q[:, j])
    return Q


def gram_schmidt_sync(g, rho, weights=None, tol=None):
    """Synchronization of a certified-synchronizable potential by a single
    orthonormalization of the stacked kernel basis.

    The columns are rescaled to norm ``sqrt(n)`` so that every vertex block
    is itself orthogonal.
    """
    rho = check_edge_potential(rho, g)
    w = _positive_connected(g, weights)
    d = rho.shape[1]
    vals, X = _kernel_frame(g, rho, w)
    tol = 2.0 * ZERO_RTOL if tol is None else tol
    if np.sum(vals < tol) != d:
        raise NotSynchronizable(
            f"kernel dimension {int(np.sum(vals < tol))} != {d} (eigenvalues {vals})"
        )
    Q = gram_schmidt(X) * np.sqrt(g.n)
    f = Q.reshape(g.n, d, d)
    return SyncResult(
        f=f,
        eta=eta_frustration(X.reshape(g.n, d, d), rho, g, w),
        nu=nu_graph(f, rho, g, w),
        eigenvalues=vals,
    )


def _sq_dists(P, C):
    return np.sum((P[:, None, :] - C[None, :, :]) ** 2, axis=2)


def _plus_plus(P, K, rng):
    n = len(P)
    centers = [int(rng.integers(n))]
    d2 = np.sum((P - P[centers[0]]) ** 2, axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a center: lowest unused index
            unused = np.setdiff1d(np.arange(n), centers)
            nxt = int(unused[0])
        else:
            nxt = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        centers.append(nxt)
        d2 = np.minimum(d2, np.sum((P - P[nxt]) ** 2, axis=1))
    return P[centers].copy()


def _lloyd(P, C, max_iter):
    K = len(C)
    labels = None
    for _ in range(max_iter):
        new = np.argmin(_sq_dists(P, C), axis=1)  # ties go to the lowest center
        counts = np.bincount(new, minlength=K)
        for k in np.flatnonzero(counts == 0):
            # reseed at the point farthest from its own center
            far = np.sum((P - C[new]) ** 2, axis=1)
            far[counts[new] <= 1] = -1.0
            p = int(np.argmax(far))
            new[p] = k
            C[k] = P[p]
            counts = np.bincount(new, minlength=K)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(K):
            C[k] = P[labels == k].mean(axis=0)
    inertia = float(np.sum((P - C[labels]) ** 2))
    return labels, inertia


def _canonical_labels(labels):
    """Relabel so classes appear in order of their lowest member."""
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty(labels.max() + 1, dtype=np.int64)
    remap[np.unique(labels)[order]] = np.arange(len(order))
    return remap[labels]


def kmeans(points, K, seed=0, restarts=RESTARTS, max_iter=300):
    """Best-of-``restarts`` Lloyd iteration with k-means++ seeding."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    n = len(P)
    if K < 1 or K > n:
        raise TooFewPoints(f"cannot form {K} clusters from {n} points")
    if K == n:
        return np.arange(n)
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        labels, inertia = _lloyd(P, _plus_plus(P, K, rng), max_iter)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return _canonical_labels(best[0])


def class_connectivity(g, labels, K, weights=None):
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    flags = []
    for k in range(K):
        members = labels == k
        keep = members[g.u] & members[g.v] & (w > 0)
        idx = np.flatnonzero(members)
        local = np.full(g.n, -1, dtype=np.int64)
        local[idx] = np.arange(len(idx))
        sub = build_graph(
            zip(local[g.u[keep]].tolist(), local[g.v[keep]].tolist(), w[keep].tolist()),
            n=len(idx),
        )
        flags.append(bool(len(idx) <= 1 or connected_components(sub).max() == 0))
    return flags


def spectral_embedding(g, weights, K):
    """Rows of the ``K`` lowest random-walk Laplacian eigenvectors, unit-normalized."""
    w = np.asarray(weights, dtype=float)
    L = g.laplacian(w)
    deg = np.diag(L).copy()
    s = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    Lsym = s[:, None] * L * s[None, :]
    Lsym = 0.5 * (Lsym + Lsym.T)
    _, Y = smallest_eigenpairs(Lsym, K, check=False)
    X = np.where(deg[:, None] > 0, s[:, None] * Y, Y)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)


def spectral_clustering(g, weights=None, K=2, seed=0, restarts=RESTARTS):
    """Normalized-cut style clustering into ``K`` nonempty classes."""
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    if w.shape != g.w.shape:
        raise DimensionMismatch(f"expected {g.m} weights, got {w.shape}")
    if K < 1 or K > g.n:
        raise TooFewPoints(f"cannot form {K} classes from {g.n} vertices")
    if g.m and not np.any(w > DEGENERATE_WEIGHT):
        raise DegenerateWeights("all edge weights are numerically zero")
    w = np.where(w > DEGENERATE_WEIGHT, w, 0.0)
    if K == 1:
        labels = np.zeros(g.n, dtype=np.int64)
    else:
        labels = kmeans(spectral_embedding(g, w, K), K, seed=seed, restarts=restarts)
    return Partition(K=K, labels=labels, connected_flags=class_connectivity(g, labels, K, w))
