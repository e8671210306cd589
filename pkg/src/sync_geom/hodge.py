"""Twisted differential, codifferential, Hodge Laplacians and the graph
connection Laplacian.

One-forms are stored on canonical edges ``i -> j`` as the coefficient in
the tail frame, ``omega[e]`` with shape ``(m, d)`` (or ``(m, d, k)``).  The
head-frame coefficient of the reversed edge is ``-rho_ji omega[e]``; it is
never stored, so skew-symmetry and compatibility cannot be violated.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .eigen import smallest_eigenpairs
from .errors import DimensionMismatch
from .graph import require_connected
from .potentials import check_edge_potential, check_vertex_values, edge_residuals

ZERO_RTOL = 1e-8
QR_RTOL = 1e-7


@dataclass(frozen=True, eq=False)
class TwistedOperators:
    L1: scipy.sparse.csr_matrix
    D1: scipy.sparse.dia_matrix
    d_rho_mat: scipy.sparse.csr_matrix
    delta_rho_mat: scipy.sparse.csr_matrix
    degrees: np.ndarray
    d: int

    @property
    def normalized(self):
        """``D^{-1/2} L D^{-1/2}``, isospectral with ``D^{-1} L``."""
        s = np.repeat(1.0 / np.sqrt(self.degrees), self.d)
        S = scipy.sparse.diags(s)
        return (S @ self.L1 @ S).tocsr()

    @property
    def random_walk(self):
        inv = np.repeat(1.0 / self.degrees, self.d)
        return (scipy.sparse.diags(inv) @ self.L1).tocsr()


def _block_coo(rows, cols, blocks, d):
    """COO triplets for ``d x d`` blocks placed at block positions."""
    shape = (len(rows), d, d)
    r = np.broadcast_to(rows[:, None, None] * d + np.arange(d)[None, :, None], shape)
    c = np.broadcast_to(cols[:, None, None] * d + np.arange(d)[None, None, :], shape)
    return r.ravel(), c.ravel(), np.broadcast_to(blocks, shape).ravel()


def build_operators(g, rho, weights=None):
    """Assemble ``L1 = D1 - W1`` together with the matrices of the twisted
    differential and codifferential.

    ``d_rho_mat`` has ``+I`` at block ``(e, i)`` and ``-rho_ij`` at block
    ``(e, j)``; ``delta_rho_mat`` has ``(w/d_i) I`` at ``(i, e)`` and
    ``-(w/d_j) rho_ji`` at ``(j, e)``, so their product is ``D1^{-1} L1``.
    """
    rho = check_edge_potential(rho, g)
    m, d = rho.shape[0], rho.shape[1]
    n = g.n
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (m,):
        raise DimensionMismatch(f"expected {m} weights, got {w.shape}")
    deg = np.zeros(n)
    np.add.at(deg, g.u, w)
    np.add.at(deg, g.v, w)

    eye = np.broadcast_to(np.eye(d), (m, d, d))
    rhoT = np.transpose(rho, (0, 2, 1))
    u, v = np.asarray(g.u), np.asarray(g.v)
    edges = np.arange(m)

    parts = [
        _block_coo(u, v, -w[:, None, None] * rho, d),
        _block_coo(v, u, -w[:, None, None] * rhoT, d),
    ]
    r = np.concatenate([p[0] for p in parts] + [np.arange(n * d)])
    c = np.concatenate([p[1] for p in parts] + [np.arange(n * d)])
    x = np.concatenate([p[2] for p in parts] + [np.repeat(deg, d)])
    L1 = scipy.sparse.coo_matrix((x, (r, c)), shape=(n * d, n * d)).tocsr()
    L1.sum_duplicates()

    parts = [_block_coo(edges, u, eye, d), _block_coo(edges, v, -rho, d)]
    dmat = scipy.sparse.coo_matrix(
        (
            np.concatenate([p[2] for p in parts]),
            (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])),
        ),
        shape=(m * d, n * d),
    ).tocsr()

    with np.errstate(divide="ignore"):
        inv = np.where(deg > 0, 1.0 / deg, 0.0)
    parts = [
        _block_coo(u, edges, (w * inv[u])[:, None, None] * eye, d),
        _block_coo(v, edges, -(w * inv[v])[:, None, None] * rhoT, d),
    ]
    delta = scipy.sparse.coo_matrix(
        (
            np.concatenate([p[2] for p in parts]),
            (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])),
        ),
        shape=(n * d, m * d),
    ).tocsr()

    return TwistedOperators(
        L1=L1,
        D1=scipy.sparse.diags(np.repeat(deg, d)),
        d_rho_mat=dmat,
        delta_rho_mat=delta,
        degrees=deg,
        d=d,
    )


def apply_d(f, rho, g):
    """Twisted differential: ``f_i - rho_ij f_j`` on each canonical edge."""
    return edge_residuals(f, rho, g)


def _check_one_form(omega, rho, g):
    omega = np.asarray(omega, dtype=float)
    if omega.ndim < 2 or omega.shape[0] != g.m or omega.shape[1] != rho.shape[1]:
        raise DimensionMismatch(f"one-form of shape {omega.shape} for m={g.m}, d={rho.shape[1]}")
    return omega


def head_coefficients(omega, rho, g):
    """Coefficient of each edge in its head frame, for the reversed edge."""
    return -np.einsum("eba,eb...->ea...", rho, omega)


def apply_delta(omega, rho, g):
    """Twisted codifferential ``(1/d_i) sum_j w_ij p_i(omega_ij)``."""
    rho = check_edge_potential(rho, g)
    omega = _check_one_form(omega, rho, g)
    wshape = (-1,) + (1,) * (omega.ndim - 1)
    w = g.w.reshape(wshape)
    out = np.zeros((g.n,) + omega.shape[1:])
    np.add.at(out, g.u, w * omega)
    np.add.at(out, g.v, w * head_coefficients(omega, rho, g))
    return out / g.degrees.reshape((-1,) + (1,) * (omega.ndim - 1))


def _pairwise(a, b):
    return np.sum((a * b).reshape(len(a), -1), axis=1)


def inner0(f, h, g):
    f = check_vertex_values(f, g)
    h = check_vertex_values(h, g)
    if f.shape != h.shape:
        raise DimensionMismatch(f"shapes {f.shape} and {h.shape} differ")
    return math.fsum((g.degrees * _pairwise(f, h)).tolist())


def inner1_forms(omega, eta, g, rho):
    """Both expressions of the one-form inner product.

    Returns ``(both_orientations, single_orientation)``: the first halves the
    sum over every vertex and every incident edge in that vertex's frame, the
    second sums each canonical edge once in its tail frame.
    """
    rho = check_edge_potential(rho, g)
    omega = _check_one_form(omega, rho, g)
    eta = _check_one_form(eta, rho, g)
    if omega.shape != eta.shape:
        raise DimensionMismatch(f"shapes {omega.shape} and {eta.shape} differ")
    tail = g.w * _pairwise(omega, eta)
    head = g.w * _pairwise(head_coefficients(omega, rho, g), head_coefficients(eta, rho, g))
    both = 0.5 * math.fsum(tail.tolist() + head.tolist())
    single = math.fsum(tail.tolist())
    return both, single


def inner1(omega, eta, g, rho):
    return inner1_forms(omega, eta, g, rho)[1]


def laplacian0(f, rho, g):
    return apply_delta(apply_d(f, rho, g), rho, g)


def laplacian1(omega, rho, g):
    return apply_d(apply_delta(omega, rho, g), rho, g)


@dataclass(frozen=True)
class KernelInfo:
    dim: int  # from pivoted QR of the differential
    eig_dim: int  # eigenvalues of D^{-1} L below tolerance
    eigenvalues: np.ndarray  # smallest d + 1 (or all, if fewer)
    tol: float


def _zero_tol(ops, tol):
    if tol is not None:
        return tol
    # spectrum of D^{-1/2} L D^{-1/2} lies in [0, 2]
    return ZERO_RTOL * 2.0


def kernel_dim(rho, g, tol=None, qr_rtol=QR_RTOL):
    """Numerical dimension of the kernel of the twisted differential."""
    require_connected(g)
    rho = check_edge_potential(rho, g)
    ops = build_operators(g, rho)
    d = ops.d
    N = g.n * d
    k = min(d + 1, N)
    vals, _ = smallest_eigenpairs(ops.normalized, k)
    tol = _zero_tol(ops, tol)
    eig_dim = int(np.sum(vals < tol))

    D = ops.d_rho_mat.toarray()
    if D.shape[0] == 0:
        qr_dim = N
    else:
        R = scipy.linalg.qr(D, mode="r", pivoting=True)[0]
        diag = np.abs(np.diag(R))
        rank = int(np.sum(diag > qr_rtol * diag[0])) if diag.size and diag[0] > 0 else 0
        qr_dim = N - rank
    return KernelInfo(dim=qr_dim, eig_dim=eig_dim, eigenvalues=vals, tol=tol)


def _flat(f, n, d):
    f = np.asarray(f, dtype=float)
    return f.reshape(n * d, -1), f.shape


def hodge_decompose(f, rho, g, tol=None):
    """Split a 0-cochain into its harmonic part and its coexact remainder.

    The harmonic part is the projection, orthogonal in the degree-weighted
    inner product, onto eigenvectors of ``D^{-1} L`` with eigenvalue below
    ``tol`` (default ``1e-8 * lambda_max``).
    """
    require_connected(g)
    rho = check_edge_potential(rho, g)
    d = rho.shape[1]
    f = check_vertex_values(f, g, d)
    ops = build_operators(g, rho)
    S = ops.normalized.toarray()
    vals, vecs = scipy.linalg.eigh(0.5 * (S + S.T))
    if tol is None:
        tol = ZERO_RTOL * max(vals[-1], 1.0)
    Y = vecs[:, vals < tol]
    s = np.repeat(1.0 / np.sqrt(ops.degrees), d)
    X = s[:, None] * Y  # D-orthonormal kernel basis
    F, shape = _flat(f, g.n, d)
    Dm = np.repeat(ops.degrees, d)[:, None]
    harmonic = X @ (X.T @ (Dm * F))
    return harmonic.reshape(shape), (F - harmonic).reshape(shape)


def poisson_solve(f, rho, g):
    """Least-squares solution of ``Delta1 theta = d f``.

    Returns ``(theta, residual_norm)``; ``apply_delta(theta)`` is the coexact
    part of ``f``.
    """
    rho = check_edge_potential(rho, g)
    d = rho.shape[1]
    f = check_vertex_values(f, g, d)
    ops = build_operators(g, rho)
    A = (ops.d_rho_mat @ ops.delta_rho_mat).toarray()
    F, shape = _flat(f, g.n, d)
    b = ops.d_rho_mat @ F
    theta, *_ = scipy.linalg.lstsq(A, b, lapack_driver="gelsd")
    resid = float(np.linalg.norm(A @ theta - b))
    return theta.reshape((g.m,) + shape[1:]), resid


def cheeger_lower_bound(rho, g, weights=None):
    """Mean of the ``d`` smallest eigenvalues of ``D^{-1} L``."""
    require_connected(g)
    rho = check_edge_potential(rho, g)
    ops = build_operators(g, rho, weights)
    vals, _ = smallest_eigenpairs(ops.normalized, ops.d)
    return float(np.sum(vals) / ops.d)


def export_coo(M, path):
    """Write a sparse matrix as ``row col value`` lines with a shape header."""
    C = scipy.sparse.coo_matrix(M)
    order = np.lexsort((C.col, C.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#shape {C.shape[0]} {C.shape[1]}\n")
        for r, c, x in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{r} {c} {x:.17g}\n")
