"""Smallest eigenpairs of symmetric matrices, dense or sparse."""

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConvergenceFailure, ValidationError

DENSE_LIMIT = 2000
ITER_TOL = 1e-10
ITER_MAXITER = 5000


def _norm_est(M):
    if scipy.sparse.issparse(M):
        return float(abs(M).sum(axis=1).max()) if M.shape[0] else 0.0
    return float(np.abs(M).sum(axis=1).max()) if M.shape[0] else 0.0


def smallest_eigenpairs(M, k, check=True):
    """The ``k`` smallest eigenpairs of a symmetric matrix, ascending.

    Dense LAPACK below ``DENSE_LIMIT`` rows, shift-invert Lanczos above.
    """
    N = M.shape[0]
    if not 1 <= k <= N:
        raise ValidationError(f"requested {k} eigenpairs of a {N}x{N} matrix")
    scale = max(_norm_est(M), 1.0)
    asym = abs(M - M.T).max() if scipy.sparse.issparse(M) else np.abs(M - M.T).max()
    if asym > 1e-12 * scale:
        raise ValidationError(f"matrix is not symmetric (defect {asym:.3e})")

    if N <= DENSE_LIMIT:
        A = M.toarray() if scipy.sparse.issparse(M) else np.asarray(M, dtype=float)
        A = 0.5 * (A + A.T)
        vals, vecs = scipy.linalg.eigh(A, subset_by_index=[0, k - 1])
    else:
        A = scipy.sparse.csc_matrix(M)
        # fixed start vector keeps the iteration bit-reproducible
        v0 = np.cos(np.arange(N) + 1.0)
        shift = -1e-3 * scale
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                A, k=k, sigma=shift, which="LM", v0=v0, tol=ITER_TOL, maxiter=ITER_MAXITER
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceFailure(str(exc)) from exc
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        # re-orthonormalize within near-degenerate clusters
        vecs, _ = np.linalg.qr(vecs)
        vals = np.einsum("ij,ij->j", vecs, A @ vecs)

    if check:
        resid = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
        if resid.size and resid.max() > 1e-8 * scale:
            raise ConvergenceFailure(f"eigen-residual {resid.max():.3e} exceeds tolerance")
    return vals, vecs
