"""SynCut: partition a graph into pieces on which a prescribed edge potential
is (close to) synchronizable.

Each iteration synchronizes globally, reweights edges by their frustration,
clusters, synchronizes each cluster on its own, glues the local solutions
together with one group element per cluster, reweights again and clusters a
second time.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import RankDeficient, ValidationError, ZeroVolumeClass
from .graph import build_graph, connected_components, induced_subgraph, require_connected
from .potentials import (
    check_edge_potential,
    edge_frustrations,
    nu_subgraph,
    project_to_orthogonal,
)
from .solver import RESTARTS, Partition, spectral_clustering, spectral_sync

ZERO_FRUSTRATION = 1e-14
MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class SynCutConfig:
    K: int = 2
    max_iters: int = 10
    xi_tol: float = 1e-8
    seed: int = 0
    restarts: int = RESTARTS

    def __post_init__(self):
        if self.K < 2:
            raise ValidationError(f"K must be at least 2, got {self.K}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be positive, got {self.max_iters}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SynCutResult:
    partition: Partition
    f_star: np.ndarray
    xi_trace: list
    iterations: int
    final_edge_frustrations: np.ndarray
    collage_flags: list  # iterations where a collage alignment fell back to I


def reweight(w, f, rho, g):
    """``eps_ij = w_ij exp(-|f_i - rho_ij f_j|^2 / sigma)``, sigma the mean of
    the nonzero edge frustrations.  Returns ``w`` unchanged when every
    frustration is zero."""
    w = np.asarray(w, dtype=float)
    fr = edge_frustrations(f, rho, g)
    if fr.size == 0:
        return w.copy()
    nonzero = fr > max(ZERO_FRUSTRATION, ZERO_FRUSTRATION * fr.max())
    if not nonzero.any():
        return w.copy()
    sigma = fr[nonzero].mean()
    # capped so eps stays strictly positive
    return w * np.exp(-np.minimum(fr / sigma, MAX_EXPONENT))


def _cross_aggregates(labels, locals_, rho, g, weights):
    """Per ordered class pair ``p < q``: sum of ``w g_a^T rho_ab g_b`` over
    edges from class ``p`` to class ``q``, and the summed weight."""
    lu, lv = labels[g.u], labels[g.v]
    cross = np.flatnonzero(lu != lv)
    agg = {}
    for e in cross:
        a, b = int(g.u[e]), int(g.v[e])
        p, q = int(lu[e]), int(lv[e])
        term = weights[e] * (locals_[a].T @ rho[e] @ locals_[b])
        if p > q:
            p, q, term = q, p, term.T
        M, W = agg.get((p, q), (0.0, 0.0))
        agg[(p, q)] = (M + term, W + weights[e])
    return agg


def collage(labels, K, locals_, rho, g, weights=None):
    """Align per-class local solutions by right multiplication.

    ``locals_`` is an ``(n, d, d)`` array holding each class's local
    potential on its own vertices.  Returns ``(f_star, h, fell_back)`` with
    ``f_star[u] = locals_[u] @ h[labels[u]]``.
    """
    rho = check_edge_potential(rho, g)
    labels = np.asarray(labels, dtype=np.int64)
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    d = rho.shape[1]
    h = np.broadcast_to(np.eye(d), (K, d, d)).copy()
    fell_back = False
    agg = _cross_aggregates(labels, locals_, rho, g, w)

    if K == 2:
        if (0, 1) in agg:
            try:
                h[0] = project_to_orthogonal(agg[(0, 1)][0])
            except RankDeficient:
                fell_back = True
    elif agg:
        pairs = sorted(agg)
        red_rho = np.empty((len(pairs), d, d))
        for k, pq in enumerate(pairs):
            try:
                red_rho[k] = project_to_orthogonal(agg[pq][0])
            except RankDeficient:
                red_rho[k] = np.eye(d)
                fell_back = True
        reduced = build_graph([(p, q, agg[(p, q)][1]) for p, q in pairs], n=K)
        comp = connected_components(reduced)
        for c in range(int(comp.max()) + 1):
            nodes = np.flatnonzero(comp == c)
            if len(nodes) < 2:
                continue
            sub, verts, eids = induced_subgraph(reduced, nodes)
            res = spectral_sync(sub, red_rho[eids])
            fell_back |= bool(res.rank_deficient)
            h[verts] = res.f

    f_star = np.einsum("nab,nbc->nac", locals_, h[labels])
    return f_star, h, fell_back


def objective_xi(labels, K, rho, g, locals_):
    """``(sum_l nu(S_l)) (sum_k 1 / vol(S_k))`` with each ``nu(S_l)`` taken at
    the supplied local potential and volumes from the original weights."""
    labels = np.asarray(labels)
    num = 0.0
    inv_vol = 0.0
    for k in range(K):
        members = np.flatnonzero(labels == k)
        vol = float(g.degrees[members].sum())
        if not vol > 0:
            raise ZeroVolumeClass(f"class {k} has zero volume")
        inv_vol += 1.0 / vol
        num += nu_subgraph(members, locals_, rho, g)
    return num * inv_vol


def local_sync(g, rho, members, weights):
    """Synchronize ``rho`` on the subgraph induced by ``members``.

    Disconnected classes are synchronized one connected piece at a time; the
    pieces are then glued by :func:`collage`, which has no cross edges to
    work with inside an induced subgraph and so leaves them as they are.
    """
    d = rho.shape[1]
    sub, verts, eids = induced_subgraph(g, members, weights)
    sub_rho = rho[eids]
    out = np.broadcast_to(np.eye(d), (len(verts), d, d)).copy()
    pieces = connected_components(sub)
    n_pieces = int(pieces.max()) + 1 if len(verts) else 0
    for c in range(n_pieces):
        nodes = np.flatnonzero(pieces == c)
        if len(nodes) < 2:
            continue
        piece, pverts, peids = induced_subgraph(sub, nodes)
        out[pverts] = spectral_sync(piece, sub_rho[peids]).f
    if n_pieces > 1:
        out, _, _ = collage(pieces, n_pieces, out, sub_rho, sub)
    return verts, out


def _task_seed(seed, *path):
    return int(np.random.SeedSequence([int(seed), *path]).generate_state(1)[0])


def syncut(g, rho, config=None):
    config = SynCutConfig() if config is None else config
    rho = check_edge_potential(rho, g)
    require_connected(g)
    if config.K > g.n:
        raise ValidationError(f"K={config.K} exceeds the vertex count {g.n}")
    d = rho.shape[1]
    w = np.array(g.w, dtype=float)
    eps = w.copy()
    trace = []
    flags = []
    partition = None
    f_star = None
    for t in range(config.max_iters):
        f_t = spectral_sync(g, rho, eps).f
        eps = reweight(w, f_t, rho, g)
        first = spectral_clustering(
            g, eps, config.K, seed=_task_seed(config.seed, t, 0), restarts=config.restarts
        )

        locals_ = np.empty((g.n, d, d))
        for members in first.classes():
            verts, vals = local_sync(g, rho, members, eps)
            locals_[verts] = vals

        f_star, _, fell_back = collage(first.labels, config.K, locals_, rho, g)
        if fell_back:
            flags.append(t)
        eps = reweight(w, f_star, rho, g)
        partition = spectral_clustering(
            g, eps, config.K, seed=_task_seed(config.seed, t, 1), restarts=config.restarts
        )
        trace.append(objective_xi(partition.labels, config.K, rho, g, f_star))
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < config.xi_tol:
            break

    return SynCutResult(
        partition=partition,
        f_star=f_star,
        xi_trace=trace,
        iterations=len(trace),
        final_edge_frustrations=edge_frustrations(f_star, rho, g),
        collage_flags=flags,
    )
