"""Random synchronization networks and the SynCut vs. NCut benchmark.

A network is two connected random graphs with prescribed degree sequences,
joined by random inter-component links.  The edge potential is exactly
synchronizable inside each component (induced by a planted vertex
potential) and independent Haar-random on the links.
"""

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eigen import smallest_eigenpairs
from .errors import (
    LengthMismatch,
    NotGraphical,
    RetriesExhausted,
    SyncGeomError,
    ValidationError,
)
from .graph import build_graph, is_connected
from .solver import spectral_clustering
from .syncut import SynCutConfig, _task_seed, syncut

MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class SimConfig:
    n_per_component: int = 40
    d: int = 3
    degree_min: int = 4
    degree_max: int = 8
    inter_links_min: int = 20
    inter_links_max: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"d must be positive, got {self.d}")
        if not 1 <= self.degree_min <= self.degree_max < self.n_per_component:
            raise ValidationError(
                "need 1 <= degree_min <= degree_max < n_per_component, got "
                f"{self.degree_min}, {self.degree_max}, {self.n_per_component}"
            )
        if not 1 <= self.inter_links_min <= self.inter_links_max:
            raise ValidationError("inter-link range must be positive and ordered")
        if self.inter_links_max > self.n_per_component**2:
            raise ValidationError("more inter-links requested than cross pairs exist")

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)


PAPER_SCALE = SimConfig(
    n_per_component=100, d=5, degree_min=4, degree_max=8, inter_links_min=100, inter_links_max=250
)
DESK_SCALE = SimConfig()


@dataclass(frozen=True, eq=False)
class SimInstance:
    graph: object
    rho: np.ndarray
    planted_g: np.ndarray
    planted_labels: np.ndarray
    n_inter_links: int
    spectral_gap: float
    degree_sequences: list = field(default_factory=list)


def random_orthogonal(d, rng):
    """Haar-distributed element of O(d)."""
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def is_graphical(degrees):
    """Erdos-Gallai test."""
    seq = np.sort(np.asarray(degrees, dtype=np.int64))[::-1]
    if seq.size == 0:
        return True
    if seq[-1] < 0 or seq.sum() % 2:
        return False
    n = len(seq)
    k = np.arange(1, n + 1)
    lhs = np.cumsum(seq)
    # sum_{i>k} min(d_i, k) for every k
    capped = np.minimum(seq[None, :], k[:, None])
    capped[np.arange(n)[None, :] < k[:, None]] = 0
    rhs_tail = capped.sum(axis=1)
    return bool(np.all(lhs <= k * (k - 1) + rhs_tail))


def _sequential_sample(degrees, rng):
    """One sequential importance-sampling draw of a simple graph realizing
    ``degrees``: repeatedly take the lowest-index vertex of minimal positive
    residual degree and connect it to a candidate drawn proportionally to
    residual degree among those keeping the residual sequence graphical."""
    res = np.array(degrees, dtype=np.int64)
    n = len(res)
    adj = [set() for _ in range(n)]
    edges = []
    while res.any():
        pos = np.flatnonzero(res > 0)
        i = int(pos[np.argmin(res[pos])])
        while res[i] > 0:
            cands = [j for j in range(n) if j != i and res[j] > 0 and j not in adj[i]]
            valid = []
            for j in cands:
                res[i] -= 1
                res[j] -= 1
                if is_graphical(res):
                    valid.append(j)
                res[i] += 1
                res[j] += 1
            if not valid:
                raise NotGraphical("residual sequence admits no valid candidate")
            p = res[valid].astype(float)
            j = valid[int(rng.choice(len(valid), p=p / p.sum()))]
            adj[i].add(j)
            adj[j].add(i)
            edges.append((min(i, j), max(i, j)))
            res[i] -= 1
            res[j] -= 1
    return sorted(edges)


def random_connected_degree_graph(degrees, rng, max_attempts=MAX_ATTEMPTS):
    """Connected simple graph with the given degree sequence, unit weights."""
    degrees = [int(x) for x in degrees]
    if not is_graphical(degrees):
        raise NotGraphical(f"degree sequence is not graphical: {degrees}")
    for _ in range(max_attempts):
        g = build_graph([(a, b, 1.0) for a, b in _sequential_sample(degrees, rng)], n=len(degrees))
        if is_connected(g):
            return g
    raise RetriesExhausted(f"no connected realization in {max_attempts} attempts")


def _component(config, rng):
    for _ in range(MAX_ATTEMPTS):
        seq = rng.integers(config.degree_min, config.degree_max + 1, size=config.n_per_component)
        if not is_graphical(seq):
            continue
        try:
            return random_connected_degree_graph(seq, rng, max_attempts=1), seq
        except RetriesExhausted:
            continue
    raise RetriesExhausted(f"no connected component after {MAX_ATTEMPTS} sequence draws")


def normalized_spectral_gap(g):
    """Second smallest eigenvalue of ``D^{-1/2} L D^{-1/2}``."""
    L = g.laplacian()
    s = 1.0 / np.sqrt(g.degrees)
    vals, _ = smallest_eigenpairs(s[:, None] * L * s[None, :], 2, check=False)
    return float(vals[1])


def simulate_network(config, seed=None):
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    N, d = config.n_per_component, config.d
    g1, seq1 = _component(config, rng)
    g2, seq2 = _component(config, rng)
    n_links = int(rng.integers(config.inter_links_min, config.inter_links_max + 1))
    picks = rng.choice(N * N, size=n_links, replace=False)
    links = sorted((int(p // N), N + int(p % N)) for p in picks)

    planted = np.stack([random_orthogonal(d, rng) for _ in range(2 * N)])
    edges = (
        [(a, b, 1.0) for a, b in zip(g1.u.tolist(), g1.v.tolist())]
        + [(N + a, N + b, 1.0) for a, b in zip(g2.u.tolist(), g2.v.tolist())]
        + [(a, b, 1.0) for a, b in links]
    )
    g = build_graph(edges, n=2 * N)
    labels = np.repeat([0, 1], N)
    rho = np.einsum("eab,ecb->eac", planted[g.u], planted[g.v])
    inter = np.flatnonzero(labels[g.u] != labels[g.v])
    for e in inter:
        rho[e] = random_orthogonal(d, rng)
    return SimInstance(
        graph=g,
        rho=rho,
        planted_g=planted,
        planted_labels=labels,
        n_inter_links=n_links,
        spectral_gap=normalized_spectral_gap(g),
        degree_sequences=[seq1.tolist(), seq2.tolist()],
    )


def error_ratio(pred_labels, true_labels, K=None):
    """Fraction of misclassified vertices, minimized over label permutations."""
    pred = np.asarray(pred_labels, dtype=np.int64)
    true = np.asarray(true_labels, dtype=np.int64)
    if pred.shape != true.shape:
        raise LengthMismatch(f"{pred.shape} vs {true.shape}")
    n = len(pred)
    if n == 0:
        return 0.0
    if K is None:
        K = int(max(pred.max(), true.max())) + 1
    confusion = np.zeros((K, K), dtype=np.int64)
    np.add.at(confusion, (pred, true), 1)
    if K <= 6:
        best = max(
            sum(confusion[k, perm[k]] for k in range(K)) for perm in itertools.permutations(range(K))
        )
    else:
        r, c = linear_sum_assignment(-confusion)
        best = confusion[r, c].sum()
    return 1.0 - best / n


BENCH_COLUMNS = ["trial", "seed", "gap", "syncut_err", "ncut_err", "iters", "error"]


def run_trial(config, trial, master_seed, syncut_config=None):
    seed = _task_seed(master_seed, trial)
    row = {"trial": trial, "seed": seed, "gap": float("nan"), "syncut_err": float("nan"),
           "ncut_err": float("nan"), "iters": -1, "error": ""}
    try:
        inst = simulate_network(config, seed)
        row["gap"] = inst.spectral_gap
        base = syncut_config or SynCutConfig(K=2)
        sc = syncut(inst.graph, inst.rho, SynCutConfig(**{**base.to_dict(), "seed": seed}))
        nc = spectral_clustering(inst.graph, None, 2, seed=seed, restarts=base.restarts)
        row["syncut_err"] = error_ratio(sc.partition.labels, inst.planted_labels, 2)
        row["ncut_err"] = error_ratio(nc.labels, inst.planted_labels, 2)
        row["iters"] = sc.iterations
    except SyncGeomError as exc:
        row["error"] = f"{exc.kind}:{type(exc).__name__}"
    return row


def _run_trial_args(args):
    return run_trial(*args)


def run_benchmark(config, n_trials, master_seed, jobs=1, syncut_config=None):
    """One row per trial, ordered by trial index."""
    if n_trials < 1:
        raise ValidationError("n_trials must be at least 1")
    tasks = [(config, t, master_seed, syncut_config) for t in range(n_trials)]
    if jobs <= 1:
        return [_run_trial_args(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_trial_args, tasks))
