"""Weighted undirected graphs with canonical edge orientation.

Edges are stored once, oriented ``u -> v`` with ``u < v``.  Everything that
lives on directed edges (edge potentials, one-forms) is indexed by the
canonical edge index and derives its reverse from the appropriate law.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    NoSuchEdge,
    NonpositiveWeight,
    SelfLoop,
    ValidationError,
)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable weighted graph.

    ``adjacency[i]`` lists ``(neighbor, edge_index, forward)`` sorted by
    neighbor id, where ``forward`` is True when ``i`` is the tail of the
    canonical orientation.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    degrees: np.ndarray
    adjacency: tuple
    _index: dict = field(repr=False)

    @property
    def m(self):
        return len(self.w)

    @property
    def edges(self):
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def edge_index(self, i, j):
        """Return ``(e, forward)`` for the directed pair ``(i, j)``."""
        a, b = (i, j) if i < j else (j, i)
        try:
            e = self._index[(a, b)]
        except KeyError:
            raise NoSuchEdge(f"no edge between {i} and {j}") from None
        return e, i < j

    def has_edge(self, i, j):
        a, b = (i, j) if i < j else (j, i)
        return (a, b) in self._index

    def with_weights(self, w):
        """Same topology, new weights.  Edges with zero weight are dropped."""
        w = np.asarray(w, dtype=float)
        if w.shape != self.w.shape:
            raise ValidationError(f"expected {self.m} weights, got {w.shape}")
        keep = w > 0
        return build_graph(
            zip(self.u[keep].tolist(), self.v[keep].tolist(), w[keep].tolist()),
            n=self.n,
        )

    def laplacian(self, weights=None):
        """Combinatorial graph Laplacian as a dense ``n x n`` array."""
        w = self.w if weights is None else np.asarray(weights, dtype=float)
        L = np.zeros((self.n, self.n))
        np.add.at(L, (self.u, self.v), -w)
        np.add.at(L, (self.v, self.u), -w)
        deg = np.zeros(self.n)
        np.add.at(deg, self.u, w)
        np.add.at(deg, self.v, w)
        L[np.diag_indices(self.n)] += deg
        return L


def build_graph(edge_list, n=None):
    """Canonicalize an edge list of ``(u, v, w)`` triples.

    ``n`` defaults to one past the largest vertex id seen.
    """
    us, vs, ws = [], [], []
    index = {}
    for k, (a, b, wt) in enumerate(edge_list):
        a, b, wt = int(a), int(b), float(wt)
        if a < 0 or b < 0:
            raise ValidationError(f"edge {k}: negative vertex id")
        if a == b:
            raise SelfLoop(f"edge {k}: self-loop at vertex {a}")
        if not wt > 0 or not np.isfinite(wt):
            raise NonpositiveWeight(f"edge {k}: weight {wt!r} on ({a}, {b})")
        if a > b:
            a, b = b, a
        if (a, b) in index:
            raise DuplicateEdge(f"edge {k}: duplicate edge ({a}, {b})")
        index[(a, b)] = len(us)
        us.append(a)
        vs.append(b)
        ws.append(wt)

    top = max(max(us, default=-1), max(vs, default=-1)) + 1
    if n is None:
        n = top
    elif top > n:
        raise ValidationError(f"vertex id {top - 1} out of range for n={n}")

    u = np.array(us, dtype=np.int64)
    v = np.array(vs, dtype=np.int64)
    w = np.array(ws, dtype=float)
    deg = np.zeros(n)
    np.add.at(deg, u, w)
    np.add.at(deg, v, w)

    adj = [[] for _ in range(n)]
    for e, (a, b) in enumerate(zip(us, vs)):
        adj[a].append((b, e, True))
        adj[b].append((a, e, False))
    adjacency = tuple(tuple(sorted(lst)) for lst in adj)

    return WeightedGraph(
        n=int(n),
        u=_frozen(u),
        v=_frozen(v),
        w=_frozen(w),
        degrees=_frozen(deg),
        adjacency=adjacency,
        _index=index,
    )


@dataclass(frozen=True, eq=False)
class SpanningTree:
    root: int
    parent: np.ndarray  # parent vertex, -1 for roots and unreached vertices
    parent_edge: np.ndarray  # canonical edge index to parent, -1 if none
    tree_edge_mask: np.ndarray
    order: np.ndarray  # BFS visiting order of the root's component
    depth: np.ndarray

    def path_to_root(self, i):
        """Oriented edge sequence ``i -> parent(i) -> ... -> root``."""
        path = []
        while self.parent[i] >= 0:
            p = int(self.parent[i])
            path.append((int(i), p))
            i = p
        return path


def spanning_tree(g, root=0):
    """Breadth-first spanning tree over the component of ``root``."""
    if not 0 <= root < g.n:
        raise ValidationError(f"root {root} out of range for n={g.n}")
    parent = np.full(g.n, -1, dtype=np.int64)
    parent_edge = np.full(g.n, -1, dtype=np.int64)
    depth = np.full(g.n, -1, dtype=np.int64)
    mask = np.zeros(g.m, dtype=bool)
    depth[root] = 0
    order = [root]
    queue = deque([root])
    while queue:
        i = queue.popleft()
        for j, e, _ in g.adjacency[i]:
            if depth[j] < 0:
                depth[j] = depth[i] + 1
                parent[j] = i
                parent_edge[j] = e
                mask[e] = True
                order.append(j)
                queue.append(j)
    return SpanningTree(
        root=int(root),
        parent=_frozen(parent),
        parent_edge=_frozen(parent_edge),
        tree_edge_mask=_frozen(mask),
        order=_frozen(np.array(order, dtype=np.int64)),
        depth=_frozen(depth),
    )


@dataclass(frozen=True)
class CycleBasis:
    non_tree_edges: list
    cycles: list  # each a list of oriented (i, j) steps

    def __len__(self):
        return len(self.non_tree_edges)


def _require_spanning(g, t):
    if len(t.order) != g.n:
        raise DisconnectedGraph(
            f"graph has {g.n} vertices but the tree from {t.root} reaches {len(t.order)}"
        )


def cycle_basis(g, t):
    """Fundamental cycles, one per non-tree edge.

    Each cycle starts at the tail ``u`` of the non-tree edge, crosses it in
    canonical direction ``u -> v`` and returns to ``u`` through the tree.
    """
    _require_spanning(g, t)
    non_tree = [int(e) for e in np.flatnonzero(~t.tree_edge_mask)]
    cycles = []
    for e in non_tree:
        a, b = int(g.u[e]), int(g.v[e])
        up_b = t.path_to_root(b)
        up_a = t.path_to_root(a)
        # strip the common suffix (shared path above the lowest common ancestor)
        while up_a and up_b and up_a[-1] == up_b[-1]:
            up_a.pop()
            up_b.pop()
        down_a = [(j, i) for i, j in reversed(up_a)]
        cycles.append([(a, b)] + up_b + down_a)
    return CycleBasis(non_tree_edges=non_tree, cycles=cycles)


def connected_components(g):
    labels = np.full(g.n, -1, dtype=np.int64)
    current = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        labels[s] = current
        queue = deque([s])
        while queue:
            i = queue.popleft()
            for j, _, _ in g.adjacency[i]:
                if labels[j] < 0:
                    labels[j] = current
                    queue.append(j)
        current += 1
    return labels


def is_connected(g):
    return g.n <= 1 or int(connected_components(g).max()) == 0


def require_connected(g):
    if not is_connected(g):
        raise DisconnectedGraph(f"graph with {g.n} vertices is not connected")


def volume(g, subset=None):
    if subset is None:
        return float(g.degrees.sum())
    idx = np.asarray(list(subset) if not isinstance(subset, np.ndarray) else subset)
    if idx.dtype == bool:
        return float(g.degrees[idx].sum())
    return float(g.degrees[idx.astype(np.int64)].sum()) if idx.size else 0.0


def induced_subgraph(g, vertices, weights=None):
    """Subgraph on ``vertices`` (relabelled ``0..k-1`` in the given order).

    Returns ``(subgraph, edge_ids)`` where ``edge_ids[k]`` is the index in
    ``g`` of the subgraph's ``k``-th canonical edge.  Because relabelling is
    monotone only for sorted input, ``vertices`` is sorted first.
    """
    verts = np.unique(np.asarray(vertices, dtype=np.int64))
    local = np.full(g.n, -1, dtype=np.int64)
    local[verts] = np.arange(len(verts))
    w = g.w if weights is None else np.asarray(weights, dtype=float)
    keep = (local[g.u] >= 0) & (local[g.v] >= 0)
    edge_ids = np.flatnonzero(keep)
    sub = build_graph(
        zip(local[g.u[keep]].tolist(), local[g.v[keep]].tolist(), w[keep].tolist()),
        n=len(verts),
    )
    return sub, verts, edge_ids
