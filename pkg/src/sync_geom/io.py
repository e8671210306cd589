"""Text formats for graphs, potentials and tabular results.

Graph file: ``u<TAB>v<TAB>w`` per line, ``#`` comments.
Edge potential file: ``#d=<d>`` header, then ``u<TAB>v<TAB>m11 m12 ... mdd``.
Vertex potential file: ``#d=<d>`` header, then ``i<TAB>m11 ... mdd``.
Floats are written with ``%.17g`` so a save/load round trip is bit-exact.
"""

import csv
import hashlib

import numpy as np

from .errors import NoSuchEdge, ParseError, ValidationError
from .graph import build_graph
from .potentials import ORTH_TOL, orthogonality_defects, project_blocks

ACCEPT_TOL = 1e-6


def _fmt(x):
    return "%.17g" % x


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def _int(tok, path, lineno, col):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", path, lineno, col) from None


def _float(tok, path, lineno, col):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", path, lineno, col) from None


def load_graph(path, n=None):
    edges = []
    for lineno, line in _data_lines(path):
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", path, lineno)
        edges.append(
            (
                _int(fields[0], path, lineno, 1),
                _int(fields[1], path, lineno, 2),
                _float(fields[2], path, lineno, 3),
            )
        )
    try:
        return build_graph(edges, n=n)
    except ValidationError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def save_graph(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n} m={g.m}\n")
        for a, b, w in zip(g.u.tolist(), g.v.tolist(), g.w.tolist()):
            fh.write(f"{a}\t{b}\t{_fmt(w)}\n")


def _read_header_d(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#d="):
                return _int(line[3:].strip(), path, lineno, 1)
            if not line.startswith("#"):
                break
    raise ParseError("missing '#d=<d>' header", path)


def _matrix(tokens, d, path, lineno, offset):
    if len(tokens) != d * d:
        raise ParseError(f"expected {d * d} matrix entries, got {len(tokens)}", path, lineno)
    vals = [_float(t, path, lineno, offset + k) for k, t in enumerate(tokens)]
    return np.array(vals).reshape(d, d)


def _reproject(mats, path, orth_tol, accept_tol, what):
    defects = orthogonality_defects(mats)
    bad = np.flatnonzero(defects > accept_tol)
    if bad.size:
        k = int(bad[0])
        raise ValidationError(
            f"{path}: {what} {k} is not orthogonal (defect {defects[k]:.3e} > {accept_tol:g})"
        )
    fix = defects > orth_tol
    if fix.any():
        mats = mats.copy()
        mats[fix], _ = project_blocks(mats[fix])
    return mats


def load_potential(path, g, orth_tol=ORTH_TOL, accept_tol=ACCEPT_TOL):
    """Edge potential aligned with the canonical edges of ``g``.

    Lines may name an edge in either direction; a reversed line is stored
    transposed.  Blocks within ``accept_tol`` of orthogonal are re-projected,
    blocks further away are rejected.
    """
    d = _read_header_d(path)
    rho = np.full((g.m, d, d), np.nan)
    seen = np.zeros(g.m, dtype=bool)
    for lineno, line in _data_lines(path):
        fields = line.split()
        if len(fields) < 2:
            raise ParseError("expected 'u v m11 ... mdd'", path, lineno)
        a = _int(fields[0], path, lineno, 1)
        b = _int(fields[1], path, lineno, 2)
        M = _matrix(fields[2:], d, path, lineno, 3)
        try:
            e, forward = g.edge_index(a, b)
        except NoSuchEdge:
            raise ParseError(f"edge ({a}, {b}) is not in the graph", path, lineno) from None
        if seen[e]:
            raise ParseError(f"edge ({a}, {b}) listed twice", path, lineno)
        seen[e] = True
        rho[e] = M if forward else M.T
    if not seen.all():
        e = int(np.flatnonzero(~seen)[0])
        raise ValidationError(f"{path}: no value for edge ({g.u[e]}, {g.v[e]})")
    return _reproject(rho, path, orth_tol, accept_tol, "edge")


def format_potential(rho, g):
    d = rho.shape[1]
    lines = [f"#d={d}"]
    for e, (a, b) in enumerate(zip(g.u.tolist(), g.v.tolist())):
        lines.append(f"{a}\t{b}\t" + " ".join(_fmt(x) for x in rho[e].ravel()))
    return "\n".join(lines) + "\n"


def save_potential(rho, g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_potential(np.asarray(rho), g))


def format_vertex_potential(f):
    f = np.asarray(f)
    lines = [f"#d={f.shape[1]}"]
    for i, block in enumerate(f):
        lines.append(f"{i}\t" + " ".join(_fmt(x) for x in block.ravel()))
    return "\n".join(lines) + "\n"


def save_vertex_potential(f, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_vertex_potential(f))


def load_vertex_potential(path, n=None, orth_tol=ORTH_TOL, accept_tol=ACCEPT_TOL):
    d = _read_header_d(path)
    blocks = {}
    for lineno, line in _data_lines(path):
        fields = line.split()
        i = _int(fields[0], path, lineno, 1)
        if i in blocks:
            raise ParseError(f"vertex {i} listed twice", path, lineno)
        blocks[i] = _matrix(fields[1:], d, path, lineno, 2)
    n = (max(blocks) + 1 if blocks else 0) if n is None else n
    missing = [i for i in range(n) if i not in blocks]
    if missing or len(blocks) != n:
        raise ValidationError(f"{path}: vertex ids must cover 0..{n - 1} exactly")
    f = np.stack([blocks[i] for i in range(n)]) if n else np.zeros((0, d, d))
    return _reproject(f, path, orth_tol, accept_tol, "vertex")


def save_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, float) else x for x in row])


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
