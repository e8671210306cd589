import json
import math

import numpy as np
import pytest

from sync_geom import __version__
from sync_geom.cli import main
from sync_geom.errors import ParseError, ValidationError
from sync_geom.io import (
    load_graph,
    load_potential,
    load_vertex_potential,
    save_graph,
    save_potential,
    save_vertex_potential,
)
from sync_geom.netgen import SimConfig, simulate_network

from conftest import haar_stack, noisy_instance, planted_instance, random_connected_graph


def _graph_with_m_edges(m, rng):
    while True:
        g = random_connected_graph(20, rng, extra=0.2)
        if g.m >= m:
            return g


def test_round_trips_bit_exact(tmp_path, rng):
    g = _graph_with_m_edges(50, rng)
    rho = haar_stack(g.m, 3, rng)
    save_potential(rho, g, tmp_path / "p.pot")
    assert load_potential(tmp_path / "p.pot", g).tobytes() == rho.tobytes()
    save_graph(g, tmp_path / "g.tsv")
    h = load_graph(tmp_path / "g.tsv")
    assert h.edges == g.edges and h.w.tobytes() == g.w.tobytes()
    f = haar_stack(g.n, 3, rng)
    save_vertex_potential(f, tmp_path / "f.pot")
    assert load_vertex_potential(tmp_path / "f.pot").tobytes() == f.tobytes()


def test_comments_and_blank_lines(tmp_path):
    p = tmp_path / "g.tsv"
    p.write_text("# header\n\n0\t1\t1.5\n  \n# mid\n1\t2\t2\n")
    g = load_graph(p)
    assert g.n == 3 and g.w.tolist() == [1.5, 2.0]


def test_malformed_row_names_line(tmp_path):
    g = load_graph(_write(tmp_path / "g.tsv", "0\t1\t1\n1\t2\t1\n"))
    p = _write(tmp_path / "p.pot", "#d=2\n0\t1\t1 0 0 1\n1\t2\t1 0 0\n")
    with pytest.raises(ParseError) as exc:
        load_potential(p, g)
    assert exc.value.line == 3 and ":3" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        load_graph(_write(tmp_path / "bad.tsv", "0\t1\tx\n"))
    assert exc.value.line == 1 and exc.value.column == 3


def _write(path, text):
    path.write_text(text)
    return path


def test_reversed_lines_and_reprojection(tmp_path):
    g = load_graph(_write(tmp_path / "g.tsv", "0\t1\t1\n"))
    c, s = math.cos(0.3), math.sin(0.3)
    p = _write(tmp_path / "p.pot", f"#d=2\n1\t0\t{c!r} {s!r} {-s!r} {c!r}\n")
    rho = load_potential(p, g)
    np.testing.assert_allclose(rho[0], [[c, -s], [s, c]])  # stored as rho_01 = rho_10^T
    near = _write(tmp_path / "near.pot", f"#d=2\n0\t1\t{c + 1e-8!r} {-s!r} {s!r} {c!r}\n")
    rho = load_potential(near, g)
    np.testing.assert_allclose(rho[0].T @ rho[0], np.eye(2), atol=1e-14)
    far = _write(tmp_path / "far.pot", "#d=2\n0\t1\t1.1 0 0 1\n")
    with pytest.raises(ValidationError):
        load_potential(far, g)
    with pytest.raises(ParseError):
        load_potential(_write(tmp_path / "nohdr.pot", "0\t1\t1 0 0 1\n"), g)


@pytest.fixture
def instance_files(tmp_path, rng):
    g, rho = noisy_instance(12, 2, rng)
    save_graph(g, tmp_path / "g.tsv")
    save_potential(rho, g, tmp_path / "p.pot")
    return tmp_path


def _pair(d):
    return ["--graph", str(d / "g.tsv"), "--potential", str(d / "p.pot")]


def test_cli_sync_stdout(instance_files, capsys):
    assert main(["sync", *_pair(instance_files)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["nu"] >= out["cheeger_lower_bound"] - 1e-8
    assert len(out["eigenvalues"]) == 3
    assert main(["sync", *_pair(instance_files), "--method", "gram-schmidt"]) == 2
    assert capsys.readouterr().err.startswith("error: numerical:")


def test_cli_holonomy_and_spectrum(instance_files, capsys):
    d = instance_files
    assert main(["holonomy", *_pair(d), "--check-kernel"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["synchronizable"] is False and out["kernel_dim"] < 2
    assert main(["spectrum", *_pair(d), "--k", "4", "--out", str(d / "s.csv"),
                 "--export-operators", str(d / "ops")]) == 0
    lines = (d / "s.csv").read_text().splitlines()
    assert lines[0] == "index,eigenvalue" and len(lines) == 5
    for name in ("L1", "D1", "d_rho", "delta_rho"):
        assert (d / "ops" / f"{name}.coo").read_text().startswith("#shape")


def test_cli_errors(tmp_path, instance_files, capsys):
    assert main(["sync", "--graph", str(tmp_path / "nope.tsv"), "--potential", "x"]) == 1
    assert capsys.readouterr().err.startswith("error: io:")
    _write(instance_files / "bad.pot", "#d=1\n" + "".join(
        f"{a}\t{b}\t2\n" for a, b, _ in load_graph(instance_files / "g.tsv").edges))
    rc = main(["sync", "--graph", str(instance_files / "g.tsv"), "--potential", str(instance_files / "bad.pot")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error: validation:")
    assert main(["sync"]) == 1
    assert main(["frobnicate"]) == 1


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_cli_syncut_replay_identical(tmp_path, rng):
    g, gv, rho = planted_instance(16, 2, rng)
    save_graph(g, tmp_path / "g.tsv")
    save_potential(rho, g, tmp_path / "p.pot")
    out = tmp_path / "run"
    assert main(["syncut", *_pair(tmp_path), "--k", "2", "--seed", "3", "--out", str(out)]) == 0
    for name in ("partition.csv", "fstar.pot", "xi_trace.csv", "edge_frustration.csv", "manifest.json"):
        assert (out / name).exists()
    assert (out / "partition.csv").read_text().startswith("vertex,label\n")
    first = _tree_bytes(out)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["config"]["K"] == 2
    assert set(manifest["inputs"]) == {"graph", "potential"}
    assert main(["replay", "--manifest", str(out / "manifest.json")]) == 0
    assert _tree_bytes(out) == first


def test_cli_simulate_and_bench(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps(SimConfig(n_per_component=12, d=2, degree_min=3, degree_max=5,
                                        inter_links_min=4, inter_links_max=8).to_dict()))
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--seed", "4", "--out", str(out)]) == 0
    g = load_graph(out / "graph.tsv")
    rho = load_potential(out / "potential.pot", g)
    inst = simulate_network(SimConfig.from_json(cfg), 4)
    assert rho.tobytes() == inst.rho.tobytes()

    csv = tmp_path / "bench.csv"
    assert main(["bench", "--config", str(cfg), "--trials", "2", "--seed", "1", "--out", str(csv)]) == 0
    rows = csv.read_text().splitlines()
    assert rows[0] == "trial,seed,gap,syncut_err,ncut_err,iters,error" and len(rows) == 3
    first = csv.read_bytes()
    assert main(["replay", "--manifest", str(csv) + ".manifest.json"]) == 0
    assert csv.read_bytes() == first
