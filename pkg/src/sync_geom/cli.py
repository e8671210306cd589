"""Command line entry point: ``sync-geom <subcommand> ...``.

Exit codes: 0 success, 1 input or validation error, 2 numerical failure.
Errors are reported as a single ``error: <kind>: <detail>`` line on stderr.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError, SyncGeomError
from .hodge import build_operators, cheeger_lower_bound, export_coo, kernel_dim
from .holonomy import SYNC_TOL, holonomy_generators
from .io import (
    file_digest,
    format_vertex_potential,
    load_graph,
    load_potential,
    save_csv,
    save_graph,
    save_potential,
    save_vertex_potential,
)
from .eigen import smallest_eigenpairs
from .netgen import BENCH_COLUMNS, DESK_SCALE, PAPER_SCALE, SimConfig, run_benchmark, simulate_network
from .potentials import ORTH_TOL
from .solver import gram_schmidt_sync, spectral_sync
from .syncut import SynCutConfig, syncut


class UsageError(SyncGeomError):
    kind = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _manifest(args, argv, config, inputs, seed=None):
    return {
        "subcommand": args.command,
        "argv": list(argv),
        "config": config,
        "inputs": {k: {"path": str(p), "sha256": file_digest(p)} for k, p in inputs.items()},
        "seed": seed,
        "version": __version__,
    }


def _load_pair(args):
    g = load_graph(args.graph)
    rho = load_potential(args.potential, g, orth_tol=args.orth_tol)
    return g, rho


def cmd_sync(args, argv):
    g, rho = _load_pair(args)
    if args.method == "gram-schmidt":
        res = gram_schmidt_sync(g, rho)
    else:
        res = spectral_sync(g, rho)
    report = holonomy_generators(rho, g, sync_tol=args.tol)
    out = {
        "eigenvalues": res.eigenvalues.tolist(),
        "nu": res.nu,
        "eta": res.eta,
        "cheeger_lower_bound": cheeger_lower_bound(rho, g),
        "synchronizable": report.synchronizable,
        "max_deviation": report.max_deviation,
        "rank_deficient_blocks": res.rank_deficient,
        "method": args.method,
        "vertex_potential": format_vertex_potential(res.f),
    }
    _dump(out, args.out)
    if args.out:
        cfg = {"method": args.method, "tol": args.tol, "orth_tol": args.orth_tol}
        inputs = {"graph": args.graph, "potential": args.potential}
        _dump(_manifest(args, argv, cfg, inputs), str(args.out) + ".manifest.json")


def cmd_holonomy(args, argv):
    g, rho = _load_pair(args)
    report = holonomy_generators(rho, g, root=args.root, sync_tol=args.sync_tol)
    out = report.to_json(g)
    if args.check_kernel:
        info = kernel_dim(rho, g)
        out["kernel_dim"] = info.dim
        out["kernel_eigenvalues"] = info.eigenvalues.tolist()
    _dump(out, args.out)


def cmd_spectrum(args, argv):
    g, rho = _load_pair(args)
    ops = build_operators(g, rho)
    k = min(args.k if args.k else ops.d + 1, g.n * ops.d)
    vals, _ = smallest_eigenpairs(ops.normalized, k)
    rows = [(i, float(x)) for i, x in enumerate(vals)]
    if args.out:
        save_csv(args.out, ["index", "eigenvalue"], rows)
    else:
        sys.stdout.write("index,eigenvalue\n")
        for i, x in rows:
            sys.stdout.write(f"{i},{x:.17g}\n")
    if args.export_operators:
        dest = Path(args.export_operators)
        dest.mkdir(parents=True, exist_ok=True)
        export_coo(ops.L1, dest / "L1.coo")
        export_coo(ops.D1, dest / "D1.coo")
        export_coo(ops.d_rho_mat, dest / "d_rho.coo")
        export_coo(ops.delta_rho_mat, dest / "delta_rho.coo")


def cmd_syncut(args, argv):
    g, rho = _load_pair(args)
    config = SynCutConfig(
        K=args.k, max_iters=args.max_iters, xi_tol=args.xi_tol, seed=args.seed, restarts=args.restarts
    )
    res = syncut(g, rho, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(out / "partition.csv", ["vertex", "label"], enumerate(res.partition.labels.tolist()))
    save_vertex_potential(res.f_star, out / "fstar.pot")
    save_csv(out / "xi_trace.csv", ["iter", "xi"], enumerate(res.xi_trace))
    save_csv(
        out / "edge_frustration.csv",
        ["u", "v", "frustration"],
        zip(g.u.tolist(), g.v.tolist(), res.final_edge_frustrations.tolist()),
    )
    summary = {
        "iterations": res.iterations,
        "xi": res.xi_trace[-1],
        "connected_flags": res.partition.connected_flags,
        "collage_fallback_iterations": res.collage_flags,
    }
    _dump(summary, out / "summary.json")
    inputs = {"graph": args.graph, "potential": args.potential}
    _dump(_manifest(args, argv, config.to_dict(), inputs, args.seed), out / "manifest.json")


def _sim_config(args):
    if args.paper_scale:
        return PAPER_SCALE
    if args.config:
        return SimConfig.from_json(args.config)
    return DESK_SCALE


def cmd_simulate(args, argv):
    config = _sim_config(args)
    inst = simulate_network(config, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_graph(inst.graph, out / "graph.tsv")
    save_potential(inst.rho, inst.graph, out / "potential.pot")
    save_vertex_potential(inst.planted_g, out / "planted.pot")
    save_csv(out / "labels.csv", ["vertex", "label"], enumerate(inst.planted_labels.tolist()))
    _dump(
        {
            "n_inter_links": inst.n_inter_links,
            "spectral_gap": inst.spectral_gap,
            "degree_sequences": inst.degree_sequences,
        },
        out / "instance.json",
    )
    inputs = {"config": args.config} if args.config else {}
    _dump(_manifest(args, argv, config.to_dict(), inputs, args.seed), out / "manifest.json")


def _jobs(requested):
    cap = os.environ.get("SYNC_GEOM_THREADS")
    if cap:
        return max(1, min(requested, int(cap)))
    return max(1, requested)


def cmd_bench(args, argv):
    config = _sim_config(args)
    rows = run_benchmark(config, args.trials, args.seed, jobs=_jobs(args.jobs))
    save_csv(args.out, BENCH_COLUMNS, ([r[c] for c in BENCH_COLUMNS] for r in rows))
    inputs = {"config": args.config} if args.config else {}
    cfg = {**config.to_dict(), "trials": args.trials}
    _dump(_manifest(args, argv, cfg, inputs, args.seed), str(args.out) + ".manifest.json")


def cmd_replay(args, argv):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


def _add_pair(p):
    p.add_argument("--graph", required=True)
    p.add_argument("--potential", required=True)
    p.add_argument("--orth-tol", type=float, default=ORTH_TOL)


def _add_sim(p):
    p.add_argument("--config", help="JSON file with SimConfig fields")
    p.add_argument("--paper-scale", action="store_true", help="N=100, d=5, inter-links 100-250")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def build_parser():
    parser = _Parser(prog="sync-geom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sync-geom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sync", help="spectral synchronization of an edge potential")
    _add_pair(p)
    p.add_argument("--tol", type=float, default=SYNC_TOL)
    p.add_argument("--method", choices=["spectral", "gram-schmidt"], default="spectral")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("holonomy", help="holonomy generators and synchronizability")
    _add_pair(p)
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--sync-tol", type=float, default=SYNC_TOL)
    p.add_argument("--check-kernel", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("spectrum", help="smallest eigenvalues of the connection Laplacian")
    _add_pair(p)
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--export-operators", metavar="DIR")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("syncut", help="partition by synchronizability")
    _add_pair(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--xi-tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_syncut)

    p = sub.add_parser("simulate", help="draw a random synchronization network")
    _add_sim(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="SynCut vs NCut on simulated networks")
    _add_sim(p)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        rc = args.func(args, argv)
        return 0 if rc is None else rc
    except NumericalError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 2
    except SyncGeomError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: io: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
