"""Command-line front end binding the analysis modules into reproducible
runs.

Subcommands: classify-weight, tree-demo, geometry-audit, growth-report and
solve-graph.  Each reads one JSON config (flags override file fields),
writes machine-readable outputs atomically, and embeds the config hash and
tool version in every file.  Exit codes: 0 success, 1 input error, 2
inconclusive numerics, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import geometry, graphs, line, quasimin
from .errors import (
    InternalInvariantViolation,
    InvalidConfig,
    NonConvergence,
    PharmonicError,
    ToleranceNotMet,
)
from .quadrature import INCONCLUSIVE
from .reporting import atomic_write_text, csv_report, json_report
from .solver import solve_dirichlet
from .weights import weight_from_config

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCONCLUSIVE = 2
EXIT_INTERNAL = 3

WITNESS_SAMPLE_SPAN = 100.0
WITNESS_SAMPLE_COUNT = 41


def _out_path(name: str, explicit) -> Path:
    if explicit:
        return Path(explicit)
    base = Path(os.environ.get("PHARMONIC_OUTDIR", "."))
    return base / name


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc


def _build_space(cfg: dict):
    """Space block: grid / path / tree / strip generators or an edge list."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise InvalidConfig("space config needs a 'kind'")
    kind = cfg["kind"]
    if kind == "grid":
        g = graphs.build_grid_graph(int(cfg.get("radius", 32)))
        center = int(cfg.get("center", (g.n - 1) // 2))
    elif kind == "path":
        half = int(cfg.get("half_length", 32))
        g = graphs.build_path_graph(half, float(cfg.get("spacing", 1.0)))
        center = int(cfg.get("center", half))
    elif kind == "tree":
        g = graphs.build_binary_tree(int(cfg.get("depth", 8)))
        center = int(cfg.get("center", 0))
    elif kind == "strip":
        g = graphs.build_strip_graph(
            int(cfg.get("half_length", 16)), int(cfg.get("width_divisions", 2))
        )
        mid_col = int(cfg.get("half_length", 16)) * int(cfg.get("width_divisions", 2))
        center = int(cfg.get("center", mid_col * (int(cfg.get("width_divisions", 2)) + 1)))
    elif kind == "edge_list":
        g = graphs.read_edge_list(cfg["path"])
        center = cfg.get("center", 0)
        if isinstance(center, str):
            center = g.index_of(center)
        center = int(center)
    else:
        raise InvalidConfig(f"unknown space kind {kind!r}")
    g.check_vertex(center)
    return g, center


def _build_function(g, center, cfg: dict, p: float):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise InvalidConfig("function config needs a 'kind'")
    kind = cfg["kind"]
    if kind == "coordinate":
        return graphs.coordinate_function(g, int(cfg.get("axis", 0)))
    if kind == "constant":
        return graphs.GraphFunction(g, np.full(g.n, float(cfg.get("value", 0.0))))
    if kind == "tree-unbounded":
        return graphs.paper_tree_function(g, p)
    if kind == "tree-bounded":
        return graphs.bounded_tree_function(g, p)
    if kind == "solve-rim-coordinate":
        if g.coords is None:
            raise InvalidConfig("solve-rim-coordinate needs a coordinate graph")
        axis = int(cfg.get("axis", 0))
        rim_extent = np.abs(g.coords).max(axis=1)
        rim = np.flatnonzero(rim_extent == rim_extent.max())
        bdry = {int(i): float(g.coords[i, axis]) for i in rim}
        return solve_dirichlet(g, p, bdry, tol=float(cfg.get("tol", 1e-8)))
    if kind == "csv":
        vals = np.zeros(g.n)
        seen = 0
        for ln in Path(cfg["path"]).read_text().splitlines():
            if not ln or ln.startswith("#") or ln.startswith("vertex"):
                continue
            name, val = ln.split(",")
            idx = g.index_of(name) if g.names is not None else int(name)
            vals[idx] = float(val)
            seen += 1
        if seen != g.n:
            raise InvalidConfig(f"function csv covers {seen} of {g.n} vertices")
        return graphs.GraphFunction(g, vals)
    raise InvalidConfig(f"unknown function kind {kind!r}")


# -- subcommands -----------------------------------------------------------------


def cmd_classify_weight(args) -> int:
    cfg = _load_config(args.config)
    if args.p is not None:
        cfg["p"] = args.p
    w = weight_from_config(cfg)
    r_max = float(cfg.get("r_max", 1e6))
    verdict = line.classify_liouville(w, r_max=r_max)
    payload = verdict.to_dict()
    if verdict.witness is not None:
        xs = np.linspace(-WITNESS_SAMPLE_SPAN, WITNESS_SAMPLE_SPAN, WITNESS_SAMPLE_COUNT)
        payload["witness"] = {
            "kind": "canonical_p_harmonic",
            "a_coef": 1.0,
            "b_coef": 0.0,
            "samples": [[float(x), float(v)] for x, v in zip(xs, verdict.witness.values(xs))],
        }
    out = _out_path("liouville_verdict.json", args.out)
    atomic_write_text(out, json_report(payload, cfg, __version__))
    print(f"wrote {out}")
    print(
        f"bounded Liouville: {'holds' if verdict.bounded_liouville_holds else 'fails'}; "
        f"positive Liouville: {'holds' if verdict.positive_liouville_holds else 'fails'}; "
        f"tail: {verdict.tail_flag}"
    )
    return EXIT_INCONCLUSIVE if verdict.tail_flag == INCONCLUSIVE else EXIT_OK


def cmd_tree_demo(args) -> int:
    p = args.p
    depth = args.depth
    tol = args.tol
    t = graphs.build_binary_tree(depth)
    interior = t.interior_mask()
    report_lines = [f"binary tree demo: p={p!r} depth={depth}"]
    ok = True
    energies = {}
    for label, fn in (
        ("unbounded", graphs.paper_tree_function),
        ("bounded", graphs.bounded_tree_function),
    ):
        u = fn(t, p)
        res = graphs.p_laplacian_residuals(t, u, p)
        max_res = float(np.abs(res[interior]).max())
        energy = graphs.graph_energy(t, u, p)
        energies[label] = energy
        sup = float(np.abs(u.values).max())
        report_lines.append(
            f"{label}: max interior residual {max_res:.3e}, energy {energy!r}, "
            f"sup |u| {sup!r}, max u {float(u.values.max())!r}"
        )
        ok &= max_res < tol
    series = graphs.tree_energy_partial_sum(p, depth)
    limit = graphs.tree_energy_limit(p)
    dev = abs(energies["unbounded"] - series)
    report_lines.append(
        f"energy vs series partial sum: {energies['unbounded']!r} vs {series!r} "
        f"(|diff| {dev:.3e}); depth-infinity limit {limit!r}"
    )
    bound = 2.0 ** (p / (p - 1.0)) * energies["unbounded"]
    report_lines.append(
        f"bounded-function energy {energies['bounded']!r} <= "
        f"2^(p/(p-1)) * unbounded energy {bound!r}: "
        f"{energies['bounded'] <= bound * (1 + 1e-12)}"
    )
    ok &= dev <= 1e-10 * max(1.0, series)
    ok &= energies["bounded"] <= bound * (1 + 1e-12)
    text = "\n".join(report_lines)
    print(text)
    if args.out:
        cfg = {"p": p, "depth": depth, "tol": tol}
        atomic_write_text(
            _out_path("tree_demo.json", args.out),
            json_report(
                {
                    "p": p,
                    "depth": depth,
                    "energies": energies,
                    "series_partial_sum": series,
                    "series_limit": limit,
                    "passed": bool(ok),
                },
                cfg,
                __version__,
            ),
        )
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_geometry_audit(args) -> int:
    cfg = _load_config(args.config)
    if args.radii:
        cfg["radii"] = [float(r) for r in args.radii.split(",")]
    g, center = _build_space(cfg.get("space", {}))
    radii = [float(r) for r in cfg.get("radii", [4, 8, 16, 32])]
    lam_bda = float(cfg.get("Lambda", 2.0))
    lam = float(cfg.get("lambda", 1.0))
    delta = cfg.get("delta")
    rows = geometry.chainability_audit(
        g,
        center,
        radii,
        lam_bda=lam_bda,
        delta=None if delta is None else float(delta),
        lam=lam,
        max_points=int(cfg.get("max_points", 4)),
    )
    fit = geometry.volume_growth_fit(g, center, radii) if len(radii) >= 4 else None
    lines = ["r,chainable,N_max,doubling_ratio,mass"]
    for row in rows:
        lines.append(
            f"{row.r!r},{str(row.chainable).lower()},{row.n_max},"
            f"{row.doubling_ratio!r},{row.mass!r}"
        )
    out = _out_path("geometry_audit.csv", args.out)
    atomic_write_text(out, csv_report(lines, cfg, __version__))
    print(f"wrote {out}")
    for row in rows:
        print(
            f"r={row.r:g}: chainable={row.chainable} N_max={row.n_max} "
            f"N0={row.n0} doubling={row.doubling_ratio:.3g} mass={row.mass:.6g}"
        )
    if fit is not None:
        print(
            f"volume growth: alpha={fit.alpha:.4f} sigma={fit.sigma:.4f} "
            f"s={fit.s:.4f} R2={fit.fit_quality:.6f} "
            f"superpolynomial={fit.superpolynomial}"
        )
    return EXIT_OK


def cmd_growth_report(args) -> int:
    cfg = _load_config(args.config)
    if args.p is not None:
        cfg["p"] = args.p
    if args.radii:
        cfg["radii"] = [float(r) for r in args.radii.split(",")]
    p = float(cfg.get("p", 2.0))
    g, center = _build_space(cfg.get("space", {}))
    u = _build_function(g, center, cfg.get("function", {"kind": "coordinate"}), p)
    radii = [float(r) for r in cfg.get("radii", [2, 4, 8, 16])]
    alpha = cfg.get("alpha")
    report = quasimin.growth_report(
        g,
        u,
        center,
        radii,
        p=p,
        alpha=None if alpha is None else float(alpha),
        lam=float(cfg.get("lambda", 1.0)),
        lam_bda=None if cfg.get("Lambda") is None else float(cfg["Lambda"]),
    )
    out_json = _out_path("growth_report.json", args.out_json)
    out_csv = _out_path("growth_report.csv", args.out_csv)
    atomic_write_text(out_json, json_report(report.to_dict(), cfg, __version__))
    atomic_write_text(out_csv, csv_report(report.csv_rows(), cfg, __version__))
    print(f"wrote {out_json} and {out_csv}")
    print(report.to_text())
    return EXIT_OK


def cmd_solve_graph(args) -> int:
    g = graphs.read_edge_list(args.edges)
    boundary = graphs.read_boundary_values(args.roles, g)
    if not boundary:
        raise InvalidConfig(f"role file {args.roles} flags no boundary vertices")
    u = solve_dirichlet(g, args.p, boundary, tol=args.tol)
    cfg = {
        "edges": str(args.edges),
        "roles": str(args.roles),
        "p": args.p,
        "tol": args.tol,
    }
    out = _out_path("solution.csv", args.out)
    atomic_write_text(
        out, csv_report(graphs.graph_function_csv_lines(u), cfg, __version__)
    )
    res = graphs.p_laplacian_residuals(g, u, args.p)
    interior = np.ones(g.n, dtype=bool)
    interior[list(boundary)] = False
    max_res = float(np.abs(res[interior]).max()) if interior.any() else 0.0
    print(f"wrote {out}")
    print(f"max interior residual: {max_res:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pharmonic",
        description=(
            "p-harmonic functions and quasiminimizer diagnostics on weighted "
            "metric graphs and the weighted real line"
        ),
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify-weight", help="Liouville classification of a weight")
    c.add_argument("--config", required=True, help="weight config JSON")
    c.add_argument("--p", type=float, default=None, help="override exponent p")
    c.add_argument("--out", default=None, help="verdict JSON path")
    c.set_defaults(func=cmd_classify_weight)

    c = sub.add_parser("tree-demo", help="weighted binary tree demonstration")
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--depth", type=int, default=12)
    c.add_argument("--tol", type=float, default=1e-12)
    c.add_argument("--out", default=None, help="optional JSON report path")
    c.set_defaults(func=cmd_tree_demo)

    c = sub.add_parser("geometry-audit", help="doubling, growth and chainability")
    c.add_argument("--config", required=True)
    c.add_argument("--radii", default=None, help="comma list, overrides config")
    c.add_argument("--out", default=None, help="audit CSV path")
    c.set_defaults(func=cmd_geometry_audit)

    c = sub.add_parser("growth-report", help="energy and oscillation growth")
    c.add_argument("--config", required=True)
    c.add_argument("--p", type=float, default=None)
    c.add_argument("--radii", default=None)
    c.add_argument("--out-json", default=None)
    c.add_argument("--out-csv", default=None)
    c.set_defaults(func=cmd_growth_report)

    c = sub.add_parser("solve-graph", help="Dirichlet solve from an edge list")
    c.add_argument("--edges", required=True, help="edge list file")
    c.add_argument("--roles", required=True, help="boundary values file")
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--tol", type=float, default=1e-10)
    c.add_argument("--out", default=None, help="solution CSV path")
    c.set_defaults(func=cmd_solve_graph)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InternalInvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ToleranceNotMet, NonConvergence) as exc:
        print(f"inconclusive numerics: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (PharmonicError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
