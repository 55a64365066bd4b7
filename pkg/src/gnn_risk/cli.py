"""``gnn-risk`` command-line interface.

Every subcommand writes CSV or JSON to ``--out`` (stdout by default). Exit
codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .filters import ARCHITECTURES, FilterSpec, GraphContext, depth_response, normalize_response
from .graph import (
    Graph,
    GraphFormatError,
    cycle_block_graph,
    heterophilic_perturbation,
    homophily_ratio,
    load_edge_list,
    load_labels,
)
from .risk import (
    EigenGroup,
    PowerLawProfile,
    RiskProblem,
    gat_gap_contributions,
    gat_optimal_spectrum,
    groups_from_spectrum,
    loglog_slope,
    normalized_misalignment,
    misalignment,
    powerlaw_exponent,
    powerlaw_risk,
    risk_exact,
    risk_homophily_sweep,
)
from .spectral import (
    EigenConvergenceError,
    Spectrum,
    graph_spectrum,
    multiplicity_profile,
    normalized_laplacian,
    spectral_symmetry_defect,
)

DEFAULT_C_LIST = (0.1, 0.01, 0.001, 0.0001)
Z_FAIL = 4.0


class InputError(ValueError):
    """Bad command-line input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def config_hash(args: argparse.Namespace) -> str:
    """SHA-256 of the run configuration (every parsed flag except the output path)."""
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "func", "diagnostics")}
    return hashlib.sha256(json.dumps(_jsonable(cfg), sort_keys=True).encode()).hexdigest()


def emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")


def emit_table(args, header, rows, metadata) -> None:
    if args.format == "csv":
        emit(args, csv_text(header, rows))
    else:
        records = [dict(zip(header, (_jsonable(v) for v in row))) for row in rows]
        emit(args, json_text({"metadata": metadata, "columns": list(header), "rows": records}))


def emit_report(args, report: dict) -> None:
    if args.format == "json":
        emit(args, json_text(report))
        return
    flat = []
    for k, v in sorted(report.items()):
        if isinstance(v, (dict, list, tuple, np.ndarray)):
            v = json.dumps(_jsonable(v), sort_keys=True)
        flat.append((k, v))
    emit(args, csv_text(("key", "value"), flat))


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def parse_grid(text: str, log: bool = False) -> np.ndarray:
    """``start:stop:count`` into a linear (or log-spaced) grid with ``count >= 2``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid {text!r} is not start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputError(f"grid {text!r} is not start:stop:count") from None
    if count < 2:
        raise InputError(f"grid {text!r} needs count >= 2")
    if log:
        if start <= 0 or stop <= 0:
            raise InputError(f"log grid {text!r} needs positive endpoints")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def parse_float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad number list {text!r}") from None
    if not vals:
        raise InputError("empty number list")
    return vals


def parse_models(text: str) -> list[FilterSpec]:
    specs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            specs.append(FilterSpec.parse(item))
        except ValueError as exc:
            raise InputError(f"{exc}") from None
    if not specs:
        raise InputError(f"no models given; available: {', '.join(ARCHITECTURES)}")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise InputError("duplicate model names")
    return specs


def load_graph(args, need_labels: bool = False) -> Graph:
    if args.synthetic and args.graph:
        raise InputError("give either --graph or --synthetic, not both")
    if args.synthetic:
        graph = synthetic_graph(args.synthetic)
    elif args.graph:
        graph = load_edge_list(args.graph)
        if args.labels:
            graph = load_labels(args.labels, graph)
    else:
        raise InputError("a graph is required (--graph PATH or --synthetic SPEC)")
    if need_labels and not graph.is_labeled:
        raise InputError("this command needs node labels (--labels PATH)")
    return graph


def synthetic_graph(text: str) -> Graph:
    kind, _, rest = text.partition(":")
    if kind == "cycle":
        try:
            k, s = (int(v) for v in rest.lower().split("x"))
        except ValueError:
            raise InputError(f"bad cycle spec {text!r}; expected cycle:KxS") from None
        return cycle_block_graph(k, s)
    if kind == "perturb":
        parts = rest.split(":")
        if len(parts) != 4:
            raise InputError("bad perturb spec; expected perturb:<edges>:<labels>:<new_edges>:<seed>")
        path, labels, n_new, seed = parts
        graph = load_labels(labels, load_edge_list(path))
        return heterophilic_perturbation(graph, int(n_new), int(seed))
    raise InputError(f"unknown synthetic graph {text!r}; expected cycle:KxS or perturb:...")


def _spectrum(args, graph: Graph, want_vectors: bool = False) -> Spectrum:
    spec = graph_spectrum(graph, want_vectors=want_vectors, method=args.method)
    if getattr(args, "scale_lambda_max", None):
        spec = spec.scaled(args.scale_lambda_max)
    return spec


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    graph = load_graph(args)
    spec = _spectrum(args, graph)
    prof = multiplicity_profile(spec)
    diag = {
        "n": spec.n,
        "lambda_max": spec.lambda_max,
        "symmetry_defect": spectral_symmetry_defect(spec),
        "trace": float(np.sum(spec.eigenvalues)),
        "multiplicity_tol": prof.tol,
        "multiplicities": [{"value": v, "size": len(idx), "indices": idx} for v, idx in prof.groups],
        "distinct_eigenvalues": len(prof.groups),
        "config_hash": config_hash(args),
    }
    if args.format == "json":
        emit(args, json_text({"eigenvalues": spec.eigenvalues, "diagnostics": diag}))
    else:
        emit(args, csv_text(("index", "eigenvalue"), enumerate(spec.eigenvalues)))
        if args.diagnostics:
            Path(args.diagnostics).write_text(json_text(diag), encoding="utf-8")
    return 0


def _sweep_metadata(args, result, extra=None) -> dict:
    meta = dict(result.metadata)
    meta["config_hash"] = config_hash(args)
    if extra:
        meta.update(extra)
    return meta


def cmd_homophily_sweep(args) -> int:
    specs = parse_models(args.models)
    q_grid = parse_grid(args.q_grid)
    if args.n_eigs < 2:
        raise InputError("--n-eigs must be >= 2")
    lam = np.linspace(0.0, 2.0, args.n_eigs)
    ctx = GraphContext(mean_degree=args.mean_degree, lambda_max=2.0)
    res = risk_homophily_sweep(specs, lam, q_grid, args.c, ctx)
    rows = [[q] + [res.columns[m][k] for m in res.models] for k, q in enumerate(q_grid)]
    emit_table(args, ["q"] + res.models, rows, _sweep_metadata(args, res))
    return 0


def cmd_dataset_sweep(args) -> int:
    specs = parse_models(args.models)
    q_grid = parse_grid(args.q_grid)
    c_list = parse_float_list(args.c_list) if args.c_list else list(DEFAULT_C_LIST)
    graph = load_graph(args)
    spec = _spectrum(args, graph)
    mean_degree = args.mean_degree or graph.degree_profile().mean_degree
    ctx = GraphContext.from_spectrum(spec.eigenvalues, mean_degree=mean_degree)
    rows, meta = [], None
    for c in c_list:
        res = risk_homophily_sweep(specs, spec, q_grid, c, ctx)
        rows += [[c, q] + [res.columns[m][k] for m in res.models] for k, q in enumerate(q_grid)]
        if meta is None:
            meta = _sweep_metadata(args, res)
    meta.pop("c", None)
    meta["c_list"] = c_list
    emit_table(args, ["c", "q"] + [s.name for s in specs], rows, meta)
    return 0


def _features(args, graph: Graph) -> np.ndarray:
    if args.feature_mode == "identity":
        return np.eye(graph.n)
    if args.feature_mode == "random-gaussian":
        dim = args.feature_dim or graph.n
        return np.random.default_rng(args.seed).standard_normal((graph.n, dim))
    if args.feature_mode == "labels":
        return graph.one_hot_labels()
    if not args.features:
        raise InputError("--feature-mode file needs --features PATH")
    Z = np.atleast_2d(np.loadtxt(args.features, ndmin=2))
    if Z.shape[0] != graph.n:
        raise InputError(f"feature file has {Z.shape[0]} rows for {graph.n} nodes")
    return Z


def cmd_misalign(args) -> int:
    graph = load_graph(args, need_labels=True)
    Z = _features(args, graph)
    if args.conv == "identity":
        S = np.eye(graph.n)
    else:
        S = np.eye(graph.n) - normalized_laplacian(graph)
    H = np.linalg.matrix_power(S, args.layers) @ Z
    X = graph.one_hot_labels()
    report = {
        "normalized_misalignment": normalized_misalignment(H, X),
        "misalignment": misalignment(H, X),
        "homophily_ratio": homophily_ratio(graph) if graph.num_edges else None,
        "n": graph.n,
        "classes": X.shape[1],
        "feature_mode": args.feature_mode,
        "feature_dim": Z.shape[1],
        "conv": args.conv,
        "layers": args.layers,
        "seed": args.seed,
        "config_hash": config_hash(args),
    }
    emit_report(args, report)
    return 0


def _load_groups_file(path: str) -> list[EigenGroup]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{path}: expected a nonempty list of groups")
    groups = []
    for k, item in enumerate(raw):
        try:
            groups.append(EigenGroup(float(item.get("lambda_star", 1.0)), tuple(item["weights"])))
        except (KeyError, TypeError, AttributeError):
            raise InputError(f"{path}: group {k} needs a 'weights' list") from None
    return groups


def nested_weights(group_sizes, seed: int, low: float = 0.5, high: float = 1.5) -> list[np.ndarray]:
    """Prior weights per multiplicity group, drawn from ``default_rng([seed, g])``.

    Group ``g`` of the same graph family always starts with the same draws,
    so adding members to a group only appends new weights.
    """
    return [np.random.default_rng([seed, g]).uniform(low, high, size) for g, size in enumerate(group_sizes)]


def _graph_groups(args, graph: Graph) -> list[EigenGroup]:
    spec = _spectrum(args, graph)
    prof = multiplicity_profile(spec)
    if args.weights:
        w = np.loadtxt(args.weights, ndmin=1)
        if w.size != spec.n:
            raise InputError(f"{w.size} weights for {spec.n} eigenvalues")
    else:
        w = np.empty(spec.n)
        for (_, idx), draws in zip(prof.groups, nested_weights(prof.sizes, args.seed)):
            w[idx] = draws
    return groups_from_spectrum(spec, w, tol=prof.tol)


def _gap_report(groups, c, verify):
    contrib = gat_gap_contributions(groups, c)
    report = {
        "gap": float(contrib.sum()),
        "c": c,
        "groups": len(groups),
        "repeated_groups": sum(1 for g in groups if g.size > 1),
        "contributions": contrib,
    }
    ok = True
    if verify:
        products = np.concatenate([g.products for g in groups])
        partition, start = [], 0
        for g in groups:
            partition.append(list(range(start, start + g.size)))
            start += g.size
        brute = oracle_mod.brute_force_gap(products, partition, c)
        report["brute_force_gap"] = brute
        report["verified"] = ok = bool(abs(brute - report["gap"]) <= 1e-4 * max(1.0, abs(report["gap"])))
    return report, ok


def cmd_gat_gap(args) -> int:
    if args.c is None or args.c <= 0:
        raise InputError("--c must be positive")
    if args.groups:
        groups = _load_groups_file(args.groups)
        report, ok = _gap_report(groups, args.c, args.verify)
        report["gat_spectrum"] = gat_optimal_spectrum(groups, args.c)
    elif args.cycle_blocks:
        parts = args.cycle_blocks.split(":")
        if len(parts) != 2:
            raise InputError("--cycle-blocks expects KMIN:KMAX")
        kmin, kmax = int(parts[0]), int(parts[1])
        if kmin < 1 or kmax < kmin:
            raise InputError("--cycle-blocks needs 1 <= KMIN <= KMAX")
        rows, ok = [], True
        for k in range(kmin, kmax + 1):
            groups = _graph_groups(args, cycle_block_graph(k, args.block_size))
            rep, good = _gap_report(groups, args.c, args.verify)
            ok &= good
            rows.append([k, rep["gap"], rep["repeated_groups"]] + ([rep["brute_force_gap"]] if args.verify else []))
        header = ["blocks", "gap", "repeated_groups"] + (["brute_force_gap"] if args.verify else [])
        meta = {"c": args.c, "block_size": args.block_size, "seed": args.seed, "config_hash": config_hash(args)}
        emit_table(args, header, rows, meta)
        return 0 if ok else 1
    else:
        graph = load_graph(args)
        groups = _graph_groups(args, graph)
        report, ok = _gap_report(groups, args.c, args.verify)
        report["seed"] = args.seed
        report["lambda_star"] = "eigenvalue"
    report["config_hash"] = config_hash(args)
    emit_report(args, report)
    return 0 if ok else 1


def cmd_powerlaw(args) -> int:
    meta = {"a": args.a, "b": args.b, "d": args.d, "config_hash": config_hash(args)}
    try:
        if args.b_minus_a_grid:
            gaps = parse_grid(args.b_minus_a_grid)
            rows = []
            for delta in gaps:
                prof = PowerLawProfile(args.a, args.a + delta, args.d, args.c)
                rows.append([delta, powerlaw_risk(prof, "gnn"), powerlaw_risk(prof, "mlp")])
            meta["c"] = args.c
            meta.pop("b")
            emit_table(args, ["b_minus_a", "gnn", "mlp"], rows, meta)
            return 0
        c_grid = parse_grid(args.c_grid, log=True)
        profs = [PowerLawProfile(args.a, args.b, args.d, c) for c in c_grid]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    gnn = np.array([powerlaw_risk(p, "gnn") for p in profs])
    mlp = np.array([powerlaw_risk(p, "mlp") for p in profs])
    meta.update(
        {
            "gnn_fitted_slope": loglog_slope(c_grid, gnn),
            "mlp_fitted_slope": loglog_slope(c_grid, mlp),
            "gnn_asymptotic_exponent": powerlaw_exponent(args.a, args.b, "gnn"),
            "mlp_asymptotic_exponent": powerlaw_exponent(args.a, args.b, "mlp", float(c_grid.max())),
        }
    )
    rows = [[c, g, m] for c, g, m in zip(c_grid, gnn, mlp)]
    if args.format == "csv" and args.diagnostics:
        Path(args.diagnostics).write_text(json_text(meta), encoding="utf-8")
    emit_table(args, ["c", "gnn", "mlp"], rows, meta)
    return 0


def oracle_battery(problems: int, trials: int, seed: int, mode: str = "dual") -> list[dict]:
    out = []
    for k, design in enumerate(oracle_mod.random_battery(problems, seed)):
        cf = risk_exact(RiskProblem(design.lambda_tilde, design.lambda_star, design.prior_weights, design.c))
        est = oracle_mod.simulate_risk(design, trials, rng_seed=seed + k, mode=mode)
        out.append(
            {
                "problem": k,
                "n": design.n,
                "d": design.d,
                "n_train": design.n_train,
                "c": design.c,
                "closed_form": cf,
                "oracle_mean": est.mean_risk,
                "std_error": est.std_error,
                "z_score": est.z_score(cf),
                "trials": trials,
                "seed": seed,
            }
        )
    return out


def cmd_oracle_check(args) -> int:
    if args.trials < 1000:
        raise InputError("--trials must be >= 1000")
    if args.problems < 1:
        raise InputError("--problems must be >= 1")
    records = oracle_battery(args.problems, args.trials, args.seed, args.mode)
    worst = max(abs(r["z_score"]) for r in records)
    meta = {"max_abs_z": worst, "threshold": Z_FAIL, "mode": args.mode, "config_hash": config_hash(args)}
    header = list(records[0])
    emit_table(args, header, [[r[h] for h in header] for r in records], meta)
    return 0 if worst <= Z_FAIL else 1


def cmd_response_table(args) -> int:
    specs = parse_models(args.models)
    grid = parse_grid(args.grid)
    ctx = GraphContext(mean_degree=args.mean_degree, lambda_max=args.lambda_max)
    header, cols = ["lambda"], [grid]
    meta = {"mean_degree": ctx.mean_degree, "lambda_max": ctx.lambda_max, "models": {}, "config_hash": config_hash(args)}
    for spec in specs:
        filt = normalize_response(spec, ctx, grid)
        meta["models"][spec.name] = dict(spec.describe(), scale=filt.scale)
        if args.depth:
            table = depth_response(filt, args.depth, args.skip, grid, ctx)
            for layer, col in enumerate(table, start=1):
                header.append(f"{spec.name}@{layer}")
                cols.append(col)
        else:
            header.append(spec.name)
            cols.append(filt.signed(grid))
    meta["skip"] = bool(args.skip)
    emit_table(args, header, np.column_stack(cols), meta)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _output_flags(p):
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _graph_flags(p, labels=True):
    p.add_argument("--graph", help="edge-list file")
    if labels:
        p.add_argument("--labels", help="node label file")
    p.add_argument("--synthetic", help="cycle:KxS or perturb:<edges>:<labels>:<new_edges>:<seed>")
    p.add_argument("--method", choices=("lapack", "jacobi"), default="lapack", help="eigensolver")
    p.add_argument("--scale-lambda-max", type=float, help="rescale eigenvalues so the largest equals this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnn-risk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="Laplacian eigenvalues and diagnostics")
    _graph_flags(p)
    _output_flags(p)
    p.add_argument("--diagnostics", help="write diagnostics JSON here (csv format)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("homophily-sweep", help="average risk over q on a uniform eigenvalue grid")
    p.add_argument("--models", default="gcn")
    p.add_argument("--n-eigs", type=int, default=100)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--q-grid", default="0:1:101")
    p.add_argument("--mean-degree", type=float, default=4.0)
    _output_flags(p)
    p.set_defaults(func=cmd_homophily_sweep)

    p = sub.add_parser("dataset-sweep", help="average risk over q on a graph's own spectrum")
    _graph_flags(p)
    p.add_argument("--models", default="gcn")
    p.add_argument("--c-list", help="comma-separated noise ratios (default 0.1,0.01,0.001,0.0001)")
    p.add_argument("--q-grid", default="0:1:101")
    p.add_argument("--mean-degree", type=float, help="override the graph's mean degree")
    _output_flags(p)
    p.set_defaults(func=cmd_dataset_sweep)

    p = sub.add_parser("misalign", help="normalized misalignment of H = S^l Z against one-hot labels")
    _graph_flags(p)
    p.add_argument("--feature-mode", choices=("identity", "random-gaussian", "labels", "file"), default="identity")
    p.add_argument("--features", help="whitespace-separated feature matrix (feature-mode file)")
    p.add_argument("--feature-dim", type=int, help="columns of random-gaussian features (default n)")
    p.add_argument("--conv", choices=("normalized-adjacency", "identity"), default="normalized-adjacency")
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _output_flags(p)
    p.set_defaults(func=cmd_misalign)

    p = sub.add_parser("gat-gap", help="excess risk of GAT over Specformer from repeated eigenvalues")
    _graph_flags(p, labels=False)
    p.add_argument("--groups", help='JSON list of {"lambda_star": x, "weights": [...]}')
    p.add_argument("--weights", help="one prior weight per eigenvalue (default: seeded uniform(0.5, 1.5))")
    p.add_argument("--cycle-blocks", help="KMIN:KMAX, sweep cycle_block graphs")
    p.add_argument("--block-size", type=int, default=8)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verify", action="store_true", help="cross-check against brute-force minimization")
    _output_flags(p)
    p.set_defaults(func=cmd_gat_gap)

    p = sub.add_parser("powerlaw", help="GNN vs MLP risk under power-law spectra")
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=4.0)
    p.add_argument("--d", type=int, default=10000)
    p.add_argument("--c-grid", default="1e-4:1e-2:25", help="log-spaced start:stop:count")
    p.add_argument("--b-minus-a-grid", help="sweep b - a over start:stop:count at fixed --c")
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--diagnostics", help="write slope diagnostics JSON here (csv format)")
    _output_flags(p)
    p.set_defaults(func=cmd_powerlaw)

    p = sub.add_parser("oracle-check", help="closed form vs Monte Carlo on random problems")
    p.add_argument("--problems", type=int, default=20)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--mode", choices=("dual", "primal"), default="dual")
    _output_flags(p)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("response-table", help="normalized frequency responses on a grid")
    p.add_argument("--models", default="gcn")
    p.add_argument("--grid", default="0:2:201")
    p.add_argument("--mean-degree", type=float, default=4.0)
    p.add_argument("--lambda-max", type=float, default=2.0)
    p.add_argument("--depth", type=int, help="emit layer 1..DEPTH responses")
    p.add_argument("--skip", action="store_true", help="residual-averaged layers ((g+1)/2)^l")
    _output_flags(p)
    p.set_defaults(func=cmd_response_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphFormatError, ValueError, OSError, EigenConvergenceError, RuntimeError) as exc:
        print(f"gnn-risk {args.command}: error: {exc}", file=sys.stderr)
        return 2
