"""Command line front end.

Exit codes: 0 success, 2 usage error, 3 data or model error, 4 tolerance
or infeasibility error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .attribution import GridSpec
from .data import load_dataset, load_grouping, load_stats, standardize
from .deep import deep_explain, domains_from_data, ThresholdSpec
from .errors import (
    ChainingLimitExceeded,
    DataError,
    DeepExplainError,
    InfeasibleTarget,
    ModelFormatError,
    OutOfDomain,
    RootSolveError,
    ToleranceNotReached,
)
from .model import layer_activations, load_model
from .report import emit_decomposition
from .rootfind import RootTarget, solve_root

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TOL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def parse_rows(spec, n):
    """``"0:20"``, ``"3"``, ``"1,4,7"`` or mixes like ``"0:5,9"``; 0-based."""
    if spec is None:
        return list(range(n))
    rows = []
    for part in spec.split(","):
        part = part.strip()
        try:
            if ":" in part:
                a, b = part.split(":", 1)
                start = int(a) if a else 0
                stop = int(b) if b else n
                rows.extend(range(start, stop))
            else:
                rows.append(int(part))
        except ValueError:
            raise UsageError(f"bad --rows value {spec!r}") from None
    bad = [r for r in rows if not 0 <= r < n]
    if bad:
        raise UsageError(f"--rows out of range for {n} observations: {bad[:5]}")
    return rows


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", required=True)
    data.add_argument("--rows")
    data.add_argument("--stats", help="mean,std sidecar; default: computed from --data")
    data.add_argument("--standardize", choices=("on", "off"), default="on")
    data.add_argument("--tol", type=float, default=1e-6)
    data.add_argument("--mode", choices=("min", "threshold"), default="min")
    data.add_argument("--threshold", type=float)
    data.add_argument("--out")
    data.add_argument("--format", choices=("csv", "json"), default="csv")

    explain = argparse.ArgumentParser(add_help=False)
    explain.add_argument("--grid-step", type=float, default=0.01)
    explain.add_argument("--grid-min", type=int, default=50)
    explain.add_argument("--grid-max", type=int, default=2**20)
    explain.add_argument("--scheme", choices=("left", "midpoint"), default="midpoint")
    explain.add_argument("--groups")
    explain.add_argument("--redistribute", choices=("on", "off"))
    explain.add_argument("--chaining", choices=("exact", "shared"), default="exact")

    parser = argparse.ArgumentParser(prog="deepexplain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("explain", parents=[common, data, explain],
                   help="decompose predictions into feature contributions")
    sub.add_parser("validate", parents=[common, data, explain],
                   help="conservation audit; nonzero exit if any row exceeds --tol")
    root = sub.add_parser("root", parents=[common, data], help="print root points")
    root.add_argument("--layer", type=int, default=-1)
    root.add_argument("--neuron", type=int, default=0)
    info = sub.add_parser("model-info", parents=[common], help="architecture summary")
    info.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _mode(args):
    if args.mode == "threshold":
        if args.threshold is None:
            raise UsageError("--mode threshold requires --threshold")
        return ThresholdSpec(args.threshold)
    if args.threshold is not None:
        raise UsageError("--threshold is only valid with --mode threshold")
    return "min"


def _load(args):
    model = load_model(args.model)
    X, names = load_dataset(args.data, columns=model.feature_names)
    if X.shape[1] != model.input_dim:
        raise DataError(
            f"{args.data}: {X.shape[1]} columns but the model takes {model.input_dim}"
        )
    if X.shape[0] == 0:
        raise DataError(f"{args.data}: no observations")
    if args.stats is not None:
        X, _ = standardize(X, load_stats(args.stats))
    elif args.standardize == "on":
        X, _ = standardize(X, names=names)
    return model, X, names


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _run_batch(args):
    mode = _mode(args)
    if args.grid_min < 1 or args.grid_max < args.grid_min or not args.grid_step > 0:
        raise UsageError("need 0 < --grid-step and 1 <= --grid-min <= --grid-max")
    grid = GridSpec.proportional(args.grid_step, args.grid_min, args.grid_max, args.scheme)
    model, X, names = _load(args)
    grouping = load_grouping(args.groups) if args.groups else None
    rows = parse_rows(args.rows, X.shape[0])
    if args.redistribute is None:
        redistribute = not isinstance(mode, ThresholdSpec)
    else:
        redistribute = args.redistribute == "on"
    domains = domains_from_data(model, X)
    results, failures = [], []
    for r in rows:
        try:
            res = deep_explain(model, X[r], domains, grid, args.tol, mode, redistribute,
                               args.chaining)
            results.append((r, res))
        except (InfeasibleTarget, ToleranceNotReached, ChainingLimitExceeded,
                RootSolveError) as err:
            failures.append((r, err))
    return model, names, grouping, results, failures


def _cmd_explain(args):
    _, names, grouping, results, failures = _run_batch(args)
    text = emit_decomposition([res for _, res in results], names, grouping, args.format,
                              [r for r, _ in results])
    _write(text, args.out)
    for r, err in failures:
        print(f"row {r}: {type(err).__name__}: {err}", file=sys.stderr)
    return EXIT_TOL if failures else EXIT_OK


def _cmd_validate(args):
    _, _, _, results, failures = _run_batch(args)
    errors = [res.reconstruction_error for _, res in results]
    over = [(r, res.reconstruction_error) for r, res in results
            if res.reconstruction_error > args.tol]
    ok = not over and not failures
    summary = {
        "observations": len(results) + len(failures),
        "tol": args.tol,
        "max_reconstruction_error": max(errors, default=0.0),
        "mean_reconstruction_error": float(np.mean(errors)) if errors else 0.0,
        "over_tolerance": len(over),
        "failed": len(failures),
        "status": "ok" if ok else "fail",
    }
    if args.format == "json":
        text = json.dumps(summary, indent=2) + "\n"
    else:
        text = "".join(
            f"{k}: {v!r}\n" if isinstance(v, float) else f"{k}: {v}\n"
            for k, v in summary.items()
        )
    _write(text, args.out)
    for r, e in over:
        print(f"row {r}: reconstruction error {e:.17g} > tol {args.tol:.17g}", file=sys.stderr)
    for r, err in failures:
        print(f"row {r}: {type(err).__name__}: {err}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_TOL


def _cmd_root(args):
    mode = _mode(args)
    model, X, _ = _load(args)
    n_layers = len(model.layers)
    li = args.layer + n_layers if args.layer < 0 else args.layer
    if not 0 <= li < n_layers:
        raise UsageError(f"--layer {args.layer} out of range for {n_layers} layers")
    layer = model.layers[li]
    if not 0 <= args.neuron < layer.out_dim:
        raise UsageError(f"--neuron {args.neuron} out of range for {layer.out_dim} neurons")
    if isinstance(mode, ThresholdSpec):
        if not layer.link.admits_level(mode.level):
            raise UsageError(f"--threshold {mode.level} outside the image of {layer.link.kind}")
        target = RootTarget.explicit(mode.level)
    else:
        target = RootTarget.minimum()
    rows = parse_rows(args.rows, X.shape[0])
    inputs = X if li == 0 else layer_activations(model, X)[li - 1]
    domain = domains_from_data(model, X)[li]
    w, b = layer.weights[args.neuron], layer.biases[args.neuron]
    columns = ["row", *(f"theta_{j}" for j in range(layer.in_dim)), "achieved", "residual", "distance"]
    table, failures = [], []
    for r in rows:
        try:
            root = solve_root(inputs[r], w, b, layer.link, domain, target)
        except InfeasibleTarget as err:
            failures.append((r, InfeasibleTarget(err.level, err.attainable, layer=li,
                                                 neuron=args.neuron)))
            continue
        table.append([r, *root.theta.tolist(), root.achieved, root.residual, root.distance])
    if args.format == "json":
        text = json.dumps({"layer": li, "neuron": args.neuron, "columns": columns,
                           "rows": [dict(zip(columns, t)) for t in table]}, indent=2) + "\n"
    else:
        lines = [",".join(columns)]
        lines += [",".join(str(t[0]) if i == 0 else format(v, ".17g") for i, v in enumerate(t))
                  for t in table]
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    for r, err in failures:
        print(f"row {r}: {type(err).__name__}: {err}", file=sys.stderr)
    return EXIT_TOL if failures else EXIT_OK


def _cmd_model_info(args):
    model = load_model(args.model)
    layers = [
        {
            "index": i,
            "in_dim": layer.in_dim,
            "out_dim": layer.out_dim,
            "activation": layer.link.kind,
            **({"slope": layer.link.slope} if layer.link.kind == "leaky_relu" else {}),
            "trivial": layer.link.trivial,
            "parameters": layer.weights.size + layer.biases.size,
        }
        for i, layer in enumerate(model.layers)
    ]
    info = {
        "format_version": model.format_version,
        "input_dim": model.input_dim,
        "output_dim": model.output_dim,
        "hidden_layers": model.n_hidden,
        "parameters": sum(l["parameters"] for l in layers),
        "feature_names": model.names(),
        "layers": layers,
    }
    if args.format == "json":
        sys.stdout.write(json.dumps(info, indent=2) + "\n")
        return EXIT_OK
    out = [
        f"format_version: {info['format_version']}",
        f"input_dim: {info['input_dim']}",
        f"output_dim: {info['output_dim']}",
        f"hidden_layers: {info['hidden_layers']}",
        f"parameters: {info['parameters']}",
        f"features: {', '.join(info['feature_names'])}",
        "layers:",
    ]
    for l in layers:
        act = l["activation"] + (f"(slope={l['slope']!r})" if "slope" in l else "")
        kind = "trivial" if l["trivial"] else "path-integrated"
        out.append(f"  [{l['index']}] {l['in_dim']} -> {l['out_dim']}  {act}  {kind}")
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


COMMANDS = {
    "explain": _cmd_explain,
    "validate": _cmd_validate,
    "root": _cmd_root,
    "model-info": _cmd_model_info,
}


def cli_main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"deepexplain: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelFormatError, DataError, OutOfDomain, OSError) as exc:
        print(f"deepexplain: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DeepExplainError, ValueError) as exc:
        print(f"deepexplain: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TOL if isinstance(exc, DeepExplainError) else EXIT_USAGE


def main():
    sys.exit(cli_main())
