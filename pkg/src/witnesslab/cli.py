"""Command-line front end.

Every command prints a JSON report ``{command, inputs, results,
paper_comparison}`` to stdout. Exit codes: 0 ok, 1 ``verify`` found a hard
disagreement, 2 bad input, 3 failed precondition, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import claims, gme
from .catalog import resolve_observable, resolve_state, resolve_witness
from .errors import InputError, NotAWitnessError, PreconditionError
from .operators import eigvalsh, local_basis, local_decompose, to_dict
from .scan import BOUND_SLACK, classify_point, simplex_scan
from .separability import OptimizerConfig, grid_oracle, seesaw_extremum, separability_window
from .spa import (
    compress,
    mirror_identity_residual,
    mirror_pair,
    prop2_bounds,
    spa_minus,
    spa_plus,
    xpa,
)
from .witnesses import detect

EXIT_OK, EXIT_DISAGREE, EXIT_INPUT, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 1, 2, 3, 4


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        resolution=getattr(args, "resolution", 24),
    )


def _inputs(args) -> dict:
    skip = {"handler", "json", "csv", "timestamps"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _reference(args):
    return resolve_observable(args.reference) if getattr(args, "reference", None) else None


def _optional(fn):
    """Result of ``fn()``, or ``None`` when its precondition fails."""
    try:
        return fn()
    except PreconditionError:
        return None


def _write_traces(path, results: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("mode", "restart", "iteration", "value"))
        for mode, res in results.items():
            for r, trace in enumerate(res.traces):
                for i, v in enumerate(trace):
                    writer.writerow((mode, r, i, repr(float(v))))


def cmd_window(args):
    a = resolve_observable(args.observable)
    cfg = _config(args)
    modes = ("min", "max") if args.mode == "both" else (args.mode,)
    found = {m: seesaw_extremum(a, m, cfg) for m in modes}
    results = {}
    if "min" in found:
        results["L"] = found["min"].value
    if "max" in found:
        results["U"] = found["max"].value
    results["certificates"] = {m: r.certificate.to_dict() for m, r in found.items()}
    results["metadata"] = {m: r.metadata() for m, r in found.items()}
    if args.oracle:
        results["oracle"] = {m: grid_oracle(a, m, cfg).value for m in modes}
    if args.csv:
        _write_traces(args.csv, found)
    return results, claims.paper_comparison("window", args.observable, results)


def cmd_spa(args):
    w = resolve_witness(args.witness)
    x = _reference(args)
    plus = _optional(lambda: spa_plus(w, x))
    minus = _optional(lambda: spa_minus(w, x))
    results = {
        "spectrum": eigvalsh(w).tolist(),
        "p_plus": plus.weight if plus else None,
        "p_minus": minus.weight if minus else None,
        "positive": plus.to_dict() if plus else None,
        "negative": minus.to_dict() if minus else None,
    }
    return results, claims.paper_comparison("spa", args.witness, results)


def cmd_xpa(args):
    w = resolve_witness(args.witness)
    res = xpa(w, resolve_observable(args.reference), args.mode)
    return {"weight": res.weight, **res.to_dict()}, []


def _pair_results(pair, cfg) -> dict:
    out = pair.to_dict()
    out["L"] = pair.window.L if pair.window else None
    out["U"] = pair.window.U if pair.window else None
    out["mirror_identity_residual"] = mirror_identity_residual(pair)
    bounds = _optional(lambda: prop2_bounds(pair, cfg))
    out["prop2"] = bounds.to_dict() if bounds else None
    return out


def cmd_compress(args):
    cfg = _config(args)
    pair = compress(resolve_witness(args.witness), _reference(args), cfg, shift=not args.no_shift)
    results = _pair_results(pair, cfg)
    return results, claims.paper_comparison("compress", args.witness, results)


def cmd_mirror_check(args):
    cfg = _config(args)
    pair = mirror_pair(resolve_witness(args.plus), resolve_witness(args.minus), _reference(args))
    pair.window = separability_window(pair.compressed, cfg)
    return _pair_results(pair, cfg), []


def cmd_prop2(args):
    cfg = _config(args)
    if args.minus:
        pair = mirror_pair(resolve_witness(args.witness), resolve_witness(args.minus))
        pair.window = separability_window(pair.compressed, cfg)
    else:
        pair = compress(resolve_witness(args.witness), cfg=cfg)
    results = {**prop2_bounds(pair, cfg).to_dict(), "L": pair.window.L, "U": pair.window.U}
    return results, claims.paper_comparison("prop2", args.witness, results)


def cmd_detect(args):
    a = resolve_observable(args.observable)
    s = resolve_state(args.state)
    window = separability_window(a, _config(args))
    verdict = detect(window, a, s)
    return {"verdict": verdict.kind, **verdict.to_dict(), "window": window.to_dict()}, []


def cmd_gme(args):
    cfg = _config(args)
    s = resolve_state(args.state)
    verdict = gme.gme_verdict(s, cfg)
    results = {"verdict": verdict.level, **verdict.to_dict()}
    comparison = []
    names = [args.criterion] if args.criterion else list(gme.VERDICT_CRITERIA)
    if args.criterion:
        results["criterion_value"] = gme.criterion(args.criterion)(s)
    if args.windows:
        cls = {"fully": "fully_separable", "bisep": "biseparable", "all": "all_states"}[args.windows]
        windows = {}
        for name in names:
            win = gme.criterion_window(name, cls, cfg)
            windows[name] = win.to_dict()
            key = gme.criterion(name).name
            paper = gme.PAPER_WINDOWS.get((key, cls))
            windows[name]["paper_window"] = list(paper) if paper else None
            if cls == "fully_separable":
                comparison += claims.paper_comparison("gme", key, {"lo": win.lo, "hi": win.hi})
        results["windows"] = windows
    return results, comparison


def cmd_simplex_scan(args):
    a = resolve_observable(args.observable)
    window = separability_window(a, _config(args))
    res = simplex_scan(a, window, args.step)
    if args.csv:
        res.write_csv(args.csv)
    results = res.summary()
    results["near_bound_slack"] = BOUND_SLACK
    vertices = {}
    for name, c in claims.BELL_VERTICES.items():
        kind, value = classify_point(c, a, window)
        vertices[name] = {"c": list(c), "class": kind, "trace_value": value}
    results["bell_vertices"] = vertices
    comparison = [
        claims.Claim("C15.undetected", "fraction of entangled points flagged by neither bound",
                     0.0, res.undetected_fraction, 0.01).to_dict()
    ]
    return results, comparison


def cmd_decompose_local(args):
    a = resolve_observable(args.observable)
    c = local_decompose(a)
    terms = [
        {"index": list(map(int, idx)), "coefficient": float(c[idx])}
        for idx in zip(*np.nonzero(np.abs(c) > args.threshold))
    ]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"i{p + 1}" for p in range(a.profile.parties)] + ["coefficient"])
            for t in terms:
                writer.writerow(t["index"] + [repr(t["coefficient"])])
    results = {
        "dims": list(a.dims),
        "basis_sizes": [int(local_basis(d).shape[0]) for d in a.dims],
        "terms": terms,
        "operator": to_dict(a),
    }
    return results, []


def cmd_verify(args):
    numbers = args.criterion or sorted(claims.CRITERIA)
    report, failed = [], False
    for n in numbers:
        if n not in claims.CRITERIA:
            raise InputError(f"unknown criterion {n}")
        title, _ = claims.CRITERIA[n]
        records = claims.run_criterion(n)
        ok = claims.criterion_passes(records)
        failed |= not ok
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}", file=sys.stderr)
        report.append({"criterion": n, "title": title, "pass": ok, "claims": [c.to_dict() for c in records]})
    comparison = [c for entry in report for c in entry["claims"]]
    return {"criteria": report, "all_hard_claims_agree": not failed}, comparison


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--json", metavar="PATH", help="also write the report to PATH")
    p.add_argument("--csv", metavar="PATH", help="write the command's table to PATH")
    p.add_argument("--timestamps", action="store_true", help="add wall time (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="witness-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.set_defaults(handler=handler)
        return p

    p = add("window", cmd_window, "separability window of an observable")
    p.add_argument("--observable", required=True)
    p.add_argument("--mode", choices=("both", "min", "max"), default="both")
    p.add_argument("--oracle", action="store_true", help="also run the exhaustive grid oracle")
    p.add_argument("--resolution", type=int, default=24)

    p = add("spa", cmd_spa, "p-SPA and n-SPA of a witness")
    p.add_argument("--witness", required=True)
    p.add_argument("--reference")

    p = add("xpa", cmd_xpa, "structural approximation with a general reference")
    p.add_argument("--witness", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--mode", choices=("positive", "negative"), default="positive")

    p = add("compress", cmd_compress, "compress a witness and build its mirror")
    p.add_argument("--witness", required=True)
    p.add_argument("--reference")
    p.add_argument("--no-shift", action="store_true", help="do not shift onto the border")

    p = add("mirror-check", cmd_mirror_check, "check a given mirrored pair")
    p.add_argument("--plus", required=True)
    p.add_argument("--minus", required=True)
    p.add_argument("--reference")

    p = add("prop2", cmd_prop2, "upper bounds of a mirrored pair")
    p.add_argument("--witness", required=True)
    p.add_argument("--minus")

    p = add("detect", cmd_detect, "test a state against an observable's window")
    p.add_argument("--observable", required=True)
    p.add_argument("--state", required=True)

    p = add("gme", cmd_gme, "three-qubit GME criteria")
    p.add_argument("--state", required=True)
    p.add_argument("--criterion", choices=sorted(gme.CRITERIA) + ["qdicke"])
    p.add_argument("--windows", choices=("fully", "bisep", "all"))

    p = add("simplex-scan", cmd_simplex_scan, "classify the Bell-diagonal simplex")
    p.add_argument("--observable", default="ew2:ctilde")
    p.add_argument("--step", type=float, default=0.05)

    p = add("decompose-local", cmd_decompose_local, "local operator basis coefficients")
    p.add_argument("--observable", required=True)
    p.add_argument("--threshold", type=float, default=1e-12)

    p = add("verify", cmd_verify, "run the acceptance registry")
    p.add_argument("--all", action="store_true", help="run every criterion (default)")
    p.add_argument("--criterion", type=int, action="append")
    return parser


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        results, comparison = args.handler(args)
    except NotAWitnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report = {
        "command": args.command,
        "inputs": _inputs(args),
        "results": results,
        "paper_comparison": comparison,
    }
    if args.timestamps:
        report["elapsed_seconds"] = time.perf_counter() - start
    text = json.dumps(report, indent=2, default=_json_default)
    print(text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    if args.command == "verify" and not results["all_hard_claims_agree"]:
        return EXIT_DISAGREE
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
