"""Command-line entry point: generate, simulate, oracle, bounds, export-lp, sweep.

Exit codes: 0 success, 1 usage error, 2 invariant violation, 3 size limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds
from .core import MAX_ORACLE_N, ArrivalInstance, InstanceError, cost_alpha, is_priority_feasible, verify_trace
from .families import random_instance
from .lp import export_lp
from .oracle import InstanceTooLarge, approx_5alpha, solve_optimal
from .strategies import RAISED, StrategyConfig, dual_values, reports_to_csv, simulate

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_SIZE = 0, 1, 2, 3

GENERATORS = ("random", "nn-lb-1d", "nn-lb-2d", "universal-1d", "recursive-squares")

SWEEP_COLUMNS = (
    "instance",
    "n",
    "strategy",
    "alpha",
    "cost",
    "oracle_cost",
    "ratio",
    "status",
    "wall_time_s_nondeterministic",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def generate_instance(name: str, params: dict) -> ArrivalInstance:
    """Build an instance from a generator name and keyword parameters."""
    p = {k.replace("-", "_"): v for k, v in params.items() if v is not None}
    try:
        if name == "random":
            rng = np.random.default_rng(int(p.get("seed", 0)))
            return random_instance(
                rng,
                p.get("space", "plane"),
                int(p.get("n", 10)),
                low=p.get("low"),
                high=p.get("high"),
            )
        if name == "nn-lb-1d":
            return bounds.gen_1d_nn_lb(float(p.get("delta", 0.01)), float(p.get("x", 1.0)))
        if name == "nn-lb-2d":
            return bounds.gen_2d_nn_lb(float(p.get("epsilon", 1e-3)))
        if name == "universal-1d":
            return bounds.gen_1d_universal(float(p.get("alpha", 2.0)), float(p.get("x", 1.0)), p.get("branch", "F1"))
        if name == "recursive-squares":
            return bounds.gen_recursive_squares(int(p.get("rounds", 3)))
    except (ValueError, InstanceError) as exc:
        raise UsageError(f"invalid parameters for {name}: {exc}") from None
    raise UsageError(f"unknown generator {name!r}; expected one of {GENERATORS}")


def _load(path) -> ArrivalInstance:
    try:
        return ArrivalInstance.load(path)
    except FileNotFoundError:
        raise UsageError(f"no such instance file: {path}") from None
    except (ValueError, InstanceError) as exc:
        raise UsageError(f"bad instance file {path}: {exc}") from None


def _config(args) -> StrategyConfig:
    try:
        return StrategyConfig(args.strategy, alpha=args.alpha, k=args.k, gamma=args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# subcommands ----------------------------------------------------------------------


def cmd_generate(args) -> int:
    params = {
        "seed": args.seed,
        "space": args.space,
        "n": args.n,
        "low": args.low,
        "high": args.high,
        "delta": args.delta,
        "x": args.x,
        "epsilon": args.epsilon,
        "alpha": args.alpha,
        "branch": args.branch,
        "rounds": args.rounds,
    }
    inst = generate_instance(args.generator, params)
    _emit(inst.dumps(), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = _load(args.instance)
    config = _config(args)
    trace, reports = simulate(inst, config)
    problems = verify_trace(inst, trace)
    summary = {
        "strategy": config.label,
        "alpha": config.alpha,
        "n": inst.n,
        "raises": sum(1 for r in reports if r.action == RAISED),
        "total_cost": trace.total_cost,
    }
    if config.kind == "dual":
        summary["sum_y"] = float(sum(dual_values(reports)))
    summary["invariants"] = "ok" if not problems else "; ".join(problems)
    lines = "".join(f"# {k}: {v}\n" for k, v in summary.items())
    if args.out:
        Path(args.out).write_text(reports_to_csv(reports))
        sys.stdout.write(lines)
    else:
        sys.stdout.write(reports_to_csv(reports) + lines)
    return EXIT_INVARIANT if problems else EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    alpha = args.alpha
    if args.approx:
        ranges, cert = approx_5alpha(inst, alpha)
        cost = cost_alpha(ranges, alpha)
        feasible = is_priority_feasible(inst, ranges)
        bound = cert.bound(alpha)
        ok = feasible and cost <= bound * (1 + 1e-9)
        report = {
            "mode": "approx",
            "alpha": alpha,
            "cost": cost,
            "sum_y": cert.sum_y,
            "cost_over_sum_y": cost / cert.sum_y if cert.sum_y > 0 else 0.0,
            "bound_5_alpha": 5.0**alpha,
            "feasible": feasible,
            "certificate": "ok" if ok else "FAILED",
            "ranges": list(ranges),
        }
        print(json.dumps(report, indent=2))
        return EXIT_OK if ok else EXIT_INVARIANT
    try:
        res = solve_optimal(inst, alpha)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    report = {
        "mode": "exact",
        "alpha": alpha,
        "cost": res.cost,
        "ranges": list(res.assignment),
        "states_expanded": res.states_expanded,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        if args.alpha_star:
            a, v = bounds.alpha_star(args.tol)
            report = {"alpha_star": a, "f_star": v}
        elif args.fstar:
            report = {"alpha": args.alpha, "f_star": bounds.f_star_upper(args.alpha)}
        else:
            report = bounds.universal_constants(args.alpha, args.tol).as_dict()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_export_lp(args) -> int:
    inst = _load(args.instance)
    _emit(export_lp(inst, args.alpha, args.form), args.out)
    return EXIT_OK


def _expand_params(params: dict):
    keys = list(params)
    values = [v if isinstance(v, list) else [v] for v in params.values()]
    for combo in itertools.product(*values):
        yield dict(zip(keys, combo))


def sweep_instances(spec: dict, base: Path):
    """Yield ``(label, instance)`` in spec order."""
    sources = spec.get("instances", [])
    if isinstance(sources, dict):
        sources = [sources]
    for src in sources:
        if "file" in src:
            path = base / src["file"]
            yield str(src["file"]), _load(path)
        elif "generator" in src:
            for params in _expand_params(src.get("params", {})):
                label = src["generator"] + "".join(f" {k}={v}" for k, v in params.items())
                yield label, generate_instance(src["generator"], params)
        elif "random" in src:
            r = dict(src["random"])
            rng = np.random.default_rng(int(r.get("seed", 0)))
            space = r.get("space", "plane")
            for c in range(int(r.get("count", 1))):
                inst = random_instance(rng, space, int(r.get("n", 10)), low=r.get("low"), high=r.get("high"))
                yield f"random-{space} seed={r.get('seed', 0)} #{c}", inst
        else:
            raise UsageError(f"instance source needs 'file', 'generator' or 'random': {src}")


def run_sweep(spec: dict, base: Path = Path(".")) -> str:
    strategies = spec.get("strategies") or []
    if not strategies:
        raise UsageError("sweep needs at least one strategy")
    alphas = spec.get("alphas") or [2.0]
    use_oracle = bool(spec.get("oracle", True))
    configs = []
    for s in strategies:
        s = {"kind": s} if isinstance(s, str) else dict(s)
        try:
            configs.append(StrategyConfig(s.pop("kind"), **s))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad strategy entry: {exc}") from None

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for label, inst in sweep_instances(spec, base):
        for alpha in alphas:
            oracle_cost, oracle_err = None, None
            if use_oracle:
                try:
                    oracle_cost = solve_optimal(inst, alpha).cost
                except (InstanceTooLarge, ValueError) as exc:
                    oracle_err = str(exc)
            for cfg in configs:
                t0 = time.perf_counter()
                status, cost, ratio = "ok", "", ""
                try:
                    trace, _ = simulate(inst, cfg.with_alpha(alpha))
                    cost = trace.total_cost
                    if oracle_err:
                        status = f"error: {oracle_err}"
                    elif oracle_cost:
                        ratio = cost / oracle_cost
                except Exception as exc:  # a failed cell must not stop the sweep
                    status = f"error: {exc}"
                elapsed = time.perf_counter() - t0
                w.writerow(
                    [
                        label,
                        inst.n,
                        cfg.label,
                        repr(float(alpha)),
                        "" if cost == "" else repr(cost),
                        "" if oracle_cost is None else repr(oracle_cost),
                        "" if ratio == "" else repr(ratio),
                        status,
                        f"{elapsed:.6f}",
                    ]
                )
    return buf.getvalue()


def cmd_sweep(args) -> int:
    path = Path(args.spec)
    try:
        spec = json.loads(path.read_text())
    except FileNotFoundError:
        raise UsageError(f"no such spec file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"spec is not valid JSON: {exc}") from None
    text = run_sweep(spec, path.parent)
    _emit(text, args.out or spec.get("out"))
    return EXIT_OK


# parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rangeassign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("generator", choices=GENERATORS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--space", choices=("line", "plane", "metric"), default="plane")
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--low", type=float)
    g.add_argument("--high", type=float)
    g.add_argument("--delta", type=float, default=0.01)
    g.add_argument("--x", type=float, default=1.0)
    g.add_argument("--epsilon", type=float, default=1e-3)
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--branch", choices=("F1", "F2"), default="F1")
    g.add_argument("--rounds", type=int, default=3)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="run an online strategy, print the step trace as CSV")
    s.add_argument("instance")
    s.add_argument("--strategy", default="nn", choices=("nn", "ci", "knn", "2nn", "dual"))
    s.add_argument("--alpha", type=float, default=2.0)
    s.add_argument("--k", type=float, default=2.0, help="expansion factor for knn")
    s.add_argument("--gamma", type=float, default=4.0, help="range multiplier for dual")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help=f"exact offline optimum (n <= {MAX_ORACLE_N}) or 5^alpha approximation")
    o.add_argument("instance")
    o.add_argument("--alpha", type=float, default=2.0)
    o.add_argument("--approx", action="store_true")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bounds", help="closed-form constants")
    b.add_argument("--alpha", type=float, default=2.0)
    b.add_argument("--fstar", action="store_true")
    b.add_argument("--alpha-star", action="store_true")
    b.add_argument("--tol", type=float, default=1e-10)
    b.set_defaults(func=cmd_bounds)

    e = sub.add_parser("export-lp", help="write the covering LP or its dual in LP text format")
    e.add_argument("instance")
    e.add_argument("--alpha", type=float, default=2.0)
    e.add_argument("--form", choices=("primal", "dual"), default="primal")
    e.add_argument("--out")
    e.set_defaults(func=cmd_export_lp)

    w = sub.add_parser("sweep", help="strategies x alphas x instances, as CSV")
    w.add_argument("spec")
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
