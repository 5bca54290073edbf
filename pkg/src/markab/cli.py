"""Command-line entry point: ``markab metric | refine | control | bench``.

Each subcommand prints a human-readable report to stdout (``--json`` swaps
in the machine-readable form) and maps failures to stable exit codes so
shell pipelines can branch on *what* went wrong:

    0   success
    2   parse error (also argparse usage errors)
    3   validation error
    4   size-guard violation
    5   covering violation
    10  refinement stopped on budget, not on the deterministic rule
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .chain import Alphabet, LabeledMarkovChain
from .control import ControlledSystem, benchmark_controlled_system, control_pipeline
from .dynsys import PiecewiseAffineSystem, benchmark_system
from .errors import CoveringError, GuardError, ParseError, ValidationError
from .fileio import load_chain, load_system, serialize_chain
from .kantorovich import chain_metric, kant_metric
from .refine import RefinementConfig, refine
from .transport import enumerate_distribution, exact_kantorovich

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_GUARD = 4
EXIT_COVERING = 5
EXIT_BUDGET = 10

BENCHMARK_NAME = "benchmark"


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load_base_system(source: str) -> PiecewiseAffineSystem:
    if source == BENCHMARK_NAME:
        return benchmark_system()[0]
    return load_system(source)


def _refine_config(args: argparse.Namespace) -> RefinementConfig:
    try:
        return RefinementConfig(
            epsilon=args.epsilon,
            max_iterations=args.max_iter,
            mode=args.mode,
            samples=args.samples,
            seed=args.seed,
        )
    except ValueError as err:
        raise ValidationError(str(err)) from err


# --------------------------------------------------------------------------
# metric


def cmd_metric(args: argparse.Namespace) -> int:
    c1 = load_chain(args.file1)
    c2 = load_chain(args.file2)
    if args.horizon is not None:
        result = kant_metric(c1, c2, args.horizon)
    else:
        result = chain_metric(c1, c2, args.epsilon)
    payload: dict = {
        "value": result.value,
        "horizon": result.horizon,
        "upper_bound": result.upper_bound,
        "nodes_expanded": result.nodes_expanded,
        "oracle": None,
    }
    lines = [
        f"value: {result.value!r}",
        f"bracket: [{result.value!r}, {result.upper_bound!r}]  (horizon {result.horizon})",
        f"nodes expanded: {result.nodes_expanded}",
    ]
    if args.oracle:
        p = enumerate_distribution(c1, result.horizon)
        q = enumerate_distribution(c2, result.horizon)
        exact, _ = exact_kantorovich(p, q)
        gap = abs(result.value - exact)
        payload["oracle"] = {"value": exact, "gap": gap}
        lines.append(f"oracle: value {exact!r}, gap {gap!r}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


# --------------------------------------------------------------------------
# refine


def cmd_refine(args: argparse.Namespace) -> int:
    sys_ = _load_base_system(args.system)
    abstraction, trace = refine(sys_, _refine_config(args))
    ids = [sys_.alphabet.format_word(w) for w in abstraction.words]
    chain_doc = serialize_chain(abstraction.chain, state_ids=ids)
    if args.out is not None:
        with open(args.out, "w") as handle:
            handle.write(chain_doc)
    payload = {"trace": trace.to_dict(), "chain": json.loads(chain_doc)}
    text = trace.table()
    if args.out is None and not args.json:
        text += "\n" + chain_doc.rstrip("\n")
    _emit(args, payload, text)
    return EXIT_OK if trace.stop_reason == "deterministic" else EXIT_BUDGET


# --------------------------------------------------------------------------
# control


def cmd_control(args: argparse.Namespace) -> int:
    if args.system == BENCHMARK_NAME and args.actions is None:
        csys = benchmark_controlled_system()
    else:
        base = _load_base_system(args.system)
        if args.actions is None:
            raise ValidationError("--actions is required for systems loaded from a file")
        csys = ControlledSystem(base, tuple(args.actions), axis=args.axis)
    report, trace = control_pipeline(
        csys,
        refine_config=_refine_config(args),
        gamma=args.gamma,
        trajectories=args.trajectories,
        length=args.length,
        seed=args.seed,
    )
    payload = {"report": report.to_dict(), "refinement": trace.to_dict()}
    _emit(args, payload, report.table())
    return EXIT_OK


# --------------------------------------------------------------------------
# bench


def _random_chain(rng: np.random.Generator, n_states: int, alphabet: Alphabet) -> LabeledMarkovChain:
    n_symbols = len(alphabet.symbols)
    base = np.arange(n_states, dtype=np.intp) % n_symbols
    return LabeledMarkovChain(
        alphabet=alphabet,
        transition=rng.dirichlet(np.ones(n_states), size=n_states),
        initial=rng.dirichlet(np.ones(n_states)),
        labels=rng.permutation(base),
    )


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for item in text.split(","):
        states, sep, symbols = item.partition("x")
        if not sep or not states.isdigit() or not symbols.isdigit():
            raise ValueError(f"sizes must look like '4x2', got {item!r}")
        if int(states) < 1 or int(symbols) < 1:
            raise ValueError(f"sizes must be positive, got {item!r}")
        sizes.append((int(states), int(symbols)))
    return sizes


def cmd_bench(args: argparse.Namespace) -> int:
    if args.max_horizon < 1:
        raise ValidationError("--max-horizon must be at least 1")
    groups = []
    for n_states, n_symbols in args.sizes:
        alphabet = Alphabet(tuple(str(i) for i in range(n_symbols)))
        rng = np.random.default_rng(args.seed)
        c1 = _random_chain(rng, n_states, alphabet)
        c2 = _random_chain(rng, n_states, alphabet)
        rows = []
        for n in range(1, args.max_horizon + 1):
            start = time.perf_counter()
            result = kant_metric(c1, c2, n)
            seconds = time.perf_counter() - start
            row: dict = {
                "n": n,
                "nodes": result.nodes_expanded,
                "seconds": seconds,
                "value": result.value,
            }
            try:
                start = time.perf_counter()
                p = enumerate_distribution(c1, n)
                q = enumerate_distribution(c2, n)
                exact, _ = exact_kantorovich(p, q)
                row["oracle_value"] = exact
                row["oracle_seconds"] = time.perf_counter() - start
            except GuardError:
                row["skipped"] = True
            rows.append(row)
        ns = np.array([row["n"] for row in rows], dtype=float)
        slope = float(np.polyfit(ns, np.log([row["nodes"] for row in rows]), 1)[0])
        groups.append(
            {
                "states": n_states,
                "symbols": n_symbols,
                "rows": rows,
                "slope": slope,
                "slope_bound": float(np.log(n_symbols)) + 0.05,
            }
        )

    lines = []
    for group in groups:
        lines.append(f"|S|={group['states']} |A|={group['symbols']}  (seed {args.seed})")
        lines.append(f"{'n':>3}  {'nodes':>10}  {'seconds':>10}  {'value':>10}  oracle")
        for row in group["rows"]:
            if row.get("skipped"):
                oracle = "skipped (guard)"
            else:
                oracle = f"{row['oracle_value']:.6f} in {row['oracle_seconds']:.4f}s"
            lines.append(
                f"{row['n']:>3}  {row['nodes']:>10}  {row['seconds']:>10.4f}  "
                f"{row['value']:>10.6f}  {oracle}"
            )
        ok = "yes" if group["slope"] <= group["slope_bound"] else "no"
        lines.append(
            f"log-nodes slope {group['slope']:.4f} <= log|A| + 0.05 = "
            f"{group['slope_bound']:.4f}: {ok}"
        )
    _emit(args, {"seed": args.seed, "groups": groups}, "\n".join(lines))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markab",
        description="Behavior metrics, abstraction refinement, and control "
        "for labeled Markov chains and piecewise-affine systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    metric = sub.add_parser("metric", help="distance between two chain files")
    metric.add_argument("file1")
    metric.add_argument("file2")
    accuracy = metric.add_mutually_exclusive_group()
    accuracy.add_argument("--epsilon", type=float, default=1e-3,
                          help="accuracy target; picks the horizon (default 1e-3)")
    accuracy.add_argument("--horizon", type=int, help="explicit horizon instead of --epsilon")
    metric.add_argument("--oracle", action="store_true",
                        help="cross-check against the exact transport solver")
    metric.add_argument("--json", action="store_true")
    metric.set_defaults(func=cmd_metric)

    def add_refine_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--epsilon", type=float, default=1e-3)
        p.add_argument("--max-iter", type=int, default=None, dest="max_iter")
        p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1_000_000)

    ref = sub.add_parser("refine", help="refine a system to a deterministic abstraction")
    ref.add_argument("system", help=f"system file path, or '{BENCHMARK_NAME}' for the built-in")
    add_refine_options(ref)
    ref.add_argument("--out", help="write the final abstraction chain to this path")
    ref.add_argument("--json", action="store_true")
    ref.set_defaults(func=cmd_refine)

    ctl = sub.add_parser("control", help="refine, solve, and evaluate policies per stage")
    ctl.add_argument("system", nargs="?", default=BENCHMARK_NAME,
                     help=f"system file path, or '{BENCHMARK_NAME}' (default)")
    ctl.add_argument("--gamma", type=float, default=0.95)
    ctl.add_argument("--trajectories", type=int, default=5000)
    ctl.add_argument("--length", type=int, default=1000)
    add_refine_options(ctl)
    ctl.add_argument("--actions", type=lambda s: [float(v) for v in s.split(",")],
                     default=None, help="comma-separated action magnitudes (file systems)")
    ctl.add_argument("--axis", type=int, default=1,
                     help="coordinate the actions shift (file systems, default 1)")
    ctl.add_argument("--json", action="store_true")
    ctl.set_defaults(func=cmd_control)

    bench = sub.add_parser("bench", help="recursion vs oracle scaling on random chains")
    bench.add_argument("--max-horizon", type=int, default=12, dest="max_horizon")
    bench.add_argument("--sizes", type=_parse_sizes, default=[(4, 2)],
                       help="comma-separated |S|x|A| pairs, e.g. '4x2,4x3'")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--json", action="store_true")
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except GuardError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_GUARD
    except CoveringError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_COVERING


if __name__ == "__main__":
    sys.exit(main())
