"""Command-line interface: trace generation, experiment runs, checkpoint inspection."""

from __future__ import annotations

import argparse
import sys

from . import harness, trace_gen
from .nn import Mlp


def _load_config(path) -> dict[str, str]:
    """key=value text, one pair per line; '#' starts a comment."""
    overrides = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {raw.rstrip()!r} is not key=value")
            key, value = line.split("=", 1)
            overrides[key.strip().replace("-", "_")] = value.strip()
    return overrides


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    for key, value in _load_config(args.config).items():
        if not hasattr(args, key):
            raise ValueError(f"config key {key!r} does not match any flag")
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, value.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, key, int(value))
        elif isinstance(current, float):
            setattr(args, key, float(value))
        elif isinstance(current, list):
            setattr(args, key, [type(current[0])(v) for v in value.split(",")])
        else:
            setattr(args, key, value)


def _cmd_gen_trace(args) -> int:
    if args.dynamic:
        trace = trace_gen.generate_dynamic_trace(
            args.num_contents,
            args.requests,
            args.seed,
            args.change_interval or args.requests // 5,
            (args.exponent_lo, args.exponent_hi),
        )
    else:
        model = trace_gen.PopularityModel.identity(args.num_contents, args.zipf)
        trace = trace_gen.generate_static_trace(model, args.requests, args.seed)
    trace_gen.write_trace(trace, args.out)
    print(f"wrote {trace.length} requests over {trace.num_contents} contents to {args.out}")
    return 0


def _cmd_run(args) -> int:
    seeds = args.seeds if args.seeds else [args.seed]
    spec = harness.ExperimentSpec(
        kind=args.experiment,
        num_contents=args.num_contents,
        requests=args.requests,
        zipf_exponent=args.zipf,
        capacities=args.capacity,
        policies=args.policy,
        seeds=seeds,
        window=args.window,
        k_fraction=args.k_frac,
        full_scale=args.full_scale,
    )
    rows = harness.run_experiment(spec)
    harness.emit_results(rows, args.out)
    for entry in harness.aggregate_rows(rows):
        print(
            f"{entry['policy']:>14s} C={entry['capacity']:<5d} "
            f"CHR={entry['mean_chr']:.4f} +/- {entry['std_chr']:.4f} ({entry['runs']} runs)"
        )
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_inspect_checkpoint(args) -> int:
    net = Mlp.load(args.path)
    params = sum(w.size for w in net.weights) + sum(b.size for b in net.biases)
    print(f"layers: {' -> '.join(map(str, net.layer_sizes))}")
    print(f"output activation: {net.output_activation}")
    print(f"parameters: {params}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cachegym", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-trace", help="generate and save a request trace")
    gen.add_argument("--num-contents", type=int, default=harness.DESK_NUM_CONTENTS)
    gen.add_argument("--zipf", type=float, default=1.3)
    gen.add_argument("--requests", type=int, default=harness.DESK_REQUESTS)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--dynamic", action="store_true")
    gen.add_argument("--change-interval", type=int, default=None)
    gen.add_argument("--exponent-lo", type=float, default=0.8)
    gen.add_argument("--exponent-hi", type=float, default=1.5)
    gen.add_argument("--config", default=None, help="key=value file overriding flags")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen_trace)

    run = sub.add_parser("run", help="run an experiment and emit results CSV")
    run.add_argument("--experiment", choices=harness.EXPERIMENT_KINDS, default="capacity-sweep")
    run.add_argument("--capacity", type=int, nargs="+", default=[25])
    run.add_argument("--num-contents", type=int, default=harness.DESK_NUM_CONTENTS)
    run.add_argument("--zipf", type=float, default=1.3)
    run.add_argument("--requests", type=int, default=harness.DESK_REQUESTS)
    run.add_argument("--policy", nargs="+", default=["lru", "lfu", "fifo", "wolpertinger"])
    run.add_argument("--k-frac", type=float, default=0.15)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--seeds", type=int, nargs="*", default=None)
    run.add_argument("--window", type=int, default=1000)
    run.add_argument("--full-scale", action="store_true", help="full-scale N=5000, T=10000")
    run.add_argument("--config", default=None, help="key=value file overriding flags")
    run.add_argument("--out", required=True)
    run.set_defaults(func=_cmd_run)

    inspect = sub.add_parser("inspect-checkpoint", help="describe a saved network")
    inspect.add_argument("path")
    inspect.set_defaults(func=_cmd_inspect_checkpoint)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_config(args)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
