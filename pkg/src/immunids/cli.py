"""Command-line interface: run the pipeline, generate labeled traffic,
and score a run against ground truth.

Exit codes: 0 success, 2 malformed input, 3 config value out of range.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .correlation import load_attack_graph
from .errors import ConfigError, ImmunidsError, LoadError, MalformedGraphError
from .formats import write_packets, write_truth
from .seeds import MAX_SEED
from .signatures import load_signatures
from .traffic import gen_stream, load_profile

DEFAULT_SEED = 42


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="immunids",
        description="Immune-inspired intrusion detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="process a packet file")
    p_run.add_argument("--graph", required=True)
    p_run.add_argument("--signatures", required=True)
    p_run.add_argument("--packets", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--config", default=None)
    p_run.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p_gen = sub.add_parser("gen", help="generate a labeled packet stream")
    p_gen.add_argument("--graph", required=True)
    p_gen.add_argument("--signatures", required=True)
    p_gen.add_argument("--profile", required=True)
    p_gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_gen.add_argument("--out-packets", required=True)
    p_gen.add_argument("--out-truth", required=True)

    p_rep = sub.add_parser("report", help="score an alert log against truth")
    p_rep.add_argument("--alerts", required=True)
    p_rep.add_argument("--truth", required=True)
    p_rep.add_argument("--graph", default=None,
                       help="graph export (default: <alerts>.graph.jsonl)")
    return parser


def _cmd_run(args) -> int:
    if not 0 <= args.seed <= MAX_SEED:
        raise ConfigError(f"seed {args.seed} outside 64-bit range")
    params = pipeline.load_config(args.config)
    pipeline.run(args.graph, args.signatures, args.packets, args.out,
                 params=params, seed=args.seed)
    return 0


def _cmd_gen(args) -> int:
    if not 0 <= args.seed <= MAX_SEED:
        raise ConfigError(f"seed {args.seed} outside 64-bit range")
    attacks = load_attack_graph(args.graph)
    sigs = load_signatures(args.signatures, attacks)
    profile = load_profile(args.profile)
    packets, truth = gen_stream(attacks, sigs, profile, args.seed)
    write_packets(args.out_packets, packets)
    write_truth(args.out_truth, truth)
    return 0


def _cmd_report(args) -> int:
    graph = Path(args.graph) if args.graph else None
    metrics = pipeline.report(args.alerts, args.truth, graph_path=graph)
    print(json.dumps(metrics.as_dict()))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "gen": _cmd_gen, "report": _cmd_report}
    try:
        return handler[args.command](args)
    except ConfigError as exc:
        print(f"immunids: config error: {exc}", file=sys.stderr)
        return 3
    except (LoadError, MalformedGraphError) as exc:
        print(f"immunids: {exc}", file=sys.stderr)
        return 2
    except ImmunidsError as exc:
        print(f"immunids: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
