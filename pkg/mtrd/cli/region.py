"""
Region subcommands: `region`, `mixed-region`, `wz`, `dr` and `sw-check`.
"""
import argparse
import json
import sys
from typing import Dict, List, Sequence

from mtrd.cli.deps import RunContext, add_model_options, add_run_options, load_inputs, parse_floats
from mtrd.core.exceptions import InputError
from mtrd.core.logging import get_logger
from mtrd.models.source import SourceKind
from mtrd.services.artifacts import frontier_to_dump, load_measures, load_model
from mtrd.services.region import (
    DistortionFrontier,
    RegionFrontier,
    all_subsets,
    distortion_rate,
    mixed_model_region,
    search_region,
    slepian_wolf_bounds,
    subset_label,
    wyner_ziv,
)

logger = get_logger(__name__)


def _search_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--aux-size", type=int, default=None, help="auxiliary alphabet size per terminal")
    parser.add_argument("--budget", type=int, default=None, help="random restarts (default from MTRD_SEARCH_RESTARTS)")


def register(subparsers: argparse._SubParsersAction) -> None:
    region = subparsers.add_parser("region", help="inner approximation of a memoryless model's region")
    add_model_options(region)
    _search_options(region)
    add_run_options(region)
    region.set_defaults(handler=run_region)

    mixed = subparsers.add_parser("mixed-region", help="region of a two-component mixed model")
    add_model_options(mixed)
    _search_options(mixed)
    add_run_options(mixed)
    mixed.set_defaults(handler=run_mixed_region)

    wz = subparsers.add_parser("wz", help="Wyner-Ziv rate with decoder side information")
    add_model_options(wz)
    _search_options(wz)
    add_run_options(wz)
    wz.set_defaults(handler=run_wz)

    dr = subparsers.add_parser("dr", help="smallest distortions reachable at fixed rates")
    add_model_options(dr, distortion=False)
    dr.add_argument("--distortion", default="hamming", help="'hamming' or a distortion JSON file")
    dr.add_argument("--rates", type=parse_floats, required=True, help="rates in nats, one per terminal")
    _search_options(dr)
    add_run_options(dr)
    dr.set_defaults(handler=run_dr)

    sw = subparsers.add_parser("sw-check", help="Slepian-Wolf subset bounds (conditional entropies)")
    sw.add_argument("--model", required=True, help="source model JSON")
    add_run_options(sw)
    sw.set_defaults(handler=run_sw_check)


def _aux_sizes(args: argparse.Namespace, terminals: int):
    if args.aux_size is None:
        return None
    if args.aux_size < 1:
        raise InputError(f"--aux-size must be positive, got {args.aux_size}")
    return (args.aux_size,) * terminals


def frontier_rows(frontier: RegionFrontier) -> tuple[List[str], List[Dict[str, object]]]:
    """Column names and rows for the frontier CSV."""
    M = frontier.terminals
    subsets = all_subsets(M)
    K = len(frontier.targets)
    fieldnames = (
        [f"R_{m + 1}_nats" for m in range(M)]
        + [f"bound_{subset_label(a)}_nats" for a in subsets]
        + [f"D_{k + 1}" for k in range(K)]
    )
    rows = []
    for point in frontier.points:
        row: Dict[str, object] = {f"R_{m + 1}_nats": float(r) for m, r in enumerate(point.rates)}
        row.update({f"bound_{subset_label(a)}_nats": float(point.bounds[a]) for a in subsets})
        row.update({f"D_{k + 1}": float(d) for k, d in enumerate(point.distortions)})
        rows.append(row)
    return fieldnames, rows


def _write_frontier(context: RunContext, frontier: RegionFrontier, command: str) -> None:
    fieldnames, rows = frontier_rows(frontier)
    context.write_csv("frontier.csv", fieldnames, rows)
    context.write_json("frontier.json", frontier_to_dump(frontier, command))


def run_region(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model, measures, D = load_inputs(args)
    if model.kind != SourceKind.IID:
        raise InputError(f"'region' needs a memoryless model, got {model.kind.value}; use 'mixed-region'")
    context = RunContext.from_args("region", args, argv)
    frontier = search_region(
        model, measures, D, _aux_sizes(args, model.terminals), args.budget, args.seed, None, args.threads
    )
    _write_frontier(context, frontier, "region")
    context.finish()
    return 0


def run_mixed_region(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model, measures, D = load_inputs(args)
    if model.kind != SourceKind.MIXED:
        raise InputError(f"'mixed-region' needs a mixed model, got {model.kind.value}")
    context = RunContext.from_args("mixed-region", args, argv)
    frontier = mixed_model_region(
        model, measures, D, _aux_sizes(args, model.terminals), args.budget, args.seed, None, args.threads
    )
    _write_frontier(context, frontier, "mixed-region")
    context.finish()
    return 0


def run_wz(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model, measures, D = load_inputs(args)
    context = RunContext.from_args("wz", args, argv)
    frontier = wyner_ziv(model, measures, D, args.aux_size, args.budget, args.seed, args.threads)
    rate = frontier.min_sum_rate()
    logger.info("wyner_ziv_done", D=D, rate=rate)

    fieldnames = [f"D_{k + 1}" for k in range(len(D))] + ["rate_nats"]
    row: Dict[str, object] = {f"D_{k + 1}": float(d) for k, d in enumerate(D)}
    row["rate_nats"] = float(rate)
    context.write_csv("wz.csv", fieldnames, [row])
    context.write_json("frontier.json", frontier_to_dump(frontier, "wz"))
    context.finish()
    return 0


def run_sw_check(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model = load_model(args.model)
    context = RunContext.from_args("sw-check", args, argv)
    bounds = slepian_wolf_bounds(model)
    rows = [{"subset": subset_label(a), "bound_nats": float(v)} for a, v in bounds.items()]
    context.write_csv("sw_bounds.csv", ["subset", "bound_nats"], rows)
    print(json.dumps({row["subset"]: round(row["bound_nats"], 9) for row in rows}), file=sys.stdout)
    context.finish()
    return 0


def distortion_rows(frontier: DistortionFrontier, K: int) -> tuple[List[str], List[Dict[str, object]]]:
    M = frontier.terminals
    subsets = all_subsets(M)
    fieldnames = (
        [f"R_{m + 1}_nats" for m in range(M)]
        + [f"D_{k + 1}" for k in range(K)]
        + [f"bound_{subset_label(a)}_nats" for a in subsets]
    )
    rows = []
    for point in frontier.points:
        row: Dict[str, object] = {f"R_{m + 1}_nats": float(r) for m, r in enumerate(frontier.rates)}
        row.update({f"D_{k + 1}": float(d) for k, d in enumerate(point.distortions)})
        row.update({f"bound_{subset_label(a)}_nats": float(point.bounds[a]) for a in subsets})
        rows.append(row)
    return fieldnames, rows


def run_dr(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model = load_model(args.model)
    measures = load_measures(args.distortion, model)
    if len(args.rates) != model.terminals:
        raise InputError(f"--rates needs {model.terminals} values, got {len(args.rates)}", schema_pointer="/rates")
    context = RunContext.from_args("dr", args, argv)
    frontier = distortion_rate(
        model, measures, args.rates, _aux_sizes(args, model.terminals), args.budget, args.seed, args.threads
    )
    logger.info("distortion_rate_written", rates=list(frontier.rates), points=len(frontier.points))
    fieldnames, rows = distortion_rows(frontier, len(measures))
    context.write_csv("dr.csv", fieldnames, rows)
    context.finish()
    return 0
