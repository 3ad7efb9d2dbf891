"""
`mtrd simulate`: Monte Carlo runs of the random-binning code over an n-grid.
"""
import argparse
from typing import Dict, List, Optional, Sequence, Tuple

from mtrd.cli.deps import RunContext, grid, parse_floats, parse_ints
from mtrd.core.exceptions import BudgetExceeded, InputError
from mtrd.core.logging import get_logger
from mtrd.models.aux_config import AuxConfig
from mtrd.models.distortion import DistortionMeasure
from mtrd.models.source import SourceModel
from mtrd.schemas.experiment import ErrorStats, ExperimentConfig
from mtrd.services.artifacts import load_config, load_frontier, load_measures, load_model, read_json, validate
from mtrd.services.codec import run_experiment
from mtrd.services.region import identity_config

logger = get_logger(__name__)

# flag name -> ExperimentConfig field
OVERRIDES = {
    "model": "model",
    "aux": "aux",
    "distortion": "distortion",
    "D": "D",
    "rates": "rates",
    "n_grid": "n_grid",
    "trials": "trials",
    "seed": "seed",
    "threads": "threads",
}


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("simulate", help="error probability of the binning code over an n-grid")
    parser.add_argument("--config", default=None, help="experiment config JSON; flags override its fields")
    parser.add_argument("--model", default=None, help="source model JSON")
    parser.add_argument("--aux", default=None, help="achieving-config JSON (default: identity channels)")
    parser.add_argument("--rates-from", default=None, help="frontier JSON whose corners and configs are replayed")
    parser.add_argument("--distortion", default=None, help="'hamming' or a distortion JSON file")
    parser.add_argument("--D", type=parse_floats, default=None, help="distortion targets, one per measure")
    parser.add_argument("--rates", type=parse_floats, default=None, help="rates in nats, one per terminal")
    parser.add_argument("--n-grid", type=parse_ints, default=None, help="comma-separated blocklengths")
    parser.add_argument("--trials", type=int, default=None, help="trials per blocklength")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--threads", type=int, default=None, help="worker cap")
    parser.add_argument("--out-dir", default=None, help="output directory")
    parser.set_defaults(handler=run)


def experiment_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Config file fields, overridden by any flag given on the command line."""
    data: Dict[str, object] = dict(read_json(args.config)) if args.config else {}
    for flag, name in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    return validate(ExperimentConfig, data, args.config or "command line")


def _plans(
    experiment: ExperimentConfig,
    args: argparse.Namespace,
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
) -> List[Tuple[Tuple[float, ...], AuxConfig]]:
    """(rates, aux config) pairs to simulate."""
    if args.rates_from:
        plans = load_frontier(args.rates_from, model)
        if experiment.rates:
            plans = [(tuple(experiment.rates), config) for _, config in plans]
        return plans
    if len(experiment.rates) != model.terminals:
        raise InputError(f"Need {model.terminals} rates, got {len(experiment.rates)}", schema_pointer="/rates")
    aux = load_config(experiment.aux, model) if experiment.aux else identity_config(model, measures)
    return [(tuple(experiment.rates), aux)]


def result_fields(M: int, K: int) -> List[str]:
    return (
        ["n"]
        + [f"R_{m + 1}_nats" for m in range(M)]
        + ["trials", "errors", "p_error", "ci_low", "ci_high", "ci_halfwidth"]
        + ["decode_failures", "decode_zero", "decode_multiple", "quantizer_failures"]
        + ["typicality_failures", "t1_violations"]
        + [f"mean_d_{k + 1}" for k in range(K)]
    )


def result_row(stats: ErrorStats, rates: Sequence[float]) -> Dict[str, object]:
    row: Dict[str, object] = stats.model_dump(exclude={"mean_distortion", "max_distortion"})
    row.update({f"R_{m + 1}_nats": float(r) for m, r in enumerate(rates)})
    row.update({f"mean_d_{k + 1}": float(d) for k, d in enumerate(stats.mean_distortion)})
    return row


def run(args: argparse.Namespace, argv: Sequence[str]) -> int:
    if not args.config and not args.model:
        raise InputError("simulate needs --config or --model")
    experiment = experiment_from_args(args)
    model = load_model(experiment.model)
    measures = load_measures(experiment.distortion, model)
    D = experiment.D or [0.0] * len(measures)
    if len(D) != len(measures):
        raise InputError(f"Need {len(measures)} distortion targets, got {len(D)}", schema_pointer="/D")
    n_grid = grid(experiment.n_grid)
    plans = _plans(experiment, args, model, measures)

    context = RunContext.from_args("simulate", args, argv)
    context.seed = experiment.seed
    fieldnames = result_fields(model.terminals, len(measures))
    rows: List[Dict[str, object]] = []
    failure: Optional[BudgetExceeded] = None
    try:
        for rates, aux in plans:
            for n in n_grid:
                config = experiment.codec_config(n, list(rates))
                stats = run_experiment(config, model, measures, D, aux)
                rows.append(result_row(stats, rates))
    except BudgetExceeded as exc:
        failure = exc
        logger.warning("simulate_budget_exceeded", completed_rows=len(rows), detail=exc.detail)

    context.write_csv("results.csv", fieldnames, rows)
    if failure is not None:
        raise failure
    context.finish()
    return 0
