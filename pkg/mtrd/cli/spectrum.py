"""
`mtrd spectrum`: exact per-n density spectra and their quantile proxies.
"""
import argparse
from typing import List, Sequence

from mtrd.cli.deps import RunContext, add_run_options, grid, parse_ints
from mtrd.core.config import settings
from mtrd.core.exceptions import InputError
from mtrd.core.logging import get_logger
from mtrd.models.source import SourceModel
from mtrd.schemas.region import SpectralEstimateSpec, SpectralPointSpec
from mtrd.services.artifacts import load_config, load_model
from mtrd.services.spectrum import DensityKind, spectra_over_grid, spectral_proxies

logger = get_logger(__name__)

KINDS = ("entropy", "cond_entropy", "mutual_info", "multi_info", "cond_mutual_info")


def parse_kind(text: str, model: SourceModel) -> DensityKind:
    """'variant:A|B|W', groups split by '|' and names within a group by ','.

    A bare variant name uses the model's terminals: entropy of all of them,
    and one group per terminal for the two-sided kinds.
    """
    variant, _, body = text.partition(":")
    if variant not in KINDS:
        raise InputError(f"Unknown density kind '{variant}'; expected one of {', '.join(KINDS)}")
    if body:
        groups = [[name.strip() for name in part.split(",") if name.strip()] for part in body.split("|")]
    elif variant == "entropy":
        groups = [list(model.x_names)]
    else:
        groups = [[name] for name in model.x_names]
        if model.side_info is not None and variant != "multi_info":
            groups.append([model.side_info])

    if variant == "entropy":
        if len(groups) != 1:
            raise InputError("entropy takes one variable group")
        return DensityKind.entropy(groups[0])
    if variant == "multi_info":
        return DensityKind.multi_info(groups)
    if variant == "cond_mutual_info":
        if len(groups) not in (2, 3):
            raise InputError("cond_mutual_info takes two or three variable groups")
        return DensityKind.cond_mutual_info(*groups)
    if len(groups) != 2:
        raise InputError(f"{variant} takes two variable groups")
    if variant == "cond_entropy":
        return DensityKind.cond_entropy(groups[0], groups[1])
    return DensityKind.mutual_info(groups[0], groups[1])


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("spectrum", help="exact finite-n information-density spectra")
    parser.add_argument("--model", required=True, help="source model JSON")
    parser.add_argument("--kind", default="entropy", help="density kind, e.g. 'mutual_info:X1|X2'")
    parser.add_argument("--n-grid", type=parse_ints, required=True, help="comma-separated blocklengths")
    parser.add_argument("--epsilon", type=float, default=None, help="tail level for the quantile proxies")
    parser.add_argument("--aux", default=None, help="achieving-config JSON whose test channels are composed in")
    add_run_options(parser)
    parser.set_defaults(handler=run)


def _rows(spectra) -> List[dict]:
    return [
        {"n": s.n, "value_nats": float(v), "mass": float(p)}
        for s in spectra
        for v, p in zip(s.values, s.masses)
    ]


def run(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model = load_model(args.model)
    kind = parse_kind(args.kind, model)
    n_grid = grid(args.n_grid)
    channels = load_config(args.aux, model).channels if args.aux else None
    threads = args.threads or settings.threads

    context = RunContext.from_args("spectrum", args, argv)
    spectra = spectra_over_grid(model, n_grid, kind, channels, threads)
    estimate = spectral_proxies(spectra, args.epsilon)
    logger.info("spectrum_done", kind=kind.label, n_grid=n_grid, sup=estimate.sup_proxy, inf=estimate.inf_proxy)

    context.write_csv("spectrum.csv", ["n", "value_nats", "mass"], _rows(spectra))
    context.write_json(
        "estimate.json",
        SpectralEstimateSpec(
            kind=kind.label,
            epsilon=estimate.epsilon,
            sup_proxy=estimate.sup_proxy,
            inf_proxy=estimate.inf_proxy,
            n_grid=list(estimate.n_grid),
            extrapolated=estimate.extrapolated,
            trajectory=[
                SpectralPointSpec(n=p.n, inf_quantile=p.inf_quantile, sup_quantile=p.sup_quantile, mean=p.mean)
                for p in estimate.trajectory
            ],
            note="proxies are the epsilon / 1-epsilon quantiles at the largest n",
        ),
    )
    context.finish()
    return 0
