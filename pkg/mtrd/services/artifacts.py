"""
Loading and dumping of model, distortion, achieving-config and frontier files.
"""
import json
from pathlib import Path
from typing import Any, List, Sequence, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from mtrd.core.exceptions import InputError
from mtrd.models.alphabet import Alphabet
from mtrd.models.aux_config import AuxConfig, ReconMap
from mtrd.models.distortion import DistortionMeasure, hamming_measures
from mtrd.models.pmf import make_channel, make_joint_pmf
from mtrd.models.source import SourceModel
from mtrd.schemas.region import AuxConfigSpec, FrontierPointSpec, ReconSpec, RegionDump
from mtrd.schemas.source import DistortionSpec, SourceModelSpec
from mtrd.services.region import RegionFrontier, subset_label

SchemaT = TypeVar("SchemaT", bound=BaseModel)


def read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"File not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})", schema_pointer="") from None


def validate(schema: Type[SchemaT], data: Any, source: str = "") -> SchemaT:
    """Validate data against a schema; failures become InputError with a JSON pointer."""
    try:
        return schema.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        pointer = "/" + "/".join(str(part) for part in first["loc"])
        raise InputError(f"{source or schema.__name__}: {first['msg']}", schema_pointer=pointer) from None


def _with_pointer(pointer: str, build, *args):
    try:
        return build(*args)
    except InputError as exc:
        if exc.schema_pointer is None:
            exc.schema_pointer = pointer
        raise


def model_from_spec(spec: SourceModelSpec) -> SourceModel:
    variables = [(a.name, Alphabet(a.name, tuple(a.symbols))) for a in spec.alphabets]
    if spec.kind == "iid":
        base = _with_pointer("/joint", make_joint_pmf, variables, spec.joint)
        return SourceModel.iid(base, spec.side_info)
    if spec.kind == "mixed":
        parts = [
            SourceModel.iid(_with_pointer(f"/joint/{i}", make_joint_pmf, variables, table), spec.side_info)
            for i, table in enumerate(spec.joint)
        ]
        return SourceModel.mixed(spec.alpha, parts[0], parts[1])
    tables = {
        n: _with_pointer(
            f"/tables/{n}", make_joint_pmf, [(name, letter.words(n)) for name, letter in variables], table
        )
        for n, table in spec.tables.items()
    }
    return SourceModel.explicit(tuple(variables), tables, spec.side_info)


def load_model(path: Union[str, Path]) -> SourceModel:
    spec = validate(SourceModelSpec, read_json(path), str(path))
    return model_from_spec(spec)


def load_measures(argument: str, model: SourceModel) -> List[DistortionMeasure]:
    """'hamming' gives one per-terminal Hamming measure per terminal; anything else is a file."""
    alphabets = model.alphabets[: model.terminals]
    if argument == "hamming":
        return list(hamming_measures(alphabets))
    spec = validate(DistortionSpec, read_json(argument), argument)
    measures = []
    for k, m in enumerate(spec.measures):
        recon = tuple(Alphabet(a.name, tuple(a.symbols)) for a in m.recon_alphabets) if m.recon_alphabets else alphabets
        measures.append(
            _with_pointer(
                f"/measures/{k}/table",
                DistortionMeasure,
                np.asarray(m.table, dtype=np.float64),
                alphabets,
                recon,
                k,
                m.additive,
                m.name or f"d{k + 1}",
            )
        )
    return measures


def config_to_spec(config: AuxConfig) -> AuxConfigSpec:
    return AuxConfigSpec(
        label=config.label,
        channels=[c.rows.tolist() for c in config.channels],
        recon=ReconSpec(
            table=config.recon.table.tolist(),
            undefined=config.recon.undefined.tolist(),
            has_side_info=config.recon.has_side_info,
        ),
    )


def config_from_spec(spec: AuxConfigSpec, model: SourceModel) -> AuxConfig:
    if len(spec.channels) != model.terminals:
        raise InputError(f"Config has {len(spec.channels)} channels, model has {model.terminals} terminals",
                         schema_pointer="/channels")
    channels = tuple(
        _with_pointer(
            f"/channels/{m}",
            make_channel,
            model.alphabets[m],
            Alphabet.range(f"Z{m + 1}", len(rows[0]) if rows else 0),
            rows,
        )
        for m, rows in enumerate(spec.channels)
    )
    recon = ReconMap(np.asarray(spec.recon.table), np.asarray(spec.recon.undefined), spec.recon.has_side_info)
    return AuxConfig(channels, recon, spec.label)


def load_config(path: Union[str, Path], model: SourceModel) -> AuxConfig:
    return config_from_spec(validate(AuxConfigSpec, read_json(path), str(path)), model)


def frontier_to_dump(frontier: RegionFrontier, command: str) -> RegionDump:
    return RegionDump(
        command=command,
        terminals=frontier.terminals,
        targets=list(frontier.targets),
        inner_approximation=frontier.inner_approximation,
        points=[
            FrontierPointSpec(
                rates=list(p.rates),
                bounds={subset_label(a): v for a, v in p.bounds.items()},
                distortions=list(p.distortions),
                config=config_to_spec(p.config),
            )
            for p in frontier.points
        ],
    )


def load_frontier(path: Union[str, Path], model: SourceModel) -> List[Tuple[Tuple[float, ...], AuxConfig]]:
    """(rates, achieving config) pairs from a region dump, for replay in the simulator."""
    dump = validate(RegionDump, read_json(path), str(path))
    if dump.terminals != model.terminals:
        raise InputError("Frontier terminal count does not match the model", schema_pointer="/terminals")
    return [(tuple(p.rates), config_from_spec(p.config, model)) for p in dump.points]


def write_json(path: Path, payload: Union[BaseModel, Sequence, dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = payload.model_dump_json(indent=2) if isinstance(payload, BaseModel) else json.dumps(payload, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    return path
