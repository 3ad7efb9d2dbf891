"""
Shared pieces of every subcommand: argument parsing helpers, input loading,
the output directory with its manifest, and error reporting.
"""
import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from mtrd import __version__
from mtrd.core.config import settings
from mtrd.core.exceptions import EmptyGrid, InputError, MTRDError
from mtrd.core.logging import get_logger
from mtrd.models.distortion import DistortionMeasure
from mtrd.models.source import SourceModel
from mtrd.schemas.manifest import RunManifest
from mtrd.services.artifacts import load_measures, load_model, write_json

logger = get_logger(__name__)


def fmt(value: float) -> str:
    """Fixed 9-decimal rendering; infinities as 'inf'/'-inf'."""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.9f}"


def parse_floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def parse_ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (default from MTRD_THREADS)")
    parser.add_argument("--out-dir", default=None, help="output directory (default from MTRD_OUT_DIR)")


def add_model_options(parser: argparse.ArgumentParser, distortion: bool = True) -> None:
    parser.add_argument("--model", required=True, help="source model JSON")
    if distortion:
        parser.add_argument("--distortion", default="hamming", help="'hamming' or a distortion JSON file")
        parser.add_argument("--D", type=parse_floats, default=None, help="distortion targets, one per measure")


def load_inputs(args: argparse.Namespace) -> Tuple[SourceModel, List[DistortionMeasure], List[float]]:
    model = load_model(args.model)
    measures = load_measures(args.distortion, model)
    D = args.D if args.D is not None else [0.0] * len(measures)
    if len(D) != len(measures):
        raise InputError(f"--D needs {len(measures)} values, got {len(D)}")
    return model, measures, D


def grid(values: Optional[Sequence[int]]) -> List[int]:
    if not values:
        raise EmptyGrid("--n-grid is empty")
    if any(n < 1 for n in values):
        raise InputError(f"Blocklengths must be >= 1, got {list(values)}")
    return list(values)


@dataclass
class RunContext:
    """One invocation's output directory; the manifest goes in last."""

    command: str
    argv: List[str]
    out_dir: Path
    seed: Optional[int] = None
    config_path: Optional[str] = None
    outputs: List[str] = field(default_factory=list)
    started_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    _clock: float = field(default_factory=time.perf_counter)

    @classmethod
    def from_args(cls, command: str, args: argparse.Namespace, argv: Sequence[str]) -> "RunContext":
        out_dir = Path(getattr(args, "out_dir", None) or settings.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return cls(
            command=command,
            argv=list(argv),
            out_dir=out_dir,
            seed=getattr(args, "seed", None),
            config_path=getattr(args, "config", None),
        )

    def _record(self, path: Path) -> Path:
        if str(path) not in self.outputs:
            self.outputs.append(str(path))
        return path

    def write_csv(self, name: str, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: fmt(v) if isinstance(v, float) else v for k, v in row.items()})
        logger.info("csv_written", path=str(path))
        return self._record(path)

    def write_json(self, name: str, payload: Any) -> Path:
        return self._record(write_json(self.out_dir / name, payload))

    def finish(self) -> Path:
        manifest = RunManifest(
            command=self.command,
            argv=self.argv,
            config_path=self.config_path,
            seed=self.seed,
            version=__version__,
            outputs=list(self.outputs),
            started_at=self.started_at,
            wall_clock_seconds=time.perf_counter() - self._clock,
        )
        path = write_json(self.out_dir / "manifest.json", manifest)
        logger.info("run_complete", command=self.command, outputs=len(self.outputs))
        return path


def report_error(exc: MTRDError) -> int:
    """One-line error JSON on stdout; the exit code comes from the error class."""
    print(json.dumps(exc.to_dict()), file=sys.stdout, flush=True)
    logger.error("run_failed", error=type(exc).__name__, detail=exc.detail)
    return exc.exit_code
