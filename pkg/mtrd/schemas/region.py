from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class ReconSpec(BaseModel):
    table: List[Any]
    undefined: List[Any]
    has_side_info: bool = False


class AuxConfigSpec(BaseModel):
    """Achieving config: test channel rows per terminal plus the reconstruction table."""

    label: str = ""
    channels: List[List[List[float]]]
    recon: ReconSpec


class FrontierPointSpec(BaseModel):
    rates: List[float]
    bounds: Dict[str, float]
    distortions: List[float]
    config: AuxConfigSpec


class RegionDump(BaseModel):
    command: str
    terminals: int
    targets: List[float]
    inner_approximation: bool = True
    points: List[FrontierPointSpec]


class SpectralPointSpec(BaseModel):
    n: int
    inf_quantile: float
    sup_quantile: float
    mean: float


class SpectralEstimateSpec(BaseModel):
    kind: str
    epsilon: float
    sup_proxy: float
    inf_proxy: float
    n_grid: List[int]
    extrapolated: bool
    trajectory: List[SpectralPointSpec]
    note: Optional[str] = None
