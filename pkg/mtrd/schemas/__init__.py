from mtrd.schemas.experiment import CodecConfig, ErrorStats, ExperimentConfig
from mtrd.schemas.manifest import RunManifest
from mtrd.schemas.region import AuxConfigSpec, FrontierPointSpec, RegionDump, SpectralEstimateSpec
from mtrd.schemas.source import DistortionSpec, SourceModelSpec

__all__ = [
    "AuxConfigSpec",
    "CodecConfig",
    "DistortionSpec",
    "ErrorStats",
    "ExperimentConfig",
    "FrontierPointSpec",
    "RegionDump",
    "RunManifest",
    "SourceModelSpec",
    "SpectralEstimateSpec",
]
