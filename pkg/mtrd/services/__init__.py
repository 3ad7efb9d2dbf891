from mtrd.services.blahut import rate_distortion, source_rate_distortion
from mtrd.services.codec import run_experiment
from mtrd.services.information import classical_quantities
from mtrd.services.region import (
    distortion_rate,
    identity_config,
    mixed_region,
    search_region,
    slepian_wolf_bounds,
    wyner_ziv,
    wyner_ziv_rate,
)
from mtrd.services.spectrum import DensityKind, density_spectrum, spectral_proxies

__all__ = [
    "DensityKind",
    "classical_quantities",
    "density_spectrum",
    "distortion_rate",
    "identity_config",
    "mixed_region",
    "rate_distortion",
    "run_experiment",
    "search_region",
    "slepian_wolf_bounds",
    "source_rate_distortion",
    "spectral_proxies",
    "wyner_ziv",
    "wyner_ziv_rate",
]
