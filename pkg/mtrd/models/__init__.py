from mtrd.models.alphabet import Alphabet
from mtrd.models.aux_config import AuxConfig, ReconMap
from mtrd.models.distortion import DistortionMeasure, hamming_measures
from mtrd.models.pmf import (
    Channel,
    JointPmf,
    compose_test_channels,
    condition,
    make_channel,
    make_joint_pmf,
    marginalize,
)
from mtrd.models.source import SequenceLaw, SourceKind, SourceModel, model_law

__all__ = [
    "Alphabet",
    "AuxConfig",
    "Channel",
    "DistortionMeasure",
    "JointPmf",
    "ReconMap",
    "SequenceLaw",
    "SourceKind",
    "SourceModel",
    "compose_test_channels",
    "condition",
    "hamming_measures",
    "make_channel",
    "make_joint_pmf",
    "marginalize",
    "model_law",
]
