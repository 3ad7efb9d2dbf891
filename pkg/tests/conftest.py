"""
Pytest configuration and fixtures for mtrd
"""
import json
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from mtrd.models import Alphabet, SourceModel, make_joint_pmf

BIT = ("0", "1")


def binary_entropy(p: float) -> float:
    return float(-p * np.log(p) - (1 - p) * np.log(1 - p))


@pytest.fixture
def h_b() -> Callable[[float], float]:
    """Binary entropy in nats"""
    return binary_entropy


@pytest.fixture
def bern() -> Callable[..., SourceModel]:
    """Factory for a single-terminal i.i.d. Bernoulli(p) source"""

    def build(p: float, name: str = "X1") -> SourceModel:
        return SourceModel.iid(make_joint_pmf([(name, Alphabet(name, BIT))], [1 - p, p]))

    return build


@pytest.fixture
def dsbs() -> Callable[[float], SourceModel]:
    """Factory for the doubly symmetric binary source with crossover p"""

    def build(p: float) -> SourceModel:
        table = [[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]]
        return SourceModel.iid(make_joint_pmf([("X1", Alphabet("X1", BIT)), ("X2", Alphabet("X2", BIT))], table))

    return build


@pytest.fixture
def side_info_model() -> Callable[[float], SourceModel]:
    """X ~ Bern(0.5) with S = X through a BSC(q); q = 0.5 makes S independent"""

    def build(q: float) -> SourceModel:
        table = [[(1 - q) / 2, q / 2], [q / 2, (1 - q) / 2]]
        joint = make_joint_pmf([("X1", Alphabet("X1", BIT)), ("S", Alphabet("S", BIT))], table)
        return SourceModel.iid(joint, side_info="S")

    return build


@pytest.fixture
def mixed_bern(bern) -> SourceModel:
    """Equal mixture of i.i.d. Bern(0.1) and Bern(0.4)"""
    return SourceModel.mixed(0.5, bern(0.1), bern(0.4))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, object], Path]:
    """Write a JSON payload into the test's temporary directory"""

    def write(name: str, payload: object) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return write


@pytest.fixture
def dsbs_file(write_json) -> Path:
    p = 0.11
    return write_json(
        "dsbs.json",
        {
            "alphabets": [{"name": "X1", "symbols": ["0", "1"]}, {"name": "X2", "symbols": ["0", "1"]}],
            "kind": "iid",
            "joint": [[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]],
        },
    )


@pytest.fixture
def bern_file(write_json) -> Path:
    return write_json(
        "bern.json",
        {"alphabets": [{"name": "X1", "symbols": ["0", "1"]}], "kind": "iid", "joint": {"0": 0.5, "1": 0.5}},
    )


@pytest.fixture
def mixed_file(write_json) -> Path:
    return write_json(
        "mixed.json",
        {
            "alphabets": [{"name": "X1", "symbols": ["0", "1"]}],
            "kind": "mixed",
            "alpha": 0.5,
            "joint": [[0.9, 0.1], [0.6, 0.4]],
        },
    )


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    return tmp_path / "out"
