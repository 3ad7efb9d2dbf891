from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from mtrd.core.exceptions import InputError, ShapeMismatch
from mtrd.models.alphabet import Alphabet


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """Single-letter distortion d(x_1..x_M, y_1..y_M).

    When ``additive`` is set the block distortion is the per-symbol average.
    """

    table: np.ndarray
    source_alphabets: Tuple[Alphabet, ...]
    recon_alphabets: Tuple[Alphabet, ...]
    k_index: int = 0
    additive: bool = True
    name: str = ""

    def __post_init__(self) -> None:
        table = np.ascontiguousarray(self.table, dtype=np.float64)
        expected = tuple(a.size for a in self.source_alphabets) + tuple(a.size for a in self.recon_alphabets)
        if table.shape != expected:
            raise ShapeMismatch(f"Distortion table shape {table.shape} does not match {expected}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise InputError("Distortion entries must be finite and nonnegative")
        if len(self.source_alphabets) != len(self.recon_alphabets):
            raise InputError("One reproduction alphabet is needed per terminal")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "source_alphabets", tuple(self.source_alphabets))
        object.__setattr__(self, "recon_alphabets", tuple(self.recon_alphabets))

    @property
    def terminals(self) -> int:
        return len(self.source_alphabets)

    @classmethod
    def hamming(cls, source_alphabets: Sequence[Alphabet], terminal: int, k_index: int = 0) -> "DistortionMeasure":
        """Per-symbol Hamming distortion on one terminal, reproducing on the source alphabets."""
        source_alphabets = tuple(source_alphabets)
        shape = tuple(a.size for a in source_alphabets) * 2
        grid = np.indices(shape)
        m = len(source_alphabets)
        table = (grid[terminal] != grid[m + terminal]).astype(np.float64)
        return cls(table, source_alphabets, source_alphabets, k_index, True, f"hamming[{terminal + 1}]")

    def block(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Block distortion for index arrays x, y of shape (..., n, M)."""
        if not self.additive:
            raise InputError(f"Measure '{self.name}' is not additive")
        m = self.terminals
        letters = self.table[tuple(x[..., i] for i in range(m)) + tuple(y[..., i] for i in range(m))]
        return letters.mean(axis=-1)


def hamming_measures(source_alphabets: Sequence[Alphabet]) -> Tuple[DistortionMeasure, ...]:
    return tuple(DistortionMeasure.hamming(source_alphabets, m, k_index=m) for m in range(len(source_alphabets)))
