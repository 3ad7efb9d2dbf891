from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from mtrd.core.exceptions import InputError
from mtrd.models.pmf import Channel


@dataclass(frozen=True, eq=False)
class ReconMap:
    """Single-letter reconstruction h: (s, z_1..z_M) -> (y_1..y_M).

    ``table`` has shape (|S|, |Z_1|, ..., |Z_M|, M), without the leading axis
    when there is no side information. ``undefined`` marks zero-mass cells
    whose entry was filled by the tie-break rule.
    """

    table: np.ndarray
    undefined: np.ndarray
    has_side_info: bool = False

    def __post_init__(self) -> None:
        table = np.ascontiguousarray(self.table, dtype=np.int64)
        undefined = np.ascontiguousarray(self.undefined, dtype=bool)
        if table.shape[:-1] != undefined.shape:
            raise InputError("Recon table and undefined mask disagree in shape")
        table.setflags(write=False)
        undefined.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "undefined", undefined)

    @property
    def terminals(self) -> int:
        return self.table.shape[-1]

    def apply(self, z: np.ndarray, s: Optional[np.ndarray] = None) -> np.ndarray:
        """Map index arrays z of shape (..., M) (and s of shape (...)) to y of shape (..., M)."""
        index = tuple(z[..., m] for m in range(self.terminals))
        if self.has_side_info:
            if s is None:
                raise InputError("This reconstruction needs side information")
            index = (s,) + index
        return self.table[index]


@dataclass(frozen=True, eq=False)
class AuxConfig:
    """Test channels P(Z_m|X_m) plus the reconstruction they are decoded with."""

    channels: Tuple[Channel, ...]
    recon: ReconMap
    label: str = ""

    @property
    def aux_sizes(self) -> Tuple[int, ...]:
        return tuple(c.output.size for c in self.channels)
