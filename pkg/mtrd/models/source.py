"""
Source models: generators of per-blocklength joint laws.

A model's variables are always ordered (X_1, ..., X_M[, S]).
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from mtrd.core.exceptions import AlphabetMismatch, InputError, MissingBlocklength
from mtrd.models.alphabet import Alphabet
from mtrd.models.pmf import JointPmf


class SourceKind(str, Enum):
    IID = "iid"
    MIXED = "mixed"
    EXPLICIT = "explicit"


def _ordered(base: JointPmf, side_info: Optional[str]) -> JointPmf:
    if side_info is None:
        return base
    names = [n for n in base.names if n != side_info] + [side_info]
    return base.reorder(names)


@dataclass(frozen=True)
class SourceModel:
    kind: SourceKind
    variables: Tuple[Tuple[str, Alphabet], ...]
    terminals: int
    side_info: Optional[str] = None
    base: Optional[JointPmf] = None
    alpha: Optional[float] = None
    parts: Tuple["SourceModel", ...] = ()
    tables: Mapping[int, JointPmf] = field(default_factory=dict)

    # construction

    @classmethod
    def iid(cls, base: JointPmf, side_info: Optional[str] = None) -> "SourceModel":
        if side_info is not None:
            base.axis(side_info)
        base = _ordered(base, side_info)
        terminals = len(base.variables) - (1 if side_info else 0)
        if terminals < 1:
            raise InputError("A source model needs at least one terminal")
        return cls(SourceKind.IID, base.variables, terminals, side_info, base=base)

    @classmethod
    def mixed(cls, alpha: float, comp_a: "SourceModel", comp_b: "SourceModel") -> "SourceModel":
        if not 0.0 < alpha < 1.0:
            raise InputError(f"Mixture weight alpha must lie in (0, 1), got {alpha}")
        if comp_a.names != comp_b.names or comp_a.side_info != comp_b.side_info:
            raise AlphabetMismatch("Mixture components must declare the same variables")
        for (_, a), (_, b) in zip(comp_a.variables, comp_b.variables):
            if not a.same_symbols(b):
                raise AlphabetMismatch(f"Mixture components disagree on alphabet '{a.name}'")
        return cls(
            SourceKind.MIXED,
            comp_a.variables,
            comp_a.terminals,
            comp_a.side_info,
            alpha=float(alpha),
            parts=(comp_a, comp_b),
        )

    @classmethod
    def explicit(
        cls,
        variables: Tuple[Tuple[str, Alphabet], ...],
        tables: Mapping[int, JointPmf],
        side_info: Optional[str] = None,
    ) -> "SourceModel":
        variables = tuple(variables)
        names = [n for n, _ in variables]
        if side_info is not None:
            if side_info not in names:
                raise InputError(f"Side information '{side_info}' is not a declared variable")
            variables = tuple(v for v in variables if v[0] != side_info) + tuple(
                v for v in variables if v[0] == side_info
            )
        checked: Dict[int, JointPmf] = {}
        for n, table in tables.items():
            table = table.reorder([name for name, _ in variables])
            for (name, letter), (_, words) in zip(variables, table.variables):
                if words.size != letter.size**n:
                    raise AlphabetMismatch(
                        f"Table for n={n} has {words.size} words for '{name}', expected {letter.size ** n}"
                    )
            checked[int(n)] = table
        terminals = len(variables) - (1 if side_info else 0)
        return cls(SourceKind.EXPLICIT, variables, terminals, side_info, tables=checked)

    # views

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    @property
    def x_names(self) -> Tuple[str, ...]:
        return self.names[: self.terminals]

    @property
    def alphabets(self) -> Tuple[Alphabet, ...]:
        return tuple(a for _, a in self.variables)

    @property
    def beta(self) -> Optional[float]:
        return None if self.alpha is None else 1.0 - self.alpha

    @property
    def is_memoryless(self) -> bool:
        return self.kind == SourceKind.IID

    def components(self) -> List[Tuple[float, JointPmf]]:
        """(weight, single-letter base) pairs; i.i.d. models are one component."""
        if self.kind == SourceKind.IID:
            return [(1.0, self.base)]
        if self.kind == SourceKind.MIXED:
            comp_a, comp_b = self.parts
            return [(self.alpha * w, b) for w, b in comp_a.components()] + [
                (self.beta * w, b) for w, b in comp_b.components()
            ]
        raise InputError("Explicit models have no memoryless components")

    def single_letter(self) -> JointPmf:
        """The n = 1 law."""
        if self.kind == SourceKind.EXPLICIT:
            return model_law(self, 1).table
        probs = sum(w * b.probs for w, b in self.components())
        return JointPmf(self.variables, probs)


class SequenceLaw:
    """Evaluator of P(x^n) for one model and blocklength.

    Blocks are integer arrays of symbol indices with shape (..., n, V).
    Never materializes the n-fold table for i.i.d. or mixed models.
    """

    def __init__(self, model: SourceModel, n: int):
        if n < 1:
            raise InputError(f"Blocklength must be >= 1, got {n}")
        self.model = model
        self.n = n
        self.table: Optional[JointPmf] = None
        if model.kind == SourceKind.EXPLICIT:
            if n not in model.tables:
                raise MissingBlocklength(f"Explicit model has no table for n={n}")
            self.table = model.tables[n]
            self._components: List[Tuple[float, JointPmf]] = []
        else:
            self._components = model.components()
        with np.errstate(divide="ignore"):
            self._log_bases = [np.log(b.probs) for _, b in self._components]
            self._log_weights = np.log([w for w, _ in self._components])

    @property
    def num_variables(self) -> int:
        return len(self.model.variables)

    def _word_indices(self, block: np.ndarray) -> Tuple[np.ndarray, ...]:
        sizes = [a.size for a in self.model.alphabets]
        powers = [size ** np.arange(self.n - 1, -1, -1, dtype=np.int64) for size in sizes]
        return tuple((block[..., :, v].astype(np.int64) * powers[v]).sum(axis=-1) for v in range(len(sizes)))

    def log_prob(self, block: np.ndarray) -> np.ndarray:
        block = np.asarray(block)
        if block.shape[-2:] != (self.n, self.num_variables):
            raise InputError(f"Block shape {block.shape} does not end with ({self.n}, {self.num_variables})")
        if self.table is not None:
            with np.errstate(divide="ignore"):
                return np.log(self.table.probs[self._word_indices(block)])
        per_component = []
        for log_base in self._log_bases:
            letters = log_base[tuple(block[..., v] for v in range(self.num_variables))]
            per_component.append(letters.sum(axis=-1))
        if len(per_component) == 1:
            return per_component[0]
        stacked = np.stack(per_component, axis=0)
        weights = self._log_weights.reshape((-1,) + (1,) * (stacked.ndim - 1))
        return logsumexp(stacked + weights, axis=0)

    def prob(self, block: np.ndarray) -> np.ndarray:
        return np.exp(self.log_prob(block))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` blocks, shape (count, n, V)."""
        shape = tuple(a.size for a in self.model.alphabets)
        if self.table is not None:
            flat = self.table.probs.ravel()
            cells = rng.choice(flat.size, size=count, p=flat)
            words = np.unravel_index(cells, self.table.shape)
            out = np.empty((count, self.n, len(shape)), dtype=np.int64)
            for v, size in enumerate(shape):
                digits = words[v]
                for i in range(self.n - 1, -1, -1):
                    out[:, i, v] = digits % size
                    digits = digits // size
            return out
        out = np.empty((count, self.n, len(shape)), dtype=np.int64)
        which = (
            rng.choice(len(self._components), size=count, p=[w for w, _ in self._components])
            if len(self._components) > 1
            else np.zeros(count, dtype=np.int64)
        )
        for c, (_, base) in enumerate(self._components):
            rows = np.flatnonzero(which == c)
            if rows.size == 0:
                continue
            flat = base.probs.ravel()
            cells = rng.choice(flat.size, size=(rows.size, self.n), p=flat)
            for v, idx in enumerate(np.unravel_index(cells, shape)):
                out[rows, :, v] = idx
        return out


def model_law(model: SourceModel, n: int) -> SequenceLaw:
    return SequenceLaw(model, n)
