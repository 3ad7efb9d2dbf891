"""
Exact finite-alphabet probability algebra: joint pmfs, marginals, conditionals and
the Markov composition of a source with per-terminal test channels.
"""
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from mtrd.core.config import settings
from mtrd.core.exceptions import (
    AllMassZero,
    AlphabetMismatch,
    InputError,
    NegativeMass,
    ShapeMismatch,
    SumNotOne,
    UnknownVariable,
)
from mtrd.models.alphabet import Alphabet

Variable = Tuple[str, Alphabet]
VariableSpec = Union[Variable, Alphabet]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


class JointPmf:
    """Dense joint pmf over named finite variables. Immutable."""

    def __init__(self, variables: Sequence[Variable], probs: np.ndarray):
        self.variables: Tuple[Variable, ...] = tuple(variables)
        self.probs = _frozen(probs)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    @property
    def alphabets(self) -> Tuple[Alphabet, ...]:
        return tuple(alphabet for _, alphabet in self.variables)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.probs.shape

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"Unknown variable '{name}'; have {list(self.names)}") from None

    def axes(self, names: Iterable[str]) -> Tuple[int, ...]:
        return tuple(self.axis(name) for name in names)

    def alphabet(self, name: str) -> Alphabet:
        return self.variables[self.axis(name)][1]

    def reorder(self, names: Sequence[str]) -> "JointPmf":
        """Same law with variables permuted into the given order."""
        axes = self.axes(names)
        if sorted(axes) != list(range(len(self.variables))):
            raise InputError("reorder needs every variable exactly once")
        return JointPmf([self.variables[a] for a in axes], np.transpose(self.probs, axes))

    def prob(self, **symbols: str) -> float:
        index = tuple(self.alphabet(name).index(symbols[name]) for name in self.names)
        return float(self.probs[index])

    def __repr__(self) -> str:
        return f"JointPmf({', '.join(f'{n}:{a.size}' for n, a in self.variables)})"


class Channel:
    """Conditional pmf rows[input, output]. Rows conditioned on zero mass are marked undefined."""

    def __init__(
        self,
        input: Alphabet,
        output: Alphabet,
        rows: np.ndarray,
        undefined: Optional[np.ndarray] = None,
    ):
        self.input = input
        self.output = output
        self.rows = _frozen(rows)
        mask = np.zeros(input.size, dtype=bool) if undefined is None else np.asarray(undefined, dtype=bool)
        mask.setflags(write=False)
        self.undefined = mask

    @property
    def has_undefined(self) -> bool:
        return bool(self.undefined.any())

    @classmethod
    def identity(cls, alphabet: Alphabet, name: Optional[str] = None) -> "Channel":
        output = Alphabet(name or alphabet.name, alphabet.symbols)
        return cls(alphabet, output, np.eye(alphabet.size))

    @classmethod
    def uniform(cls, input: Alphabet, output: Alphabet) -> "Channel":
        return cls(input, output, np.full((input.size, output.size), 1.0 / output.size))

    @classmethod
    def constant(cls, input: Alphabet, name: str = "Z") -> "Channel":
        """Single-symbol output: carries no information about the input."""
        return cls(input, Alphabet(name, ("*",)), np.ones((input.size, 1)))

    @classmethod
    def bsc(cls, crossover: float, input: Optional[Alphabet] = None, name: str = "Z") -> "Channel":
        input = input or Alphabet.range("X", 2)
        rows = np.array([[1.0 - crossover, crossover], [crossover, 1.0 - crossover]])
        return make_channel(input, Alphabet(name, input.symbols), rows)

    def __repr__(self) -> str:
        return f"Channel({self.input.name}:{self.input.size} -> {self.output.name}:{self.output.size})"


def _normalize_variables(variables: Sequence[VariableSpec]) -> Tuple[Variable, ...]:
    normalized = []
    for item in variables:
        if isinstance(item, Alphabet):
            normalized.append((item.name, item))
        else:
            name, alphabet = item
            normalized.append((str(name), alphabet))
    names = [name for name, _ in normalized]
    if len(set(names)) != len(names):
        raise InputError(f"Duplicate variable names: {names}")
    if not normalized:
        raise InputError("A joint pmf needs at least one variable")
    return tuple(normalized)


def _table_from_mapping(variables: Sequence[Variable], probs: Mapping) -> np.ndarray:
    table = np.zeros(tuple(a.size for _, a in variables))
    for key, value in probs.items():
        if isinstance(key, str):
            symbols = tuple(key) if len(key) == len(variables) else tuple(key.split("|"))
        else:
            symbols = tuple(str(s) for s in key)
        if len(symbols) != len(variables):
            raise ShapeMismatch(f"Cell key {key!r} does not name {len(variables)} symbols")
        index = tuple(a.index(s) for (_, a), s in zip(variables, symbols))
        table[index] += float(value)
    return table


def _check_mass(table: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(table)):
        raise InputError(f"{what} has non-finite entries")
    if np.any(table < 0):
        raise NegativeMass(f"{what} has negative entries (min {table.min():.3e})")
    return table


def make_joint_pmf(
    variables: Sequence[VariableSpec],
    probs: Union[np.ndarray, Sequence, Mapping],
    tolerance: Optional[float] = None,
) -> JointPmf:
    """Validate a table and return a JointPmf.

    Entries are renormalized only when the total deviates from 1 by at most
    ``tolerance`` (settings.renormalize_tolerance by default).
    """
    tolerance = settings.renormalize_tolerance if tolerance is None else tolerance
    variables = _normalize_variables(variables)
    expected = tuple(a.size for _, a in variables)

    if isinstance(probs, Mapping):
        table = _table_from_mapping(variables, probs)
    else:
        table = np.asarray(probs, dtype=np.float64)
        if table.shape != expected:
            if table.size == int(np.prod(expected)) and table.ndim == 1:
                table = table.reshape(expected)
            else:
                raise ShapeMismatch(f"Table shape {table.shape} does not match alphabets {expected}")

    _check_mass(table, "Joint table")
    total = float(table.sum())
    if abs(total - 1.0) > tolerance:
        raise SumNotOne(f"Joint table sums to {total:.12g}")
    return JointPmf(variables, table / total)


def make_channel(
    input: Alphabet,
    output: Alphabet,
    rows: Union[np.ndarray, Sequence],
    tolerance: Optional[float] = None,
) -> Channel:
    tolerance = settings.renormalize_tolerance if tolerance is None else tolerance
    table = np.asarray(rows, dtype=np.float64)
    if table.shape != (input.size, output.size):
        raise ShapeMismatch(f"Channel rows {table.shape} do not match ({input.size}, {output.size})")
    _check_mass(table, "Channel")
    sums = table.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > tolerance):
        raise SumNotOne(f"Channel rows sum to {sums.tolist()}")
    return Channel(input, output, table / sums[:, None])


def marginalize(j: JointPmf, keep: Iterable[str]) -> JointPmf:
    keep = list(keep)
    if not keep:
        raise InputError("marginalize needs a nonempty variable set")
    keep_axes = set(j.axes(keep))
    drop = tuple(a for a in range(len(j.variables)) if a not in keep_axes)
    variables = [v for a, v in enumerate(j.variables) if a in keep_axes]
    return JointPmf(variables, j.probs.sum(axis=drop) if drop else j.probs)


def condition(j: JointPmf, target: Iterable[str], given: Iterable[str]) -> Channel:
    """P(target | given) as a Channel over the product alphabets."""
    target, given = list(target), list(given)
    if not target or not given:
        raise InputError("condition needs nonempty target and given sets")
    if set(target) & set(given):
        raise InputError(f"target and given overlap: {sorted(set(target) & set(given))}")
    sub = marginalize(j, target + given).reorder(given + target)
    g_alphabet = Alphabet.product([sub.alphabet(n) for n in given])
    t_alphabet = Alphabet.product([sub.alphabet(n) for n in target])
    table = sub.probs.reshape(g_alphabet.size, t_alphabet.size)
    mass = table.sum(axis=1)
    if not np.any(mass > 0):
        raise AllMassZero(f"Conditioning marginal of {given} is identically zero")
    undefined = mass <= 0
    rows = np.zeros_like(table)
    np.divide(table, mass[:, None], out=rows, where=~undefined[:, None])
    return Channel(g_alphabet, t_alphabet, rows, undefined)


def compose_test_channels(
    source: JointPmf,
    channels: Sequence[Channel],
    inputs: Optional[Sequence[str]] = None,
    aux_names: Optional[Sequence[str]] = None,
) -> JointPmf:
    """P(x_1..x_M, s) * prod_m P(z_m | x_m), appended as new trailing variables."""
    inputs = list(inputs) if inputs is not None else list(source.names[: len(channels)])
    if len(inputs) != len(channels):
        raise InputError("one input variable is needed per test channel")
    aux_names = list(aux_names) if aux_names is not None else [f"Z{m + 1}" for m in range(len(channels))]
    clash = set(aux_names) & set(source.names)
    if clash:
        raise InputError(f"Auxiliary names clash with source variables: {sorted(clash)}")

    probs = source.probs
    variables = list(source.variables)
    for name, channel, z_name in zip(inputs, channels, aux_names):
        axis = source.axis(name)
        if not channel.input.same_symbols(source.variables[axis][1]):
            raise AlphabetMismatch(
                f"Channel input {channel.input.symbols} does not match alphabet of '{name}'"
            )
        if channel.has_undefined:
            raise InputError(f"Test channel for '{name}' has undefined rows")
        shape = [1] * probs.ndim + [channel.output.size]
        shape[axis] = channel.input.size
        probs = probs[..., np.newaxis] * channel.rows.reshape(shape)
        variables.append((z_name, Alphabet(z_name, channel.output.symbols)))
    return JointPmf(variables, probs)
