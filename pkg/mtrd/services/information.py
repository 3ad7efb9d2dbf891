"""
Classical single-letter information quantities, in nats. 0 ln 0 is taken as 0.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr

from mtrd.core.exceptions import InputError
from mtrd.models.pmf import JointPmf

Names = Union[str, Iterable[str]]


def _names(value: Names) -> List[str]:
    names = [value] if isinstance(value, str) else list(value)
    if not names:
        raise InputError("Variable set must be nonempty")
    return names


def _disjoint(*groups: List[str]) -> None:
    seen: set = set()
    for group in groups:
        if seen & set(group):
            raise InputError(f"Variable sets must be disjoint, overlap {sorted(seen & set(group))}")
        seen |= set(group)


class AxisEntropies:
    """Entropies of marginals of a raw probability array, cached by axis set."""

    def __init__(self, probs: np.ndarray):
        self.probs = probs
        self._cache: Dict[Tuple[int, ...], float] = {(): 0.0}

    def __call__(self, axes: Iterable[int]) -> float:
        key = tuple(sorted(set(axes)))
        if key not in self._cache:
            drop = tuple(a for a in range(self.probs.ndim) if a not in key)
            marginal = self.probs.sum(axis=drop) if drop else self.probs
            self._cache[key] = float(entr(marginal).sum())
        return self._cache[key]

    def mutual(self, a: Iterable[int], b: Iterable[int]) -> float:
        a, b = tuple(a), tuple(b)
        if not a or not b:
            return 0.0
        return self(a) + self(b) - self(a + b)

    def multi(self, groups: Sequence[Iterable[int]]) -> float:
        groups = [tuple(g) for g in groups]
        joint = tuple(a for g in groups for a in g)
        return sum(self(g) for g in groups) - self(joint)


def entropy(j: JointPmf, X: Names) -> float:
    return AxisEntropies(j.probs)(j.axes(_names(X)))


def cond_entropy(j: JointPmf, X: Names, Y: Names) -> float:
    x, y = _names(X), _names(Y)
    _disjoint(x, y)
    h = AxisEntropies(j.probs)
    return h(j.axes(x + y)) - h(j.axes(y))


def mutual_info(j: JointPmf, X: Names, Y: Names) -> float:
    x, y = _names(X), _names(Y)
    _disjoint(x, y)
    return AxisEntropies(j.probs).mutual(j.axes(x), j.axes(y))


def cond_mutual_info(j: JointPmf, X: Names, Y: Names, W: Names) -> float:
    x, y, w = _names(X), _names(Y), _names(W)
    _disjoint(x, y, w)
    h = AxisEntropies(j.probs)
    xw, yw, xyw, ww = (j.axes(g) for g in (x + w, y + w, x + y + w, w))
    return h(xw) + h(yw) - h(xyw) - h(ww)


def multi_info(j: JointPmf, groups: Sequence[Names]) -> float:
    """sum_m H(G_m) - H(G_1, ..., G_k); zero for a single group."""
    named = [_names(g) for g in groups]
    if not named:
        raise InputError("multi_info needs at least one group")
    _disjoint(*named)
    return AxisEntropies(j.probs).multi([j.axes(g) for g in named])


@dataclass(frozen=True)
class ClassicalQuantities:
    H: float
    H_cond: float
    I: float


def classical_quantities(j: JointPmf, X: Names, Y: Names) -> ClassicalQuantities:
    """H(X), H(X|Y) and I(X;Y) in one pass."""
    x, y = _names(X), _names(Y)
    _disjoint(x, y)
    h = AxisEntropies(j.probs)
    hx, hy, hxy = h(j.axes(x)), h(j.axes(y)), h(j.axes(x + y))
    return ClassicalQuantities(H=hx, H_cond=hxy - hy, I=hx + hy - hxy)
