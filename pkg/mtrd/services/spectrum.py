"""
Exact finite-n distributions of normalized information densities.

Memoryless and mixed models are handled by enumerating type classes of the
single-letter cells: all sequences of one type share the density value, and
type masses are multinomial. Cells whose per-letter statistics coincide are
grouped first, so the enumeration runs over distinct statistics only.
Explicit models enumerate their word table directly.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from mtrd.core.config import settings
from mtrd.core.exceptions import BudgetExceeded, EmptyGrid, InputError, UndefinedDensity
from mtrd.core.logging import get_logger
from mtrd.models.pmf import Channel, JointPmf, compose_test_channels, marginalize
from mtrd.models.source import SourceKind, SourceModel, model_law

logger = get_logger(__name__)

# finite stand-in for ln 0; multiplied by counts up to max_blocklength-scale n
LOG_FLOOR = -1e250


class DensityVariant(str, Enum):
    ENTROPY = "entropy"
    COND_ENTROPY = "cond_entropy"
    MUTUAL_INFO = "mutual_info"
    MULTI_INFO = "multi_info"
    COND_MUTUAL_INFO = "cond_mutual_info"
    DIVERGENCE_COND = "divergence_cond"


@dataclass(frozen=True)
class DensityTerm:
    """coef * ln P(names), or of the reference law when ``reference`` is set."""

    coef: float
    names: Tuple[str, ...]
    reference: bool = False


def _group(names: Sequence[str]) -> Tuple[str, ...]:
    return (names,) if isinstance(names, str) else tuple(names)


@dataclass(frozen=True, eq=False)
class DensityKind:
    variant: DensityVariant
    groups: Tuple[Tuple[str, ...], ...]
    reference: Optional[JointPmf] = None

    @classmethod
    def entropy(cls, X: Sequence[str]) -> "DensityKind":
        return cls(DensityVariant.ENTROPY, (_group(X),))

    @classmethod
    def cond_entropy(cls, X: Sequence[str], Y: Sequence[str]) -> "DensityKind":
        return cls(DensityVariant.COND_ENTROPY, (_group(X), _group(Y)))

    @classmethod
    def mutual_info(cls, X: Sequence[str], Y: Sequence[str]) -> "DensityKind":
        return cls(DensityVariant.MUTUAL_INFO, (_group(X), _group(Y)))

    @classmethod
    def multi_info(cls, groups: Sequence[Sequence[str]]) -> "DensityKind":
        groups = tuple(_group(g) for g in groups)
        if not groups:
            raise InputError("MultiInfo needs a nonempty variable set")
        return cls(DensityVariant.MULTI_INFO, groups)

    @classmethod
    def cond_mutual_info(
        cls, A: Sequence[str], B: Sequence[str], W: Sequence[str] = ()
    ) -> "DensityKind":
        return cls(DensityVariant.COND_MUTUAL_INFO, (_group(A), _group(B), _group(W)))

    @classmethod
    def divergence_cond(cls, X: Sequence[str], Y: Sequence[str], reference: JointPmf) -> "DensityKind":
        """ln P(x|y) - ln Q(x|y) with Q the reference law."""
        return cls(DensityVariant.DIVERGENCE_COND, (_group(X), _group(Y)), reference)

    def terms(self) -> List[DensityTerm]:
        g = self.groups
        required = g[:2] if self.variant == DensityVariant.COND_MUTUAL_INFO else g
        if any(not group for group in required):
            raise InputError(f"{self.variant.value} needs nonempty variable sets")
        if self.variant == DensityVariant.ENTROPY:
            return [DensityTerm(-1.0, g[0])]
        if self.variant == DensityVariant.COND_ENTROPY:
            return [DensityTerm(-1.0, g[0] + g[1]), DensityTerm(1.0, g[1])]
        if self.variant == DensityVariant.MUTUAL_INFO:
            return [DensityTerm(1.0, g[0] + g[1]), DensityTerm(-1.0, g[0]), DensityTerm(-1.0, g[1])]
        if self.variant == DensityVariant.MULTI_INFO:
            union = tuple(name for group in g for name in group)
            return [DensityTerm(1.0, union)] + [DensityTerm(-1.0, group) for group in g]
        if self.variant == DensityVariant.COND_MUTUAL_INFO:
            a, b, w = g
            terms = [DensityTerm(1.0, a + b + w), DensityTerm(-1.0, a + w), DensityTerm(-1.0, b + w)]
            if w:
                terms.append(DensityTerm(1.0, w))
            return terms
        x, y = g
        return [
            DensityTerm(1.0, x + y),
            DensityTerm(-1.0, y),
            DensityTerm(-1.0, x + y, reference=True),
            DensityTerm(1.0, y, reference=True),
        ]

    def variables(self) -> Tuple[str, ...]:
        seen: List[str] = []
        for group in self.groups:
            seen.extend(name for name in group if name not in seen)
        return tuple(seen)

    @property
    def label(self) -> str:
        parts = ";".join(",".join(group) for group in self.groups if group)
        return f"{self.variant.value}({parts})"


@dataclass(frozen=True, eq=False)
class DensitySpectrum:
    """Exact law of the normalized density at one blocklength; atoms ascending."""

    n: int
    values: np.ndarray
    masses: np.ndarray
    kind: DensityKind

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.values.tolist(), self.masses.tolist()))

    def mean(self) -> float:
        return float(np.dot(self.values, self.masses))

    def variance(self) -> float:
        return float(np.dot((self.values - self.mean()) ** 2, self.masses))

    def cdf(self, value: float) -> float:
        return float(self.masses[self.values <= value].sum())

    def quantile(self, u: float) -> float:
        """Left-continuous inverse CDF: min{v : F(v) >= u}."""
        cumulative = np.cumsum(self.masses)
        index = int(np.searchsorted(cumulative, u, side="left"))
        return float(self.values[min(index, self.values.size - 1)])


@dataclass(frozen=True)
class SpectralPoint:
    n: int
    inf_quantile: float
    sup_quantile: float
    mean: float


@dataclass(frozen=True)
class SpectralEstimate:
    sup_proxy: float
    inf_proxy: float
    epsilon: float
    n_grid: Tuple[int, ...]
    extrapolated: bool = False
    trajectory: Tuple[SpectralPoint, ...] = field(default_factory=tuple)


@lru_cache(maxsize=64)
def _compositions(n: int, k: int) -> np.ndarray:
    """All (c_1..c_k) >= 0 summing to n, one per row."""
    if k == 1:
        out = np.array([[n]], dtype=np.int64)
    elif k == 2:
        first = np.arange(n, -1, -1, dtype=np.int64)
        out = np.stack([first, n - first], axis=1)
    else:
        blocks = []
        for first in range(n, -1, -1):
            rest = _compositions(n - first, k - 1)
            blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def _log(x: np.ndarray) -> np.ndarray:
    out = np.full(np.shape(x), LOG_FLOOR)
    np.log(x, out=out, where=np.asarray(x) > 0)
    return out


def _log_marginal_on(layout: JointPmf, law: JointPmf, names: Tuple[str, ...]) -> np.ndarray:
    """ln law(names) broadcast onto every cell of ``layout``, flattened."""
    for name in names:
        layout.axis(name)
        if law.alphabet(name).size != layout.alphabet(name).size:
            raise InputError(f"Reference law disagrees on the size of '{name}'")
    ordered = [name for name in layout.names if name in names]
    marginal = marginalize(law, ordered).reorder(ordered).probs
    shape = [layout.alphabet(name).size if name in names else 1 for name in layout.names]
    return np.broadcast_to(_log(marginal).reshape(shape), layout.shape).ravel()


def _merge_atoms(values: np.ndarray, masses: np.ndarray, resolution: float) -> Tuple[np.ndarray, np.ndarray]:
    keep = masses > 0
    values, masses = values[keep], masses[keep]
    order = np.argsort(values, kind="stable")
    values, masses = values[order], masses[order]
    if values.size == 0:
        raise UndefinedDensity("Spectrum has no mass")
    starts = np.concatenate([[0], np.flatnonzero(np.diff(values) > resolution) + 1])
    merged_mass = np.add.reduceat(masses, starts)
    merged_value = np.add.reduceat(values * masses, starts) / merged_mass
    return merged_value, merged_mass


def _check_reference(j: JointPmf, kind: DensityKind) -> None:
    if kind.reference is None:
        return
    _, y = kind.groups
    p_y = _log_marginal_on(j, j, y)
    q_y = _log_marginal_on(j, kind.reference, y)
    support = p_y > LOG_FLOOR
    if np.any(q_y[support] <= LOG_FLOOR):
        raise UndefinedDensity("Reference conditional is undefined on the support of the first law")


def _type_spectrum(
    components: Sequence[Tuple[float, JointPmf]], n: int, kind: DensityKind
) -> Tuple[np.ndarray, np.ndarray]:
    terms = kind.terms()
    own = [t for t in terms if not t.reference]
    ref = [t for t in terms if t.reference]
    if ref and kind.reference is None:
        raise InputError("Divergence density needs a reference law")

    layout = components[0][1]
    weights = np.array([w for w, _ in components])
    cell_probs = np.stack([c.probs.ravel() for _, c in components])  # (C, K)
    stats = np.stack(
        [np.stack([_log_marginal_on(c, c, t.names) for _, c in components], axis=-1) for t in own], axis=1
    )  # (K, T, C)
    coefs = np.array([t.coef for t in own])
    ref_value = np.zeros(cell_probs.shape[1])
    for t in ref:
        ref_value += t.coef * _log_marginal_on(layout, kind.reference, t.names)

    support = weights @ cell_probs > 0
    cell_probs, stats, ref_value = cell_probs[:, support], stats[support], ref_value[support]

    if len(components) == 1:
        key = (stats[:, :, 0] @ coefs + ref_value)[:, None]
    else:
        key = np.hstack([stats.reshape(stats.shape[0], -1), ref_value[:, None]])
    _, first, group = np.unique(np.round(key, 12), axis=0, return_index=True, return_inverse=True)
    group = group.ravel()
    k = first.size
    grouped = np.stack([np.bincount(group, weights=p, minlength=k) for p in cell_probs])  # (C, G)

    count = comb(n + k - 1, k - 1)
    if count > settings.spectrum_atom_budget:
        raise BudgetExceeded(
            f"{count} type classes at n={n} over {k} distinct cells exceeds budget {settings.spectrum_atom_budget}"
        )
    types = _compositions(n, k).astype(np.float64)  # (N, G)

    log_mass = gammaln(n + 1) - gammaln(types + 1).sum(axis=1)[:, None] + types @ _log(grouped).T  # (N, C)
    masses = np.exp(logsumexp(log_mass + np.log(weights), axis=1))

    if len(components) == 1:
        values = types @ key[first, 0] / n
    else:
        g_stats = stats[first]  # (G, T, C)
        per_term = np.einsum("ng,gtc->ntc", types, g_stats)
        mixed = logsumexp(per_term + np.log(weights), axis=2)  # (N, T)
        values = (mixed @ coefs + types @ ref_value[first]) / n
    return values, masses


def _explicit_spectrum(table: JointPmf, n: int, kind: DensityKind) -> Tuple[np.ndarray, np.ndarray]:
    if kind.reference is not None:
        raise InputError("Divergence densities are supported for memoryless models only")
    masses = table.probs.ravel()
    values = np.zeros(masses.size)
    for t in kind.terms():
        values += t.coef * _log_marginal_on(table, table, t.names)
    return values / n, masses


def density_spectrum(
    model: SourceModel,
    n: int,
    kind: DensityKind,
    channels: Optional[Sequence[Channel]] = None,
    aux_names: Optional[Sequence[str]] = None,
) -> DensitySpectrum:
    """Exact distribution of the normalized density ``kind`` at blocklength n.

    With test channels the model's terminals are composed with P(Z_m|X_m)
    (auxiliaries named Z1..ZM unless ``aux_names`` is given). Mixed models
    evaluate every term under the mixture law.
    """
    if n < 1:
        raise InputError(f"Blocklength must be >= 1, got {n}")
    if model.kind == SourceKind.EXPLICIT:
        if channels:
            raise InputError("Test channels cannot be composed with explicit per-blocklength tables")
        table = model_table(model, n)
        for name in kind.variables():
            table.axis(name)
        values, masses = _explicit_spectrum(table, n, kind)
    else:
        components = model.components()
        if channels:
            components = [
                (w, compose_test_channels(base, channels, model.x_names, aux_names)) for w, base in components
            ]
        for name in kind.variables():
            components[0][1].axis(name)
        _check_reference(components[0][1], kind)
        values, masses = _type_spectrum(components, n, kind)

    values, masses = _merge_atoms(values, masses, settings.spectrum_resolution)
    logger.debug("density_spectrum", kind=kind.label, n=n, atoms=int(values.size))
    return DensitySpectrum(n, values, masses, kind)


def model_table(model: SourceModel, n: int) -> JointPmf:
    """The n-fold word table of an explicit model."""
    law = model_law(model, n)
    if law.table is None:
        raise InputError("Only explicit models carry word tables")
    return law.table


def spectra_over_grid(
    model: SourceModel,
    n_grid: Sequence[int],
    kind: DensityKind,
    channels: Optional[Sequence[Channel]] = None,
    threads: int = 1,
) -> List[DensitySpectrum]:
    """density_spectrum for every n, independently; result order follows n_grid."""
    if not n_grid:
        raise EmptyGrid("n_grid is empty")
    if threads <= 1:
        return [density_spectrum(model, n, kind, channels) for n in n_grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda n: density_spectrum(model, n, kind, channels), n_grid))


def spectral_proxies(spectra: Sequence[DensitySpectrum], epsilon: Optional[float] = None) -> SpectralEstimate:
    """Quantile proxies for p-limsup / p-liminf from the largest-n spectrum."""
    epsilon = settings.default_epsilon if epsilon is None else epsilon
    if not spectra:
        raise EmptyGrid("No spectra supplied")
    if not 0.0 < epsilon < 0.5:
        raise InputError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    ordered = sorted(spectra, key=lambda s: s.n)
    trajectory = tuple(
        SpectralPoint(s.n, s.quantile(epsilon), s.quantile(1.0 - epsilon), s.mean()) for s in ordered
    )
    last = trajectory[-1]
    return SpectralEstimate(
        sup_proxy=last.sup_quantile,
        inf_proxy=last.inf_quantile,
        epsilon=epsilon,
        n_grid=tuple(s.n for s in ordered),
        extrapolated=False,
        trajectory=trajectory,
    )


def divergence_tail_check(
    j: JointPmf,
    reference: JointPmf,
    X: Sequence[str],
    Y: Sequence[str],
    n: int,
    gamma: float,
) -> Tuple[float, float, DensitySpectrum]:
    """Exact Pr[(1/n) ln P(x|y)/Q(x|y) < -gamma] under P^n, with the bound e^{-n gamma}."""
    if gamma <= 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    model = SourceModel.iid(j)
    spectrum = density_spectrum(model, n, DensityKind.divergence_cond(X, Y, reference))
    probability = float(spectrum.masses[spectrum.values < -gamma].sum())
    return probability, float(np.exp(-n * gamma)), spectrum
