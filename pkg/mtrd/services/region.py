"""
Achievable rate-distortion regions from single-letter subset bounds.

A composed joint has its axes laid out as (X_1..X_M, [S], Z_1..Z_M), which is
what ``compose_with_channels`` produces. For a nonempty terminal set A the
bound on sum_{m in A} R_m is

    sum_{m in A} I(X_m; Z_m) - MultiInfo(Z_A) - I(Z_A; S, Z_{A^c})

Mixed models take the max over components of each I(X_m; Z_m) and the min
over components of the two subtracted terms.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from mtrd.core.config import settings
from mtrd.core.exceptions import (
    EmptySubset,
    FactorizationViolated,
    InfeasibleDistortion,
    InputError,
)
from mtrd.core.logging import get_logger
from mtrd.models.alphabet import Alphabet
from mtrd.models.aux_config import AuxConfig, ReconMap
from mtrd.models.distortion import DistortionMeasure
from mtrd.models.pmf import Channel, JointPmf, compose_test_channels
from mtrd.models.source import SourceKind, SourceModel
from mtrd.services.information import AxisEntropies

logger = get_logger(__name__)

Subset = Tuple[int, ...]

# rate units charged per unit of distortion excess during descent
DISTORTION_PENALTY = 100.0
MAX_SWEEPS = 50
GOLDEN_STEPS = 24
MIN_STEP = 1e-4
FACTORIZATION_TOLERANCE = 1e-9
MAX_TERMINALS = 3


@dataclass(frozen=True)
class Layout:
    terminals: int
    has_side_info: bool

    @classmethod
    def of(cls, ndim: int) -> "Layout":
        has_side_info = ndim % 2 == 1
        return cls((ndim - 1) // 2 if has_side_info else ndim // 2, has_side_info)

    @property
    def s_axes(self) -> Tuple[int, ...]:
        return (self.terminals,) if self.has_side_info else ()

    def x_axis(self, m: int) -> int:
        return m

    def z_axis(self, m: int) -> int:
        return self.terminals + len(self.s_axes) + m


def all_subsets(terminals: int) -> List[Subset]:
    """Nonempty subsets of range(terminals), by size then lexicographically."""
    return [c for k in range(1, terminals + 1) for c in combinations(range(terminals), k)]


def subset_label(subset: Subset) -> str:
    return "".join(str(m + 1) for m in subset)


def _bounds(hs: Sequence[AxisEntropies], layout: Layout) -> Dict[Subset, float]:
    M = layout.terminals
    own = [max(h.mutual((layout.x_axis(m),), (layout.z_axis(m),)) for h in hs) for m in range(M)]
    bounds: Dict[Subset, float] = {}
    for subset in all_subsets(M):
        z_a = tuple(layout.z_axis(m) for m in subset)
        rest = layout.s_axes + tuple(layout.z_axis(m) for m in range(M) if m not in subset)
        multi = min(h.multi([(z,) for z in z_a]) for h in hs)
        coupling = min(h.mutual(z_a, rest) for h in hs)
        bounds[subset] = sum(own[m] for m in subset) - multi - coupling
    return bounds


def corner_points(bounds: Dict[Subset, float], terminals: int) -> List[Tuple[float, ...]]:
    """Greedy vertices of {R : sum_A R >= bound(A)}, one per terminal ordering."""
    corners: List[Tuple[float, ...]] = []
    for order in permutations(range(terminals)):
        rates = np.zeros(terminals)
        placed: set = set()
        for m in order:
            placed.add(m)
            need = 0.0
            for subset, value in bounds.items():
                if m in subset and placed.issuperset(subset):
                    need = max(need, value - sum(rates[a] for a in subset if a != m))
            rates[m] = need
        point = tuple(float(r) for r in rates)
        if point not in corners:
            corners.append(point)
    return corners


def compose_with_channels(model: SourceModel, channels: Sequence[Channel]) -> JointPmf:
    """Single-letter source law followed by the test channels, axes (X.., [S], Z..)."""
    if model.kind == SourceKind.EXPLICIT:
        raise InputError("Region computations need a memoryless or mixed model")
    if len(channels) != model.terminals:
        raise InputError(f"Expected {model.terminals} test channels, got {len(channels)}")
    return compose_test_channels(model.single_letter(), channels, model.x_names)


def compose_components(model: SourceModel, channels: Sequence[Channel]) -> List[Tuple[float, JointPmf]]:
    """(weight, composed law) per memoryless component; i.i.d. models give one pair."""
    if model.kind == SourceKind.EXPLICIT:
        raise InputError("Region computations need a memoryless or mixed model")
    if len(channels) != model.terminals:
        raise InputError(f"Expected {model.terminals} test channels, got {len(channels)}")
    return [(w, compose_test_channels(base, channels, model.x_names)) for w, base in model.components()]


def _terminal_subset(composed: JointPmf, A: Iterable[int]) -> Tuple[Layout, Subset]:
    layout = Layout.of(len(composed.variables))
    subset = tuple(sorted(set(int(a) - 1 for a in A)))
    if not subset:
        raise EmptySubset("The terminal set must be nonempty")
    if subset[0] < 0 or subset[-1] >= layout.terminals:
        raise InputError(f"Terminals must lie in 1..{layout.terminals}, got {sorted(a + 1 for a in subset)}")
    return layout, subset


def subset_bound(composed: JointPmf, A: Iterable[int]) -> float:
    """Lower bound on sum_{m in A} R_m; A holds 1-based terminal numbers."""
    layout, subset = _terminal_subset(composed, A)
    return _bounds([AxisEntropies(composed.probs)], layout)[subset]


def bt_identity_check(composed: JointPmf) -> Tuple[float, float]:
    """(I(X1;Z1) - I(Z1;Z2), I(X1;Z1|Z2)) after checking P(z1|x1) P(z2|x2) factorization."""
    layout = Layout.of(len(composed.variables))
    if layout.terminals != 2:
        raise InputError("The identity check needs exactly two terminals")
    p = composed.probs.sum(axis=layout.s_axes) if layout.has_side_info else composed.probs

    p_x = p.sum(axis=(2, 3))
    p_x1z1, p_x2z2 = p.sum(axis=(1, 3)), p.sum(axis=(0, 2))
    p_x1, p_x2 = p_x1z1.sum(axis=1), p_x2z2.sum(axis=1)
    ch1 = np.divide(p_x1z1, p_x1[:, None], out=np.zeros_like(p_x1z1), where=p_x1[:, None] > 0)
    ch2 = np.divide(p_x2z2, p_x2[:, None], out=np.zeros_like(p_x2z2), where=p_x2[:, None] > 0)
    product = p_x[:, :, None, None] * ch1[:, None, :, None] * ch2[None, :, None, :]
    gap = float(np.max(np.abs(product - p)))
    if gap > FACTORIZATION_TOLERANCE:
        raise FactorizationViolated(f"Joint differs from P(x1,x2)P(z1|x1)P(z2|x2) by {gap:.3e}")

    h = AxisEntropies(p)
    lhs = h.mutual((0,), (2,)) - h.mutual((2,), (3,))
    rhs = h((0, 3)) + h((2, 3)) - h((0, 2, 3)) - h((3,))
    return lhs, rhs


def _compose_rows(base: np.ndarray, rows: Sequence[np.ndarray]) -> np.ndarray:
    """Append Z_m ~ rows[m][x_m] to a raw table whose leading axes are X_1..X_M."""
    probs = base
    for m, row in enumerate(rows):
        shape = [1] * probs.ndim + [row.shape[1]]
        shape[m] = row.shape[0]
        probs = probs[..., np.newaxis] * row.reshape(shape)
    return probs


def _cost_matrix(measure: DistortionMeasure) -> np.ndarray:
    nx = int(np.prod([a.size for a in measure.source_alphabets]))
    return measure.table.reshape(nx, -1)


def _check_measures(measures: Sequence[DistortionMeasure], x_sizes: Sequence[int]) -> None:
    if not measures:
        raise InputError("At least one distortion measure is required")
    recon = [a.symbols for a in measures[0].recon_alphabets]
    for measure in measures:
        if not measure.additive:
            raise InputError(f"Measure '{measure.name}' is not additive")
        if tuple(a.size for a in measure.source_alphabets) != tuple(x_sizes):
            raise InputError(f"Measure '{measure.name}' does not match the source alphabets")
        if [a.symbols for a in measure.recon_alphabets] != recon:
            raise InputError("All measures must share the reproduction alphabets")


def _recon_indices(probs: np.ndarray, nx: int, cost: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Flat argmin reproduction per (s, z) cell; lowest index wins ties."""
    p = probs.reshape(nx, -1)
    expected = p.T @ cost
    lowest = expected.min(axis=1, keepdims=True)
    best = np.argmax(expected <= lowest + 1e-15 * np.maximum(1.0, np.abs(lowest)), axis=1)
    return best, p.sum(axis=0) <= 0


def _recon_map(best: np.ndarray, undefined: np.ndarray, sz_shape: Tuple[int, ...], recon_sizes: Tuple[int, ...],
               has_side_info: bool) -> ReconMap:
    table = np.stack(np.unravel_index(best, recon_sizes), axis=-1).reshape(sz_shape + (len(recon_sizes),))
    return ReconMap(table, undefined.reshape(sz_shape), has_side_info)


def optimal_recon(
    composed: JointPmf, measures: Union[DistortionMeasure, Sequence[DistortionMeasure]]
) -> ReconMap:
    """Pointwise minimizer of the (summed) conditional expected distortion."""
    measures = [measures] if isinstance(measures, DistortionMeasure) else list(measures)
    layout = Layout.of(len(composed.variables))
    x_sizes = composed.shape[: layout.terminals]
    _check_measures(measures, x_sizes)
    nx = int(np.prod(x_sizes))
    cost = sum(_cost_matrix(m) for m in measures)
    best, undefined = _recon_indices(composed.probs, nx, cost)
    recon_sizes = tuple(a.size for a in measures[0].recon_alphabets)
    return _recon_map(best, undefined, composed.shape[layout.terminals:], recon_sizes, layout.has_side_info)


def expected_distortion(composed: JointPmf, recon: ReconMap, measure: DistortionMeasure) -> float:
    layout = Layout.of(len(composed.variables))
    x_sizes = composed.shape[: layout.terminals]
    _check_measures([measure], x_sizes)
    recon_sizes = tuple(a.size for a in measure.recon_alphabets)
    flat = np.ravel_multi_index(tuple(np.moveaxis(recon.table, -1, 0)), recon_sizes).ravel()
    p = composed.probs.reshape(int(np.prod(x_sizes)), -1)
    if p.shape[1] != flat.size:
        raise InputError("Reconstruction map does not match the composed joint")
    return float(np.sum(p * _cost_matrix(measure)[:, flat]))


@dataclass(eq=False)
class Evaluation:
    rows: Tuple[np.ndarray, ...]
    recon: ReconMap
    distortions: np.ndarray
    bounds: Dict[Subset, float]
    corners: List[Tuple[float, ...]]
    violation: float
    feasible: bool
    label: str = ""

    def objective(self, weights: np.ndarray) -> float:
        return min(float(np.dot(weights, c)) for c in self.corners) + DISTORTION_PENALTY * self.violation


class RegionProblem:
    """A memoryless (possibly mixed) source with measures and targets; evaluates test channels."""

    def __init__(
        self,
        model: SourceModel,
        measures: Sequence[DistortionMeasure],
        D: Sequence[float],
        slack: Optional[float] = None,
    ):
        if model.kind == SourceKind.EXPLICIT:
            raise InputError("Region search needs a memoryless or mixed model")
        if model.terminals > MAX_TERMINALS:
            raise InputError(f"At most {MAX_TERMINALS} terminals are supported, got {model.terminals}")
        self.model = model
        self.layout = Layout(model.terminals, model.side_info is not None)
        components = model.components()
        self.weights = np.array([w for w, _ in components])
        self.bases = [b.probs for _, b in components]
        self.x_sizes = tuple(a.size for a in model.alphabets[: model.terminals])
        self.nx = int(np.prod(self.x_sizes))
        self.measures = list(measures)
        _check_measures(self.measures, self.x_sizes)
        self.D = np.atleast_1d(np.asarray(D, dtype=np.float64))
        if self.D.shape != (len(self.measures),):
            raise InputError(f"Expected {len(self.measures)} distortion targets, got {self.D.size}")
        self.slack = settings.distortion_slack if slack is None else slack
        self.costs = [_cost_matrix(m) for m in self.measures]
        self.total_cost = sum(self.costs)
        self.recon_sizes = tuple(a.size for a in self.measures[0].recon_alphabets)
        self.x_marginals = [
            np.max([b.sum(axis=tuple(a for a in range(b.ndim) if a != m)) for b in self.bases], axis=0)
            for m in range(model.terminals)
        ]
        self.evaluations = 0

    def minimum_distortions(self) -> np.ndarray:
        """Per-measure distortion with the source fully known at the decoder (max over components)."""
        values = []
        for cost in self.costs:
            values.append(max(float(b.reshape(self.nx, -1).sum(axis=1) @ cost.min(axis=1)) for b in self.bases))
        return np.array(values)

    def check_feasible(self) -> None:
        d_min = self.minimum_distortions()
        short = self.D < d_min - self.slack
        if np.any(short):
            k = int(np.flatnonzero(short)[0])
            raise InfeasibleDistortion(
                f"D_{k + 1}={self.D[k]} is below the minimum achievable distortion {d_min[k]:.9f}"
            )

    def compose(self, rows: Sequence[np.ndarray]) -> List[np.ndarray]:
        return [_compose_rows(base, rows) for base in self.bases]

    def evaluate(self, rows: Sequence[np.ndarray], label: str = "") -> Evaluation:
        self.evaluations += 1
        rows = tuple(np.asarray(r, dtype=np.float64) for r in rows)
        components = self.compose(rows)
        mixture = sum(w * c for w, c in zip(self.weights, components))
        best, undefined = _recon_indices(mixture, self.nx, self.total_cost)
        distortions = np.array(
            [
                max(float(np.sum(c.reshape(self.nx, -1) * cost[:, best])) for c in components)
                for cost in self.costs
            ]
        )
        bounds = _bounds([AxisEntropies(c) for c in components], self.layout)
        sz_shape = mixture.shape[self.layout.terminals:]
        recon = _recon_map(best, undefined, sz_shape, self.recon_sizes, self.layout.has_side_info)
        excess = np.maximum(distortions - self.D, 0.0)
        return Evaluation(
            rows=rows,
            recon=recon,
            distortions=distortions,
            bounds=bounds,
            corners=corner_points(bounds, self.layout.terminals),
            violation=float(excess.sum()),
            feasible=bool(np.all(distortions <= self.D + self.slack)),
            label=label,
        )

    def config(self, evaluation: Evaluation) -> AuxConfig:
        channels = tuple(
            Channel(self.model.alphabets[m], Alphabet.range(f"Z{m + 1}", rows.shape[1]), rows)
            for m, rows in enumerate(evaluation.rows)
        )
        return AuxConfig(channels, evaluation.recon, evaluation.label)


@dataclass(frozen=True, eq=False)
class FrontierPoint:
    rates: Tuple[float, ...]
    bounds: Dict[Subset, float]
    distortions: Tuple[float, ...]
    config: AuxConfig


@dataclass(eq=False)
class RegionFrontier:
    """Lower-left minimal corners with their achieving configs. An inner approximation."""

    terminals: int
    targets: Tuple[float, ...]
    points: List[FrontierPoint] = field(default_factory=list)
    inner_approximation: bool = True

    @property
    def corners(self) -> List[Tuple[float, ...]]:
        return [p.rates for p in self.points]

    @property
    def achieving(self) -> List[AuxConfig]:
        return [p.config for p in self.points]

    @property
    def subset_bounds(self) -> List[Dict[Subset, float]]:
        return [p.bounds for p in self.points]

    def min_sum_rate(self) -> float:
        return min(sum(p.rates) for p in self.points)

    def dominates(self, rates: Sequence[float], tol: float = 1e-9) -> bool:
        """True if some corner is componentwise <= rates (within tol)."""
        target = np.asarray(rates)
        return any(np.all(np.asarray(p.rates) <= target + tol) for p in self.points)


def pareto_filter(points: Sequence[FrontierPoint], tol: float = 1e-12) -> List[FrontierPoint]:
    if not points:
        return []
    rates = np.array([p.rates for p in points])
    order = np.lexsort(tuple(rates[:, m] for m in range(rates.shape[1] - 1, -1, -1)) + (rates.sum(axis=1),))
    kept: List[int] = []
    for i in order:
        if not any(np.all(rates[j] <= rates[i] + tol) for j in kept):
            kept.append(int(i))
    kept.sort(key=lambda i: tuple(rates[i]))
    return [points[i] for i in kept]


def _golden(f: Callable[[float], float], lo: float = 0.0, hi: float = 1.0) -> Tuple[float, float]:
    ratio = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = hi - ratio * (hi - lo), lo + ratio * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(GOLDEN_STEPS):
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = hi - ratio * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + ratio * (hi - lo)
            fb = f(b)
    return (a, fa) if fa <= fb else (b, fb)


def _descend(
    problem: RegionProblem, rows: List[np.ndarray], objective: Callable[[Evaluation], float], label: str
) -> Evaluation:
    """Cyclic coordinate descent over channel rows on a penalized objective."""
    current = problem.evaluate(rows, label)
    value = objective(current)

    def trial(m: int, r: int, row: np.ndarray) -> Tuple[float, Evaluation]:
        candidate = [x.copy() for x in rows]
        candidate[m][r] = row
        evaluation = problem.evaluate(candidate, label)
        return objective(evaluation), evaluation

    for _ in range(MAX_SWEEPS):
        start = value
        for m in range(len(rows)):
            size = rows[m].shape[1]
            for r in range(rows[m].shape[0]):
                if size == 1 or problem.x_marginals[m][r] <= 0:
                    continue
                if size == 2:
                    q, _ = _golden(lambda q: trial(m, r, np.array([1.0 - q, q]))[0])
                    candidates = [np.array([1.0 - q, q])]
                    step = None
                else:
                    candidates, step = [], 0.5
                while True:
                    if step is not None:
                        row = rows[m][r]
                        candidates = []
                        for j in range(size):
                            vertex = np.eye(size)[j]
                            candidates.append((1.0 - step) * row + step * vertex)
                            away = row + step * (row - vertex)
                            if np.all(away >= 0):
                                candidates.append(away)
                    scored = [trial(m, r, c) + (c,) for c in candidates]
                    best_value, best_eval, best_row = min(scored, key=lambda t: t[0])
                    if best_value < value - 1e-12:
                        rows[m][r] = best_row
                        value, current = best_value, best_eval
                        if step is None:
                            break
                    elif step is None or step / 2 < MIN_STEP:
                        break
                    else:
                        step /= 2
        if start - value < settings.descent_tolerance:
            break
    return current


def _smoothing_rows(x_sizes: Sequence[int], t: float) -> List[np.ndarray]:
    return [(1.0 - t) * np.eye(k) + t / k for k in x_sizes]


def _structured_seeds(problem: RegionProblem) -> List[Evaluation]:
    seeds = [
        problem.evaluate([np.ones((k, 1)) for k in problem.x_sizes], "constant"),
        problem.evaluate([np.eye(k) for k in problem.x_sizes], "identity"),
    ]
    if seeds[1].feasible:
        lo, hi = 0.0, 1.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if problem.evaluate(_smoothing_rows(problem.x_sizes, mid)).feasible:
                lo = mid
            else:
                hi = mid
        seeds.append(problem.evaluate(_smoothing_rows(problem.x_sizes, lo), f"smoothing(t={lo:.6f})"))
    return seeds


def _restart(problem: RegionProblem, aux_sizes: Sequence[int], seed: int, index: int) -> Evaluation:
    rng = np.random.default_rng([seed, index])
    rows = [rng.dirichlet(np.ones(z), size=k) for k, z in zip(problem.x_sizes, aux_sizes)]
    weights = rng.dirichlet(np.ones(len(aux_sizes))) if len(aux_sizes) > 1 else np.ones(1)
    result = _descend(problem, rows, lambda e: e.objective(weights), f"restart-{index}")
    logger.debug("search_restart_done", restart=index, feasible=result.feasible, corners=result.corners)
    return result


def _search(
    problem: RegionProblem,
    aux_sizes: Optional[Sequence[int]],
    budget: Optional[int],
    seed: int,
    warm_start: Optional[RegionFrontier],
    threads: Optional[int],
) -> RegionFrontier:
    M = problem.layout.terminals
    aux_sizes = (
        tuple(k + settings.aux_extra_symbols for k in problem.x_sizes) if aux_sizes is None else tuple(aux_sizes)
    )
    if len(aux_sizes) != M or any(z < 1 for z in aux_sizes):
        raise InputError(f"Need {M} positive auxiliary sizes, got {list(aux_sizes)}")
    budget = settings.search_restarts if budget is None else budget
    if budget < 0:
        raise InputError("budget must be nonnegative")
    threads = settings.threads if threads is None else threads
    problem.check_feasible()

    pool = _structured_seeds(problem)
    if warm_start is not None:
        for config in {id(p.config): p.config for p in warm_start.points}.values():
            rows = [c.rows for c in config.channels]
            if [r.shape[0] for r in rows] != list(problem.x_sizes):
                raise InputError("Warm-start configs do not match the source alphabets")
            pool.append(problem.evaluate(rows, config.label or "warm-start"))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            pool.extend(executor.map(lambda i: _restart(problem, aux_sizes, seed, i), range(budget)))
    else:
        pool.extend(_restart(problem, aux_sizes, seed, i) for i in range(budget))

    feasible = [e for e in pool if e.feasible]
    if not feasible:
        raise InfeasibleDistortion(f"No searched configuration meets D={problem.D.tolist()}")

    points = []
    for evaluation in feasible:
        config = problem.config(evaluation)
        for rates in evaluation.corners:
            points.append(FrontierPoint(rates, evaluation.bounds, tuple(evaluation.distortions.tolist()), config))
    frontier = RegionFrontier(M, tuple(problem.D.tolist()), pareto_filter(points))
    logger.info(
        "search_region_done",
        restarts=budget,
        feasible=len(feasible),
        corners=len(frontier.points),
        evaluations=problem.evaluations,
    )
    return frontier


def search_region(
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
    D: Sequence[float],
    aux_sizes: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    warm_start: Optional[RegionFrontier] = None,
    threads: Optional[int] = None,
) -> RegionFrontier:
    """Inner approximation of the region of a memoryless model at targets D.

    The pool holds the zero-rate and identity configurations, the
    identity-smoothing channel bisected onto D, any warm-start configs and
    ``budget`` Dirichlet(1) restarts refined by coordinate descent. Recon is
    always ``optimal_recon``. Deterministic under ``seed``.
    """
    if model.kind != SourceKind.IID:
        raise InputError("search_region needs a memoryless model; use mixed_region for mixtures")
    return _search(RegionProblem(model, measures, D), aux_sizes, budget, seed, warm_start, threads)


def mixed_region(
    comp_a: SourceModel,
    comp_b: SourceModel,
    alpha: float,
    measures: Sequence[DistortionMeasure],
    D: Sequence[float],
    aux_sizes: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    warm_start: Optional[RegionFrontier] = None,
    threads: Optional[int] = None,
) -> RegionFrontier:
    if comp_a.kind != SourceKind.IID or comp_b.kind != SourceKind.IID:
        raise InputError("Mixture components must be memoryless")
    model = SourceModel.mixed(alpha, comp_a, comp_b)
    return mixed_model_region(model, measures, D, aux_sizes, budget, seed, warm_start, threads)


def mixed_model_region(
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
    D: Sequence[float],
    aux_sizes: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    warm_start: Optional[RegionFrontier] = None,
    threads: Optional[int] = None,
) -> RegionFrontier:
    if model.kind != SourceKind.MIXED:
        raise InputError("mixed_model_region needs a mixed model")
    return _search(RegionProblem(model, measures, D), aux_sizes, budget, seed, warm_start, threads)


def wyner_ziv(
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
    D: Sequence[float],
    aux_size: Optional[int] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> RegionFrontier:
    if model.terminals != 1 or model.side_info is None:
        raise InputError("Wyner-Ziv needs one terminal and declared side information")
    aux_sizes = None if aux_size is None else (aux_size,)
    if model.kind == SourceKind.MIXED:
        return mixed_model_region(model, measures, D, aux_sizes, budget, seed, None, threads)
    return search_region(model, measures, D, aux_sizes, budget, seed, None, threads)


def wyner_ziv_rate(
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
    D: Sequence[float],
    aux_size: Optional[int] = None,
    budget: Optional[int] = None,
    seed: int = 0,
) -> float:
    """min I(X;Z) - I(Z;S) over searched channels with E[d] <= D."""
    return wyner_ziv(model, measures, D, aux_size, budget, seed).min_sum_rate()


def rate_excess(bounds: Dict[Subset, float], rates: Sequence[float]) -> float:
    """Total amount by which the subset bounds exceed the rate sums."""
    return float(sum(max(value - sum(rates[m] for m in subset), 0.0) for subset, value in bounds.items()))


@dataclass(frozen=True, eq=False)
class DistortionPoint:
    distortions: Tuple[float, ...]
    bounds: Dict[Subset, float]
    config: AuxConfig


@dataclass(eq=False)
class DistortionFrontier:
    """Pareto-minimal distortion vectors achievable at fixed rates. An inner approximation."""

    terminals: int
    rates: Tuple[float, ...]
    points: List[DistortionPoint] = field(default_factory=list)

    def min_distortion(self, k: int = 0) -> float:
        return min(p.distortions[k] for p in self.points)

    def min_total(self) -> float:
        return min(sum(p.distortions) for p in self.points)


def _distortion_pareto(points: Sequence[DistortionPoint], tol: float = 1e-12) -> List[DistortionPoint]:
    kept: List[DistortionPoint] = []
    for point in sorted(points, key=lambda p: (sum(p.distortions), p.distortions)):
        d = np.asarray(point.distortions)
        if not any(np.all(np.asarray(q.distortions) <= d + tol) for q in kept):
            kept.append(point)
    kept.sort(key=lambda p: p.distortions)
    return kept


def distortion_rate(
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
    rates: Sequence[float],
    aux_sizes: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> DistortionFrontier:
    """Smallest distortions reachable by configurations whose subset bounds fit under ``rates``.

    Restarts minimize a Dirichlet-weighted sum of distortions plus a penalty on
    the rate excess. The pool also holds the zero-rate configuration, the
    identity channels when they fit, and the identity-smoothing channel bisected
    onto the rates.
    """
    M = model.terminals
    rates = tuple(float(r) for r in rates)
    if len(rates) != M:
        raise InputError(f"Expected {M} rates, got {len(rates)}")
    if any(r < 0 for r in rates):
        raise InputError(f"Rates must be nonnegative, got {list(rates)}")
    problem = RegionProblem(model, measures, [np.inf] * len(measures))
    aux_sizes = (
        tuple(k + settings.aux_extra_symbols for k in problem.x_sizes) if aux_sizes is None else tuple(aux_sizes)
    )
    if len(aux_sizes) != M or any(z < 1 for z in aux_sizes):
        raise InputError(f"Need {M} positive auxiliary sizes, got {list(aux_sizes)}")
    budget = settings.search_restarts if budget is None else budget
    if budget < 0:
        raise InputError("budget must be nonnegative")
    threads = settings.threads if threads is None else threads
    K = len(problem.measures)

    def fits(evaluation: Evaluation) -> bool:
        return rate_excess(evaluation.bounds, rates) <= problem.slack + 1e-9

    pool = [problem.evaluate([np.ones((k, 1)) for k in problem.x_sizes], "constant")]
    identity = problem.evaluate([np.eye(k) for k in problem.x_sizes], "identity")
    pool.append(identity)
    if not fits(identity):
        lo, hi = 0.0, 1.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if fits(problem.evaluate(_smoothing_rows(problem.x_sizes, mid))):
                hi = mid
            else:
                lo = mid
        pool.append(problem.evaluate(_smoothing_rows(problem.x_sizes, hi), f"smoothing(t={hi:.6f})"))

    def restart(index: int) -> Evaluation:
        rng = np.random.default_rng([seed, index])
        rows = [rng.dirichlet(np.ones(z), size=k) for k, z in zip(problem.x_sizes, aux_sizes)]
        weights = rng.dirichlet(np.ones(K)) if K > 1 else np.ones(1)
        return _descend(
            problem,
            rows,
            lambda e: float(np.dot(weights, e.distortions)) + DISTORTION_PENALTY * rate_excess(e.bounds, rates),
            f"restart-{index}",
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            pool.extend(executor.map(restart, range(budget)))
    else:
        pool.extend(restart(i) for i in range(budget))

    points = [
        DistortionPoint(tuple(e.distortions.tolist()), e.bounds, problem.config(e)) for e in pool if fits(e)
    ]
    frontier = DistortionFrontier(M, rates, _distortion_pareto(points))
    logger.info(
        "distortion_rate_done",
        restarts=budget,
        admissible=len(points),
        points=len(frontier.points),
        evaluations=problem.evaluations,
    )
    return frontier


def slepian_wolf_bounds(model: SourceModel) -> Dict[Subset, float]:
    """Identity-channel subset bounds, i.e. H(X_A | S, X_{A^c}) per nonempty A."""
    if model.kind == SourceKind.EXPLICIT:
        raise InputError("Slepian-Wolf bounds need a memoryless or mixed model")
    layout = Layout(model.terminals, model.side_info is not None)
    sizes = [a.size for a in model.alphabets[: model.terminals]]
    channels = [np.eye(k) for k in sizes]
    hs = [AxisEntropies(_compose_rows(base.probs, channels)) for _, base in model.components()]
    return _bounds(hs, layout)


def identity_config(model: SourceModel, measures: Sequence[DistortionMeasure]) -> AuxConfig:
    """Identity test channels with their optimal recon: the lossless (Slepian-Wolf) configuration."""
    channels = tuple(
        Channel.identity(alphabet, f"Z{m + 1}") for m, alphabet in enumerate(model.alphabets[: model.terminals])
    )
    recon = optimal_recon(compose_with_channels(model, channels), measures)
    return AuxConfig(channels, recon, "identity")
