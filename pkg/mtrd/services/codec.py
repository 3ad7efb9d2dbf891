"""
Monte Carlo simulation of the random quantize-and-bin scheme.

Each terminal quantizes its block with a random codebook drawn from the
n-fold test-channel output law, sends only the bin of the chosen codeword, and
the decoder looks for the unique jointly typical codeword tuple consistent
with the received bins and its side information. Typicality thresholds use
exact single-letter values of the composed component laws.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from math import ceil, exp, log
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binomtest

from mtrd.core.config import settings
from mtrd.core.exceptions import BudgetExceeded, DecoderInconsistent, InputError, SlackRelationViolated
from mtrd.core.logging import get_logger
from mtrd.models.aux_config import AuxConfig, ReconMap
from mtrd.models.distortion import DistortionMeasure
from mtrd.models.pmf import Channel, JointPmf
from mtrd.models.source import SequenceLaw, SourceKind, SourceModel
from mtrd.schemas.experiment import CodecConfig, ErrorStats
from mtrd.services import kernels
from mtrd.services.information import AxisEntropies
from mtrd.services.region import Layout, Subset, all_subsets, compose_components

logger = get_logger(__name__)

CODEBOOK_STREAM = 1
BIN_STREAM = 2
MAX_BINS = 2**62
THRESHOLD_SLACK = 1e-12


def _stream(seed: int, n: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n, *key]))


def check_slack_relation(config: CodecConfig) -> None:
    """gamma2 = gamma3 = gamma4 < gamma1 / 6."""
    if not config.enforce_slack_relation:
        return
    if not (config.gamma2 == config.gamma3 == config.gamma4 and config.gamma2 < config.gamma1 / 6):
        raise SlackRelationViolated(
            f"Slacks must satisfy gamma2 = gamma3 = gamma4 < gamma1/6, got "
            f"{config.gamma1}, {config.gamma2}, {config.gamma3}, {config.gamma4}"
        )


def codebook_size(n: int, info: float, gamma2: float) -> int:
    exponent = n * (info + gamma2)
    if exponent > log(settings.max_codebook_size) + 1e-12:
        raise BudgetExceeded(
            f"Codebook of e^{exponent:.3f} words exceeds the limit of {settings.max_codebook_size}"
        )
    return max(1, ceil(exp(exponent)))


def bin_count(n: int, rate: float, gamma1: float) -> int:
    """L = ceil(e^{n(R + gamma1)}), capped where bins are effectively injective."""
    exponent = n * (rate + gamma1)
    if exponent >= log(MAX_BINS):
        return MAX_BINS
    return max(1, ceil(exp(exponent)))


def _log_table(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(values)
    return out


def _clean(table: np.ndarray) -> np.ndarray:
    table = np.where(np.isnan(table), -np.inf, table)
    return np.ascontiguousarray(table.ravel())


@dataclass(frozen=True, eq=False)
class Codebook:
    terminal: int
    n: int
    words: np.ndarray
    weights: np.ndarray
    offsets: np.ndarray
    info: float
    gamma2: float
    floor_info: Optional[float] = None

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def threshold(self) -> float:
        floor = self.info if self.floor_info is None else self.floor_info
        return self.n * (floor - self.gamma2) - THRESHOLD_SLACK

    def encode(self, x: np.ndarray) -> int:
        """First codeword whose information density with x clears I - gamma2; -1 if none."""
        return int(
            kernels.first_covering_codeword(
                self.words, np.ascontiguousarray(x, dtype=np.int64), self.weights, self.offsets, self.threshold
            )
        )


def mixed_log_prob(words: np.ndarray, log_pz: np.ndarray, log_weights: np.ndarray) -> np.ndarray:
    """ln P_Z^n(z) per row under the weighted mixture of i.i.d. laws with letter tables ``log_pz``."""
    words = np.ascontiguousarray(words)
    scores = np.stack([kernels.word_scores(words, np.ascontiguousarray(row)) for row in log_pz])
    if scores.shape[0] == 1:
        return scores[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(scores + log_weights[:, None], axis=0)


def build_quantizer(
    channel: Channel,
    p_x: np.ndarray,
    n: int,
    gamma2: float,
    seed: int,
    terminal: int = 0,
    mixture: Optional[Sequence[float]] = None,
) -> Codebook:
    """Draw ceil(e^{n(I(X;Z)+gamma2)}) codewords from P_Z^n.

    ``p_x`` is one input law, or one row per mixture component together with
    the component weights in ``mixture``. A mixture sizes the codebook by its largest
    component I(X;Z), sets the covering threshold from its smallest, and draws
    each codeword from a component picked by weight.
    """
    if n > settings.max_blocklength:
        raise BudgetExceeded(f"Blocklength {n} exceeds the limit of {settings.max_blocklength}")
    z_size = channel.output.size
    if z_size > 255 or z_size**n >= 2**63:
        raise BudgetExceeded(f"Words over {z_size} symbols at n={n} do not fit the codeword index")
    p_x = np.atleast_2d(np.asarray(p_x, dtype=np.float64))
    mix = np.ones(1) if mixture is None else np.asarray(mixture, dtype=np.float64)
    if mix.shape != (p_x.shape[0],):
        raise InputError(f"Expected {p_x.shape[0]} component weights, got {mix.size}")
    joints = p_x[:, :, None] * channel.rows[None, :, :]
    p_z = joints.sum(axis=1)
    infos = [AxisEntropies(joint).mutual((0,), (1,)) for joint in joints]
    info = max(infos)
    size = codebook_size(n, info, gamma2)

    rng = _stream(seed, n, CODEBOOK_STREAM, terminal)
    if mix.size == 1:
        words = rng.choice(z_size, size=(size, n), p=p_z[0]).astype(np.uint8)
    else:
        picks = rng.choice(mix.size, size=size, p=mix / mix.sum())
        words = np.empty((size, n), dtype=np.uint8)
        for c in range(mix.size):
            rows = picks == c
            words[rows] = rng.choice(z_size, size=(int(rows.sum()), n), p=p_z[c])

    log_rows = _log_table(channel.rows)
    offsets = -mixed_log_prob(words, _log_table(p_z), _log_table(mix / mix.sum()))
    logger.debug("build_quantizer", terminal=terminal, n=n, size=size, info=info, components=mix.size)
    return Codebook(terminal, n, words, log_rows, np.ascontiguousarray(offsets), info, gamma2, min(infos))


@dataclass(frozen=True, eq=False)
class BinMap:
    """Uniform bins in [1, L] drawn once per distinct codeword."""

    terminal: int
    L: int
    base: int
    assignment: np.ndarray
    unique_words: np.ndarray
    unique_keys: np.ndarray
    unique_bins: np.ndarray
    slot_of: np.ndarray
    _order: np.ndarray
    _sorted_bins: np.ndarray

    def members(self, bin_index: int) -> np.ndarray:
        """Distinct-word slots whose bin is ``bin_index``."""
        lo = np.searchsorted(self._sorted_bins, bin_index, side="left")
        hi = np.searchsorted(self._sorted_bins, bin_index, side="right")
        return self._order[lo:hi]

    def bin_of(self, word: np.ndarray) -> int:
        """Bin of a codeword; 0 if the word is not in the codebook."""
        key = kernels.word_keys(np.ascontiguousarray(np.asarray(word)[None, :]), self.base)[0]
        slot = int(np.searchsorted(self.unique_keys, key))
        if slot < self.unique_keys.size and self.unique_keys[slot] == key:
            return int(self.unique_bins[slot])
        return 0


def assign_bins(codebook: Codebook, rate: float, gamma1: float, seed: int) -> BinMap:
    if rate < 0:
        raise InputError(f"Rates must be nonnegative, got {rate}")
    L = bin_count(codebook.n, rate, gamma1)
    base = int(codebook.weights.shape[1])
    keys = kernels.word_keys(codebook.words, base)
    unique_keys, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    rng = _stream(seed, codebook.n, BIN_STREAM, codebook.terminal)
    unique_bins = rng.integers(1, L, size=first.size, endpoint=True, dtype=np.int64)
    order = np.argsort(unique_bins, kind="stable")
    return BinMap(
        terminal=codebook.terminal,
        L=L,
        base=base,
        assignment=unique_bins[inverse],
        unique_words=codebook.words[first],
        unique_keys=unique_keys,
        unique_bins=unique_bins,
        slot_of=inverse,
        _order=order,
        _sorted_bins=unique_bins[order],
    )


class TypicalityTester:
    """Membership tests for the decoder's typical sets over (s, z_1..z_M).

    Block statistics are evaluated under the n-fold law of the source, which
    for a mixture is the weighted sum of the component i.i.d. laws. Per-terminal
    cutoffs take the largest component value, subset cutoffs the smallest.
    """

    def __init__(self, components: Sequence[Tuple[float, JointPmf]], config: CodecConfig):
        if not components:
            raise InputError("The typicality tester needs at least one component")
        first = components[0][1]
        layout = Layout.of(len(first.variables))
        self.layout = layout
        M = layout.terminals
        x_axes = tuple(range(M))
        mix = np.array([w for w, _ in components], dtype=np.float64)
        self.weights = mix / mix.sum()
        self.log_weights = _log_table(self.weights)
        tables = [composed.probs for _, composed in components]

        def marginal(probs: np.ndarray, keep: Sequence[int], keepdims: bool = False) -> np.ndarray:
            drop = tuple(a for a in range(probs.ndim) if a not in keep)
            return probs.sum(axis=drop, keepdims=keepdims) if drop else probs

        self.x_marginals = [np.stack([marginal(p, (m,)) for p in tables]) for m in range(M)]
        szs = [p.sum(axis=x_axes) for p in tables]
        self.shape = szs[0].shape
        off = 1 if layout.has_side_info else 0
        all_axes = tuple(range(len(self.shape)))

        self.info = np.array(
            [max(AxisEntropies(p).mutual((m,), (layout.z_axis(m),)) for p in tables) for m in range(M)]
        )
        self.log_pz = [np.stack([_log_table(marginal(sz, (off + m,))) for sz in szs]) for m in range(M)]
        self.t20 = self.info + 2.0 * config.gamma2

        entropies = [AxisEntropies(sz) for sz in szs]
        self._tables: Dict[Tuple[int, ...], np.ndarray] = {}
        self._subsets: Dict[Subset, Tuple[Tuple[int, ...], Tuple[int, ...]]] = {}
        self.multi_cutoff: Dict[Subset, float] = {}
        self.coupling_cutoff: Dict[Subset, float] = {}
        for subset in all_subsets(M):
            zb = tuple(off + m for m in subset)
            rest = tuple(a for a in all_axes if a not in zb)
            self._subsets[subset] = (zb, rest)
            for axes in [zb, rest, all_axes] + [(a,) for a in zb]:
                if axes not in self._tables:
                    self._tables[axes] = np.stack(
                        [
                            _clean(np.broadcast_to(_log_table(marginal(sz, axes, keepdims=True)), self.shape))
                            for sz in szs
                        ]
                    )
            self.multi_cutoff[subset] = min(h.multi([(a,) for a in zb]) for h in entropies) - config.gamma3
            self.coupling_cutoff[subset] = min(h.mutual(zb, rest) for h in entropies) - config.gamma4

    def _mix(self, scores: np.ndarray) -> np.ndarray:
        if scores.shape[0] == 1:
            return scores[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return logsumexp(scores + self.log_weights[:, None], axis=0)

    def single_pass(self, m: int, words: np.ndarray) -> np.ndarray:
        """-(1/n) ln P_Z^n(z) <= I(X_m;Z_m) + 2 gamma2 for each row of ``words``."""
        n = words.shape[1]
        log_prob = mixed_log_prob(words, self.log_pz[m], self.log_weights)
        return -log_prob / n <= self.t20[m] + THRESHOLD_SLACK

    def joint_pass(self, s: Optional[np.ndarray], tuples: np.ndarray) -> np.ndarray:
        """Every subset inequality for candidate tuples of shape (T, n, M)."""
        count, n, M = tuples.shape
        index = [tuples[:, :, m].astype(np.int64) for m in range(M)]
        if self.layout.has_side_info:
            index = [np.broadcast_to(np.asarray(s, dtype=np.int64), (count, n))] + index
        cells = np.ascontiguousarray(np.ravel_multi_index(tuple(index), self.shape))
        log_prob = {
            axes: self._mix(np.stack([kernels.cell_scores(cells, table) for table in stacked]))
            for axes, stacked in self._tables.items()
        }
        ok = np.ones(count, dtype=bool)
        full = tuple(range(len(self.shape)))
        with np.errstate(invalid="ignore"):
            for subset, (zb, rest) in self._subsets.items():
                multi = log_prob[zb] - sum(log_prob[(a,)] for a in zb)
                coupling = log_prob[full] - log_prob[zb] - log_prob[rest]
                ok &= multi / n >= self.multi_cutoff[subset] - THRESHOLD_SLACK
                ok &= coupling / n >= self.coupling_cutoff[subset] - THRESHOLD_SLACK
        return ok


class DecodeStatus(str, Enum):
    UNIQUE = "unique"
    ZERO = "zero"
    MULTIPLE = "multiple"


@dataclass(frozen=True, eq=False)
class DecodeResult:
    status: DecodeStatus
    z: Optional[np.ndarray]
    candidates: int


def decode(
    s: Optional[np.ndarray],
    bins: Sequence[int],
    binmaps: Sequence[BinMap],
    tester: TypicalityTester,
    single_ok: Sequence[np.ndarray],
    tuple_cap: Optional[int] = None,
) -> DecodeResult:
    """Unique tuple of distinct codewords in the received bins that is jointly typical with s.

    ``single_ok[m]`` flags which distinct words of terminal m pass the
    per-terminal test; it is computed once per code.
    """
    tuple_cap = settings.tuple_cap if tuple_cap is None else tuple_cap
    words = []
    for m, (b, binmap) in enumerate(zip(bins, binmaps)):
        slots = binmap.members(int(b))
        slots = slots[single_ok[m][slots]]
        if slots.size == 0:
            return DecodeResult(DecodeStatus.ZERO, None, 0)
        words.append(binmap.unique_words[slots])

    counts = [w.shape[0] for w in words]
    total = int(np.prod(counts))
    if total > tuple_cap:
        raise BudgetExceeded(f"{total} candidate tuples exceed the cap of {tuple_cap}")
    grid = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    tuples = np.stack([w[g.ravel()] for w, g in zip(words, grid)], axis=-1)
    survivors = np.flatnonzero(tester.joint_pass(s, tuples))
    if survivors.size == 1:
        return DecodeResult(DecodeStatus.UNIQUE, tuples[survivors[0]].astype(np.int64), total)
    status = DecodeStatus.ZERO if survivors.size == 0 else DecodeStatus.MULTIPLE
    return DecodeResult(status, None, total)


@dataclass(frozen=True)
class TrialOutcome:
    error: bool
    status: DecodeStatus
    quantizer_failure: bool
    typicality_failure: bool
    t1_violation: bool
    distortions: np.ndarray


class BinningCode:
    """Codebooks, bins and decoder for one (model, aux config, blocklength, seed)."""

    def __init__(
        self,
        config: CodecConfig,
        model: SourceModel,
        measures: Sequence[DistortionMeasure],
        D: Sequence[float],
        aux: AuxConfig,
    ):
        if model.kind == SourceKind.EXPLICIT:
            raise InputError("The binning simulator needs a memoryless or mixed model")
        M = model.terminals
        if len(config.rates) != M or len(aux.channels) != M:
            raise InputError(f"Expected {M} rates and test channels")
        self.D = np.atleast_1d(np.asarray(D, dtype=np.float64))
        if self.D.shape != (len(measures),):
            raise InputError(f"Expected {len(measures)} distortion targets, got {self.D.size}")
        if any(not m.additive for m in measures):
            raise InputError("Block distortion needs additive measures")
        check_slack_relation(config)

        self.config = config
        self.model = model
        self.measures = list(measures)
        self.recon: ReconMap = aux.recon
        self.law = SequenceLaw(model, config.n)
        self.tester = TypicalityTester(compose_components(model, aux.channels), config)
        self.codebooks = [
            build_quantizer(
                channel, self.tester.x_marginals[m], config.n, config.gamma2, config.seed, m, self.tester.weights
            )
            for m, channel in enumerate(aux.channels)
        ]
        self.binmaps = [
            assign_bins(cb, rate, config.gamma1, config.seed) for cb, rate in zip(self.codebooks, config.rates)
        ]
        self.single_ok = [self.tester.single_pass(m, bm.unique_words) for m, bm in enumerate(self.binmaps)]
        self.cutoffs = self.D + config.gamma1
        self.any_finite = bool(np.any(np.isfinite(self.D)))

    @property
    def terminals(self) -> int:
        return self.model.terminals

    def _distortions(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.array([float(m.block(x, y)) for m in self.measures])

    def check_decoded(self, s: Optional[np.ndarray], bins: Sequence[int], z: np.ndarray) -> None:
        """A unique decode must sit in the received bins and pass every typicality test."""
        for m, binmap in enumerate(self.binmaps):
            if binmap.bin_of(z[:, m]) != bins[m]:
                raise DecoderInconsistent(f"Decoded word of terminal {m + 1} is not in bin {bins[m]}")
            if not self.tester.single_pass(m, np.ascontiguousarray(z[None, :, m])).item():
                raise DecoderInconsistent(f"Decoded word of terminal {m + 1} fails the per-terminal test")
        if not self.tester.joint_pass(s, z[None]).item():
            raise DecoderInconsistent("Decoded tuple fails the joint typicality test")

    def run_trial(self, index: int) -> TrialOutcome:
        n, M = self.config.n, self.terminals
        rng = _stream(self.config.seed, n, index)
        block = self.law.sample(rng, 1)[0]
        x = block[:, :M]
        s = block[:, M] if self.model.side_info is not None else None

        chosen, bins, quantizer_failure = [], [], False
        for m, (codebook, binmap) in enumerate(zip(self.codebooks, self.binmaps)):
            i = codebook.encode(x[:, m])
            if i < 0:
                quantizer_failure, i = True, 0
            chosen.append(codebook.words[i])
            bins.append(int(binmap.assignment[i]))
        z_true = np.stack(chosen, axis=-1).astype(np.int64)

        d_true = self._distortions(x, self.recon.apply(z_true, s))
        t1_violation = bool(np.any(d_true > self.cutoffs))
        typical = all(
            self.tester.single_pass(m, np.ascontiguousarray(z_true[None, :, m])).item() for m in range(M)
        ) and bool(self.tester.joint_pass(s, z_true[None]).item())

        result = decode(s, bins, self.binmaps, self.tester, self.single_ok)
        if result.status == DecodeStatus.UNIQUE:
            self.check_decoded(s, bins, result.z)
            y = self.recon.apply(result.z, s)
        else:
            y = np.zeros((n, M), dtype=np.int64)
        distortions = self._distortions(x, y)
        failed = result.status != DecodeStatus.UNIQUE
        error = bool(np.any(distortions > self.cutoffs)) or (failed and self.any_finite)
        return TrialOutcome(error, result.status, quantizer_failure, not typical, t1_violation, distortions)


def summarize(n: int, outcomes: Sequence[TrialOutcome], K: int) -> ErrorStats:
    trials = len(outcomes)
    errors = sum(o.error for o in outcomes)
    interval = binomtest(errors, trials).proportion_ci(confidence_level=0.95, method="wilson")
    distortions = np.array([o.distortions for o in outcomes]).reshape(trials, K)
    zero = sum(o.status == DecodeStatus.ZERO for o in outcomes)
    multiple = sum(o.status == DecodeStatus.MULTIPLE for o in outcomes)
    return ErrorStats(
        n=n,
        trials=trials,
        errors=errors,
        p_error=errors / trials,
        ci_low=float(interval.low),
        ci_high=float(interval.high),
        ci_halfwidth=float(interval.high - interval.low) / 2.0,
        decode_failures=zero + multiple,
        decode_zero=zero,
        decode_multiple=multiple,
        quantizer_failures=sum(o.quantizer_failure for o in outcomes),
        typicality_failures=sum(o.typicality_failure for o in outcomes),
        t1_violations=sum(o.t1_violation for o in outcomes),
        mean_distortion=distortions.mean(axis=0).tolist(),
        max_distortion=distortions.max(axis=0).tolist(),
    )


def run_experiment(
    config: CodecConfig,
    model: SourceModel,
    measures: Sequence[DistortionMeasure],
    D: Sequence[float],
    aux: AuxConfig,
) -> ErrorStats:
    """Sample, quantize, bin, decode and measure ``config.trials`` times.

    Trial i draws its source block from SeedSequence((seed, n, i)), so results
    do not depend on the number of worker threads.
    """
    code = BinningCode(config, model, measures, D, aux)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes: List[TrialOutcome] = list(pool.map(code.run_trial, range(config.trials)))
    else:
        outcomes = [code.run_trial(i) for i in range(config.trials)]
    stats = summarize(config.n, outcomes, len(code.measures))
    logger.info(
        "experiment_done",
        n=config.n,
        trials=config.trials,
        p_error=stats.p_error,
        decode_failures=stats.decode_failures,
        quantizer_failures=stats.quantizer_failures,
    )
    return stats


def quantizer_failure_rate(
    channel: Channel,
    p_x: np.ndarray,
    n: int,
    gamma2: float,
    samples: int,
    seed: int = 0,
) -> float:
    """Fraction of i.i.d. P_X blocks for which no codeword clears the density threshold."""
    codebook = build_quantizer(channel, p_x, n, gamma2, seed)
    rng = _stream(seed, n, 0)
    blocks = rng.choice(p_x.size, size=(samples, n), p=np.asarray(p_x) / np.sum(p_x))
    failures = sum(codebook.encode(block) < 0 for block in blocks)
    return failures / samples
