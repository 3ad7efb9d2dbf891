"""
Binning-simulator tests for mtrd
"""
import math

import numpy as np
import pytest
from scipy.stats import chisquare

from mtrd.core.exceptions import BudgetExceeded, DecoderInconsistent, InputError, SlackRelationViolated
from mtrd.models import Channel, SourceModel, hamming_measures
from mtrd.schemas.experiment import CodecConfig
from mtrd.services.codec import (
    BinningCode,
    DecodeStatus,
    TypicalityTester,
    assign_bins,
    bin_count,
    build_quantizer,
    check_slack_relation,
    codebook_size,
    mixed_log_prob,
    quantizer_failure_rate,
    run_experiment,
)
from mtrd.services.region import compose_components, identity_config, slepian_wolf_bounds

LOOSE = dict(gamma1=0.12, gamma2=0.15, gamma3=0.30, gamma4=0.30, enforce_slack_relation=False)


def dsbs_setup(dsbs, margin: float):
    model = dsbs(0.11)
    measures = list(hamming_measures(model.alphabets))
    bounds = slepian_wolf_bounds(model)
    # corner point (H(X1|X2), H(X2)) pushed out by the margin
    rates = [bounds[(0,)] + margin, bounds[(0, 1)] - bounds[(0,)] + margin]
    return model, measures, rates, identity_config(model, measures)


class TestSlacks:
    """Test slack bookkeeping and code sizes"""

    def test_default_slacks_satisfy_relation(self):
        check_slack_relation(CodecConfig(n=8, rates=[0.5]))

    def test_relation_violation(self):
        with pytest.raises(SlackRelationViolated):
            check_slack_relation(CodecConfig(n=8, rates=[0.5], gamma1=0.12, gamma2=0.03, gamma3=0.03, gamma4=0.03))
        check_slack_relation(CodecConfig(n=8, rates=[0.5], **LOOSE))

    def test_sizes(self):
        assert codebook_size(8, math.log(2), 0.015) == math.ceil(math.exp(8 * (math.log(2) + 0.015)))
        assert bin_count(10, 0.3, 0.12) == math.ceil(math.exp(10 * (0.3 + 0.12)))
        with pytest.raises(BudgetExceeded):
            codebook_size(24, math.log(2), 0.015)

    def test_rates_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            CodecConfig(n=8, rates=[-0.1])


class TestQuantizer:
    """Test codebook generation and covering"""

    def test_codebook_is_seeded(self):
        channel = Channel.bsc(0.2)
        p_x = np.array([0.5, 0.5])
        a = build_quantizer(channel, p_x, 10, 0.015, seed=4)
        b = build_quantizer(channel, p_x, 10, 0.015, seed=4)
        c = build_quantizer(channel, p_x, 10, 0.015, seed=5)
        np.testing.assert_array_equal(a.words, b.words)
        assert not np.array_equal(a.words, c.words)
        assert a.size == codebook_size(10, a.info, 0.015)

    def test_identity_encoder_finds_exact_match(self):
        channel = Channel.identity(Channel.bsc(0.1).input, "Z1")
        codebook = build_quantizer(channel, np.array([0.5, 0.5]), 6, 0.3, seed=0)
        x = codebook.words[3].astype(np.int64)
        i = codebook.encode(x)
        assert 0 <= i <= 3
        np.testing.assert_array_equal(codebook.words[i], x)

    def test_failure_decreases_with_blocklength(self):
        channel = Channel.bsc(0.2)
        p_x = np.array([0.5, 0.5])
        rates = [quantizer_failure_rate(channel, p_x, n, 0.015, samples=2000, seed=1) for n in (8, 12, 16)]
        assert rates[0] > rates[1] > rates[2]

    def test_large_slack_covers(self):
        rate = quantizer_failure_rate(Channel.bsc(0.2), np.array([0.5, 0.5]), 12, 0.4, samples=2000, seed=1)
        assert rate < 0.01

    def test_blocklength_limit(self):
        with pytest.raises(BudgetExceeded):
            build_quantizer(Channel.bsc(0.2), np.array([0.5, 0.5]), 25, 0.015, seed=0)


class TestBinning:
    """Test bin assignment"""

    def test_bins_in_range_and_shared_by_duplicates(self):
        codebook = build_quantizer(Channel.bsc(0.3), np.array([0.5, 0.5]), 4, 0.5, seed=2)
        binmap = assign_bins(codebook, 0.2, 0.12, seed=2)
        assert binmap.assignment.min() >= 1
        assert binmap.assignment.max() <= binmap.L
        keys = [tuple(w) for w in codebook.words]
        for i, j in [(i, j) for i in range(len(keys)) for j in range(i) if keys[i] == keys[j]][:50]:
            assert binmap.assignment[i] == binmap.assignment[j]

    def test_members_inverts_assignment(self):
        codebook = build_quantizer(Channel.bsc(0.1), np.array([0.5, 0.5]), 8, 0.2, seed=3)
        binmap = assign_bins(codebook, 0.1, 0.12, seed=3)
        for b in np.unique(binmap.unique_bins)[:20]:
            slots = binmap.members(int(b))
            assert np.all(binmap.unique_bins[slots] == b)
            assert slots.size == int(np.sum(binmap.unique_bins == b))

    def test_bins_are_uniform(self):
        channel = Channel.identity(Channel.bsc(0.1).input, "Z1")
        codebook = build_quantizer(channel, np.array([0.5, 0.5]), 12, 0.05, seed=9)
        binmap = assign_bins(codebook, 0.0, 0.12, seed=9)
        counts = np.bincount(binmap.unique_bins, minlength=binmap.L + 1)[1:]
        assert chisquare(counts).pvalue > 1e-3


class TestBinningCode:
    """Test trials, decoding and error accounting"""

    def test_lossless_success_means_zero_distortion(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.3)
        code = BinningCode(CodecConfig(n=6, rates=rates, seed=11, **LOOSE), model, measures, [0.0, 0.0], aux)
        outcomes = [code.run_trial(i) for i in range(100)]
        for outcome in outcomes:
            if not outcome.error:
                assert outcome.status == DecodeStatus.UNIQUE
                assert np.all(outcome.distortions == 0.0)
        assert any(not o.error for o in outcomes)

    def test_accounting_identity(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.15)
        stats = run_experiment(CodecConfig(n=8, rates=rates, trials=150, seed=3, **LOOSE), model, measures, [0, 0], aux)
        assert stats.trials == 150
        assert stats.errors <= (
            stats.quantizer_failures + stats.t1_violations + stats.typicality_failures + stats.decode_failures
        )
        assert stats.decode_failures == stats.decode_zero + stats.decode_multiple
        assert stats.ci_low <= stats.p_error <= stats.ci_high
        assert len(stats.mean_distortion) == 2

    def test_infinite_targets_never_fail(self, dsbs):
        model, measures, _, aux = dsbs_setup(dsbs, 0.0)
        config = CodecConfig(n=6, rates=[0.0, 0.0], trials=40, seed=1, **LOOSE)
        stats = run_experiment(config, model, measures, [math.inf, math.inf], aux)
        assert stats.p_error == 0.0

    def test_seed_and_threads(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.15)
        base = dict(n=8, rates=rates, trials=60, seed=21, **LOOSE)
        serial = run_experiment(CodecConfig(threads=1, **base), model, measures, [0, 0], aux)
        again = run_experiment(CodecConfig(threads=1, **base), model, measures, [0, 0], aux)
        parallel = run_experiment(CodecConfig(threads=4, **base), model, measures, [0, 0], aux)
        assert serial == again
        assert serial == parallel

    def test_single_trial_smoke(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.15)
        stats = run_experiment(CodecConfig(n=4, rates=rates, trials=1, **LOOSE), model, measures, [0, 0], aux)
        assert stats.trials == 1
        assert stats.errors in (0, 1)

    def test_input_checks(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.15)
        with pytest.raises(InputError):
            BinningCode(CodecConfig(n=6, rates=rates[:1], **LOOSE), model, measures, [0, 0], aux)
        with pytest.raises(InputError):
            BinningCode(CodecConfig(n=6, rates=rates, **LOOSE), model, measures, [0], aux)

    def test_side_information_decoding(self, side_info_model):
        model = side_info_model(0.05)
        measures = list(hamming_measures(model.alphabets[:1]))
        aux = identity_config(model, measures)
        rate = slepian_wolf_bounds(model)[(0,)] + 0.3
        stats = run_experiment(
            CodecConfig(n=8, rates=[rate], trials=100, seed=2, **LOOSE), model, measures, [0.0], aux
        )
        assert stats.p_error < 0.5

    def test_unique_decodes_are_consistent(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.15)
        code = BinningCode(CodecConfig(n=8, rates=rates, seed=5, **LOOSE), model, measures, [0.0, 0.0], aux)
        outcomes = [code.run_trial(i) for i in range(300)]
        assert sum(o.status == DecodeStatus.UNIQUE for o in outcomes) > 0

        z = np.stack([bm.unique_words[0] for bm in code.binmaps], axis=-1).astype(np.int64)
        with pytest.raises(DecoderInconsistent):
            code.check_decoded(None, [0, 0], z)

    def test_bin_lookup_matches_assignment(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.15)
        code = BinningCode(CodecConfig(n=8, rates=rates, seed=6, **LOOSE), model, measures, [0.0, 0.0], aux)
        codebook, binmap = code.codebooks[0], code.binmaps[0]
        for i in range(0, codebook.size, max(1, codebook.size // 50)):
            assert binmap.bin_of(codebook.words[i]) == binmap.assignment[i]

    def test_extra_rate_does_not_add_decode_failures(self, dsbs):
        model, measures, rates, aux = dsbs_setup(dsbs, 0.1)
        base = dict(n=8, trials=300, seed=13, **LOOSE)
        tight = run_experiment(CodecConfig(rates=rates, **base), model, measures, [0.0, 0.0], aux)
        loose = run_experiment(
            CodecConfig(rates=[r + 0.1 for r in rates], **base), model, measures, [0.0, 0.0], aux
        )
        assert loose.quantizer_failures == tight.quantizer_failures
        assert (
            loose.decode_failures / loose.trials
            <= tight.decode_failures / tight.trials + tight.ci_halfwidth + loose.ci_halfwidth
        )


MIXED_SLACKS = dict(gamma1=0.12, gamma2=0.3, gamma3=0.3, gamma4=0.3, enforce_slack_relation=False)


class TestMixedSources:
    """Test the simulator on two-component mixtures"""

    def test_codebook_sized_by_hardest_component(self, mixed_bern, h_b):
        measures = list(hamming_measures(mixed_bern.alphabets))
        aux = identity_config(mixed_bern, measures)
        config = CodecConfig(n=12, rates=[1.5], seed=0, **MIXED_SLACKS)
        code = BinningCode(config, mixed_bern, measures, [0.0], aux)
        codebook = code.codebooks[0]
        assert codebook.info == pytest.approx(h_b(0.4), abs=1e-12)
        assert codebook.floor_info == pytest.approx(h_b(0.1), abs=1e-12)
        assert codebook.size == codebook_size(12, h_b(0.4), 0.3)
        assert code.tester.t20[0] == pytest.approx(h_b(0.4) + 0.6, abs=1e-12)

    def test_subset_cutoffs_take_the_weaker_component(self, dsbs, h_b):
        model = SourceModel.mixed(0.5, dsbs(0.05), dsbs(0.2))
        channels = [Channel.identity(a, f"Z{m + 1}") for m, a in enumerate(model.alphabets)]
        tester = TypicalityTester(compose_components(model, channels), CodecConfig(n=8, rates=[1.0, 1.0], **LOOSE))
        np.testing.assert_allclose(tester.info, [math.log(2), math.log(2)], atol=1e-12)
        assert tester.multi_cutoff[(0, 1)] == pytest.approx(math.log(2) - h_b(0.2) - 0.3, abs=1e-12)
        np.testing.assert_allclose(tester.weights, [0.5, 0.5])

    def test_block_probability_is_a_mixture(self, mixed_bern):
        measures = list(hamming_measures(mixed_bern.alphabets))
        aux = identity_config(mixed_bern, measures)
        config = CodecConfig(n=12, rates=[1.0], **LOOSE)
        tester = TypicalityTester(compose_components(mixed_bern, aux.channels), config)
        words = np.array([[1] * 12, [0] * 12, [1, 0] * 6], dtype=np.uint8)
        expected = [
            math.log(0.5 * 0.1**k * 0.9 ** (12 - k) + 0.5 * 0.4**k * 0.6 ** (12 - k)) for k in (12, 0, 6)
        ]
        np.testing.assert_allclose(mixed_log_prob(words, tester.log_pz[0], tester.log_weights), expected, rtol=1e-12)
        np.testing.assert_array_equal(tester.single_pass(0, words), -np.array(expected) / 12 <= tester.t20[0])

    def test_mixture_decodes_like_its_components(self, mixed_bern):
        measures = list(hamming_measures(mixed_bern.alphabets))
        aux = identity_config(mixed_bern, measures)
        config = CodecConfig(n=12, rates=[1.5], trials=300, seed=0, **MIXED_SLACKS)
        stats = run_experiment(config, mixed_bern, measures, [0.0], aux)
        assert stats.trials == 300
        assert stats.p_error < 0.1
