"""
Rate-region tests for mtrd
"""
import time

import numpy as np
import pytest

from mtrd.core.exceptions import EmptySubset, InfeasibleDistortion, InputError
from mtrd.models import Alphabet, Channel, DistortionMeasure, ReconMap, hamming_measures, make_channel
from mtrd.services.blahut import distortion_range, rate_distortion, rate_distortion_curve, source_rate_distortion
from mtrd.services.region import (
    compose_with_channels,
    corner_points,
    distortion_rate,
    expected_distortion,
    identity_config,
    mixed_region,
    optimal_recon,
    rate_excess,
    search_region,
    slepian_wolf_bounds,
    subset_bound,
    wyner_ziv,
    wyner_ziv_rate,
)

BUDGET = 8


class TestSubsetBounds:
    """Test single-letter subset bounds and corner points"""

    def test_identity_channels_give_conditional_entropies(self, dsbs, h_b):
        model = dsbs(0.11)
        composed = compose_with_channels(model, [Channel.identity(a) for a in model.alphabets])
        assert subset_bound(composed, [1]) == pytest.approx(h_b(0.11), abs=1e-12)
        assert subset_bound(composed, [2]) == pytest.approx(h_b(0.11), abs=1e-12)
        assert subset_bound(composed, [1, 2]) == pytest.approx(np.log(2) + h_b(0.11), abs=1e-12)

    def test_bad_subsets(self, dsbs):
        model = dsbs(0.11)
        composed = compose_with_channels(model, [Channel.identity(a) for a in model.alphabets])
        with pytest.raises(EmptySubset):
            subset_bound(composed, [])
        with pytest.raises(InputError):
            subset_bound(composed, [3])

    def test_corner_points(self):
        corners = corner_points({(0,): 1.0, (1,): 1.0, (0, 1): 3.0}, 2)
        assert sorted(corners) == [(1.0, 2.0), (2.0, 1.0)]

    def test_slepian_wolf_bounds(self, dsbs, h_b):
        bounds = slepian_wolf_bounds(dsbs(0.11))
        assert bounds[(0,)] == pytest.approx(h_b(0.11), abs=1e-12)
        assert bounds[(0, 1)] == pytest.approx(np.log(2) + h_b(0.11), abs=1e-12)

    def test_slepian_wolf_bounds_mixed(self, mixed_bern, h_b):
        bounds = slepian_wolf_bounds(mixed_bern)
        assert bounds[(0,)] == pytest.approx(h_b(0.4), abs=1e-12)


class TestReconstruction:
    """Test optimal single-letter reconstruction"""

    def test_constant_channel_ties_pick_lowest_symbol(self, bern):
        model = bern(0.5)
        composed = compose_with_channels(model, [Channel.constant(model.alphabets[0], "Z1")])
        recon = optimal_recon(composed, hamming_measures(model.alphabets))
        assert recon.table.ravel().tolist() == [0]

    def test_unused_cells_flagged(self, bern):
        model = bern(0.3)
        channel = make_channel(model.alphabets[0], Alphabet.range("Z1", 3), [[1, 0, 0], [0, 1, 0]])
        recon = optimal_recon(compose_with_channels(model, [channel]), hamming_measures(model.alphabets))
        assert recon.undefined.tolist() == [False, False, True]
        assert recon.table[:, 0].tolist() == [0, 1, 0]

    def test_expected_distortion(self, bern):
        model = bern(0.3)
        measure = hamming_measures(model.alphabets)[0]
        constant = compose_with_channels(model, [Channel.constant(model.alphabets[0], "Z1")])
        assert expected_distortion(constant, optimal_recon(constant, measure), measure) == pytest.approx(0.3)
        config = identity_config(model, [measure])
        identity = compose_with_channels(model, config.channels)
        assert expected_distortion(identity, config.recon, measure) == pytest.approx(0.0)

    def test_side_information_recon(self, side_info_model):
        model = side_info_model(0.0)
        composed = compose_with_channels(model, [Channel.constant(model.alphabets[0], "Z1")])
        recon = optimal_recon(composed, hamming_measures(model.alphabets[:1]))
        assert recon.has_side_info
        assert recon.table[:, 0, 0].tolist() == [0, 1]

    def test_optimal_recon_beats_random_maps(self, dsbs, rng):
        model = dsbs(0.2)
        x1, x2 = model.alphabets
        channels = [
            Channel.bsc(0.1, x1, "Z1"),
            make_channel(x2, Alphabet.range("Z2", 3), rng.dirichlet(np.ones(3), size=2).tolist()),
        ]
        composed = compose_with_channels(model, channels)
        measures = hamming_measures(model.alphabets)

        def total(recon):
            return sum(expected_distortion(composed, recon, m) for m in measures)

        best = total(optimal_recon(composed, measures))
        cells = composed.shape[2:]
        for _ in range(100):
            table = rng.integers(0, 2, size=cells + (2,))
            assert best <= total(ReconMap(table, np.zeros(cells, dtype=bool))) + 1e-12


class TestBlahutArimoto:
    """Test the point-to-point R(D) oracle"""

    @pytest.mark.parametrize("D", [0.1, 0.25])
    def test_binary_uniform_closed_form(self, D, h_b):
        point = rate_distortion(np.array([0.5, 0.5]), 1.0 - np.eye(2), D)
        assert point.rate == pytest.approx(np.log(2) - h_b(D), abs=1e-6)
        assert point.distortion <= D + 1e-9

    def test_range_and_infeasible(self):
        rho = 1.0 - np.eye(2)
        assert distortion_range(np.array([0.3, 0.7]), rho) == pytest.approx((0.0, 0.3))
        assert rate_distortion(np.array([0.3, 0.7]), rho, 0.4).rate == 0.0
        with pytest.raises(InfeasibleDistortion):
            rate_distortion(np.array([0.3, 0.7]), rho, -0.1)

    def test_curve_follows_slope(self, h_b):
        slopes = [1.0, 2.0, 4.0]
        curve = rate_distortion_curve(np.array([0.5, 0.5]), 1.0 - np.eye(2), slopes)
        for s, point in zip(slopes, curve):
            D = np.exp(-s) / (1.0 + np.exp(-s))
            assert point.distortion == pytest.approx(D, abs=1e-6)
            assert point.rate == pytest.approx(np.log(2) - h_b(D), abs=1e-6)

    def test_source_wrapper(self, bern, h_b):
        model = bern(0.5)
        point = source_rate_distortion(model, hamming_measures(model.alphabets)[0], 0.25)
        assert point.rate == pytest.approx(np.log(2) - h_b(0.25), abs=1e-6)


class TestSearchRegion:
    """Test the region search"""

    def test_slepian_wolf_recovery(self, dsbs, h_b):
        model = dsbs(0.11)
        frontier = search_region(model, hamming_measures(model.alphabets), [0.0, 0.0], budget=2, seed=1)
        h = h_b(0.11)
        target = {(0,): h, (1,): h, (0, 1): np.log(2) + h}
        assert any(
            all(abs(bounds[a] - v) < 1e-6 for a, v in target.items()) for bounds in frontier.subset_bounds
        )
        assert frontier.dominates([h + 1e-6, np.log(2) + 1e-6])
        assert frontier.dominates([np.log(2) + 1e-6, h + 1e-6])
        assert frontier.min_sum_rate() == pytest.approx(np.log(2) + h, abs=1e-6)

    @pytest.mark.parametrize("D", [0.1, 0.25])
    def test_point_to_point_matches_blahut(self, bern, D):
        model = bern(0.5)
        measures = hamming_measures(model.alphabets)
        start = time.time()
        frontier = search_region(model, measures, [D], budget=BUDGET, seed=0)
        oracle = source_rate_distortion(model, measures[0], D).rate
        assert frontier.min_sum_rate() == pytest.approx(oracle, abs=0.01)
        assert all(p.distortions[0] <= D + 1e-9 for p in frontier.points)
        assert time.time() - start < 60.0

    def test_every_corner_meets_every_subset_bound(self, dsbs):
        model = dsbs(0.11)
        frontier = search_region(model, hamming_measures(model.alphabets), [0.05, 0.05], budget=4, seed=2)
        assert frontier.points
        for point in frontier.points:
            assert len(point.bounds) == 3
            for subset, bound in point.bounds.items():
                assert sum(point.rates[m] for m in subset) >= bound - 1e-9

    def test_deterministic_under_seed(self, bern):
        model = bern(0.3)
        measures = hamming_measures(model.alphabets)
        a = search_region(model, measures, [0.1], budget=4, seed=7)
        b = search_region(model, measures, [0.1], budget=4, seed=7)
        assert a.corners == b.corners

    def test_warm_start_is_monotone(self, bern):
        model = bern(0.3)
        measures = hamming_measures(model.alphabets)
        tight = search_region(model, measures, [0.05], budget=2, seed=3)
        loose = search_region(model, measures, [0.15], budget=0, seed=3, warm_start=tight)
        assert loose.min_sum_rate() <= tight.min_sum_rate() + 1e-12

    def test_infeasible_distortion(self, bern):
        model = bern(0.5)
        x = model.alphabets[0]
        measure = DistortionMeasure(np.array([[0.2, 1.0], [1.0, 0.3]]), (x,), (x,))
        with pytest.raises(InfeasibleDistortion):
            search_region(model, [measure], [0.1], budget=1)

    def test_memoryless_only(self, mixed_bern):
        with pytest.raises(InputError):
            search_region(mixed_bern, hamming_measures(mixed_bern.alphabets), [0.0], budget=1)

    def test_targets_must_match_measures(self, dsbs):
        model = dsbs(0.11)
        with pytest.raises(InputError):
            search_region(model, hamming_measures(model.alphabets), [0.0], budget=1)

    def test_threads_do_not_change_results(self, bern):
        model = bern(0.3)
        measures = hamming_measures(model.alphabets)
        serial = search_region(model, measures, [0.1], budget=4, seed=5, threads=1)
        parallel = search_region(model, measures, [0.1], budget=4, seed=5, threads=2)
        assert serial.corners == parallel.corners


class TestMixedAndWynerZiv:
    """Test mixed-source regions and the Wyner-Ziv specialization"""

    def test_mixed_lossless_rate_is_max_entropy(self, bern, h_b):
        frontier = mixed_region(
            bern(0.1), bern(0.4), 0.5, hamming_measures(bern(0.1).alphabets), [0.0], budget=BUDGET, seed=2
        )
        assert frontier.min_sum_rate() == pytest.approx(h_b(0.4), abs=1e-6)

    def test_independent_side_info_is_point_to_point(self, side_info_model, h_b):
        model = side_info_model(0.5)
        measures = hamming_measures(model.alphabets[:1])
        rate = wyner_ziv_rate(model, measures, [0.25], budget=BUDGET, seed=0)
        assert rate == pytest.approx(np.log(2) - h_b(0.25), abs=0.01)

    def test_perfect_side_info_needs_no_rate(self, side_info_model):
        model = side_info_model(0.0)
        frontier = wyner_ziv(model, hamming_measures(model.alphabets[:1]), [0.1], budget=BUDGET, seed=0)
        assert frontier.min_sum_rate() <= 0.005

    def test_identical_components_match_memoryless(self, bern):
        model = bern(0.3)
        measures = hamming_measures(model.alphabets)
        plain = search_region(model, measures, [0.1], budget=4, seed=7)
        mixed = mixed_region(model, bern(0.3), 0.5, measures, [0.1], budget=4, seed=7)
        np.testing.assert_allclose(mixed.corners, plain.corners, atol=1e-12)

    def test_lossless_wyner_ziv_is_conditional_entropy(self, side_info_model, h_b):
        model = side_info_model(0.11)
        rate = wyner_ziv_rate(model, hamming_measures(model.alphabets[:1]), [0.0], budget=BUDGET, seed=0)
        assert rate == pytest.approx(h_b(0.11), abs=1e-6)

    def test_requires_side_information(self, bern):
        model = bern(0.5)
        with pytest.raises(InputError):
            wyner_ziv(model, hamming_measures(model.alphabets), [0.1], budget=1)


class TestDistortionRate:
    """Test the smallest distortions reachable at fixed rates"""

    def test_point_to_point_matches_blahut(self, bern, h_b):
        model = bern(0.5)
        frontier = distortion_rate(model, hamming_measures(model.alphabets), [0.2], aux_sizes=[2], budget=4, seed=0)
        D = frontier.min_distortion()
        assert h_b(D) == pytest.approx(np.log(2) - 0.2, abs=1e-4)
        assert rate_distortion(np.array([0.5, 0.5]), 1.0 - np.eye(2), D).rate == pytest.approx(0.2, abs=1e-4)
        assert all(rate_excess(p.bounds, [0.2]) <= 1e-8 for p in frontier.points)

    def test_zero_rate_leaves_the_best_constant(self, bern):
        model = bern(0.3)
        frontier = distortion_rate(model, hamming_measures(model.alphabets), [0.0], budget=2, seed=1)
        assert frontier.min_distortion() == pytest.approx(0.3, abs=1e-3)

    def test_lossless_rates_reach_zero(self, dsbs, h_b):
        model = dsbs(0.11)
        h = h_b(0.11)
        frontier = distortion_rate(model, hamming_measures(model.alphabets), [h + 1e-6, np.log(2) + 1e-6], budget=0)
        assert frontier.min_total() == pytest.approx(0.0, abs=1e-12)
        assert frontier.rates == (h + 1e-6, np.log(2) + 1e-6)

    def test_mixed_model(self, mixed_bern, h_b):
        measures = hamming_measures(mixed_bern.alphabets)
        frontier = distortion_rate(mixed_bern, measures, [h_b(0.4) + 1e-9], budget=0)
        assert frontier.min_distortion() == pytest.approx(0.0, abs=1e-12)

    def test_rate_checks(self, dsbs):
        model = dsbs(0.11)
        measures = hamming_measures(model.alphabets)
        with pytest.raises(InputError):
            distortion_rate(model, measures, [0.5], budget=0)
        with pytest.raises(InputError):
            distortion_rate(model, measures, [0.5, -0.1], budget=0)

    def test_rate_excess(self):
        bounds = {(0,): 0.2, (1,): 0.3, (0, 1): 1.0}
        assert rate_excess(bounds, [0.5, 0.5]) == 0.0
        assert rate_excess(bounds, [0.1, 0.4]) == pytest.approx(0.1 + 0.5)
