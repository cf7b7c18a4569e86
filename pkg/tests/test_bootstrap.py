"""Tests for the circular block bootstrap and the basic interval."""

import csv

import numpy as np
import pytest

from amocboot import (
    AmocSpec,
    Ar1Params,
    BootstrapConfig,
    BootstrapDistribution,
    TimeSeries,
    ar1_generate,
    block_count,
    bootstrap_ci,
    bootstrap_distribution,
    bootstrap_quantiles,
    draw_offsets,
    fit_amoc,
    make_amoc_series,
    resample_errors,
    reconstruct_series,
    write_bootstrap_csv,
)


class TestBlockCount:
    def test_exact_division(self):
        assert block_count(12, 4) == 3
        assert block_count(80, 8) == 10

    def test_rounds_up(self):
        assert block_count(10, 4) == 3
        assert block_count(7, 10) == 1

    def test_single_block(self):
        assert block_count(5, 5) == 1


class TestDrawOffsets:
    def test_overlapping_range_and_shape(self):
        rng = np.random.default_rng(1)
        off = draw_offsets(10, 4, "circular_overlapping", rng)
        assert off.shape == (3,)
        for _ in range(200):
            off = draw_offsets(10, 4, "circular_overlapping", rng)
            assert np.all(off >= 0) and np.all(off < 10)

    def test_overlapping_hits_every_offset(self):
        rng = np.random.default_rng(2)
        seen = set()
        for _ in range(500):
            seen.update(draw_offsets(10, 4, "circular_overlapping", rng).tolist())
        assert seen == set(range(10))

    def test_nonoverlapping_multiples_only(self):
        rng = np.random.default_rng(3)
        seen = set()
        for _ in range(500):
            off = draw_offsets(10, 4, "circular_nonoverlapping", rng)
            assert off.shape == (3,)
            seen.update(off.tolist())
        assert seen == {0, 4, 8}

    def test_nonoverlapping_stays_inside_series(self):
        rng = np.random.default_rng(4)
        for n, k in [(10, 3), (11, 5), (7, 7), (13, 2)]:
            for _ in range(100):
                off = draw_offsets(n, k, "circular_nonoverlapping", rng)
                assert np.all(off < n)
                assert np.all(off % k == 0)

    def test_deterministic_for_seed(self):
        a = draw_offsets(50, 7, "circular_overlapping", np.random.default_rng(99))
        b = draw_offsets(50, 7, "circular_overlapping", np.random.default_rng(99))
        assert np.array_equal(a, b)

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError, match="scheme"):
            draw_offsets(10, 4, "bogus", np.random.default_rng(0))


class TestResampleErrors:
    def test_wraps_around_the_end(self):
        res = np.array([10.0, 20.0, 30.0, 40.0])
        out = resample_errors(res, 4, np.array([3]))
        assert out.tolist() == [40.0, 10.0, 20.0, 30.0]

    def test_offset_zero_full_block_is_identity(self):
        res = np.array([1.5, -2.0, 0.25, 7.0, -3.5])
        out = resample_errors(res, 5, np.array([0]))
        assert np.array_equal(out, res)

    def test_concatenates_blocks_in_offset_order(self):
        res = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
        out = resample_errors(res, 2, np.array([4, 0, 5]))
        assert out.tolist() == [4.0, 5.0, 0.0, 1.0, 5.0, 0.0]

    def test_values_come_from_the_original_vector(self):
        rng = np.random.default_rng(11)
        res = rng.normal(size=37)
        off = draw_offsets(37, 5, "circular_overlapping", rng)
        out = resample_errors(res, 5, off)
        assert set(out.tolist()) <= set(res.tolist())

    def test_within_block_neighbors_are_circular_successors(self):
        rng = np.random.default_rng(12)
        res = rng.normal(size=23)  # distinct values almost surely
        position = {v: i for i, v in enumerate(res.tolist())}
        off = draw_offsets(23, 4, "circular_overlapping", rng)
        out = resample_errors(res, 4, off)
        for block in range(off.size):
            for k in range(1, 4):
                prev_idx = position[out[block * 4 + k - 1]]
                this_idx = position[out[block * 4 + k]]
                assert this_idx == (prev_idx + 1) % 23


class TestReconstructSeries:
    def test_adds_fitted_step_and_truncates(self):
        e_star = np.array([0.1, -0.1, 0.2, -0.2, 0.3, -0.3])
        x = reconstruct_series(e_star, 2, 1.0, 5.0, 5)
        assert x.tolist() == [1.1, 0.9, 5.2, 4.8, 5.3]

    def test_rejects_short_error_vector(self):
        with pytest.raises(ValueError, match="resampled errors"):
            reconstruct_series(np.zeros(4), 2, 0.0, 1.0, 5)


class TestBootstrapConfig:
    def test_rejects_bad_block_length(self):
        with pytest.raises(ValueError, match="block_length"):
            BootstrapConfig(block_length=0)

    def test_rejects_bad_resamples(self):
        with pytest.raises(ValueError, match="resamples"):
            BootstrapConfig(block_length=4, resamples=1)

    def test_rejects_bad_scheme(self):
        with pytest.raises(ValueError, match="scheme"):
            BootstrapConfig(block_length=4, scheme="stationary")


class TestBootstrapDistribution:
    @staticmethod
    def _ar1_fit(n=80, m=40, d=2.0, rho=0.1, gamma=0.0, seed=5):
        rng = np.random.default_rng(seed)
        e = ar1_generate(Ar1Params(rho=rho), n, rng)
        series = make_amoc_series(AmocSpec(n=n, m=m, d=d), e)
        return fit_amoc(series, gamma)

    def test_noiseless_step_recovers_m_hat_every_time(self):
        x = np.zeros(60)
        x[25:] += 1.0
        fit = fit_amoc(TimeSeries(x), 0.5)
        dist = bootstrap_distribution(fit, BootstrapConfig(block_length=6, resamples=200, seed=3))
        assert fit.m_hat == 25
        assert np.all(dist.samples == 25)

    def test_sample_count_and_range(self):
        fit = self._ar1_fit()
        dist = bootstrap_distribution(fit, BootstrapConfig(block_length=8, resamples=300, seed=7))
        assert dist.resamples == 300
        assert dist.m_hat == fit.m_hat
        assert dist.gamma == fit.gamma
        assert np.all(dist.samples >= 1) and np.all(dist.samples <= 79)

    def test_deterministic_for_seed(self):
        fit = self._ar1_fit()
        cfg = BootstrapConfig(block_length=8, resamples=250, seed=21)
        a = bootstrap_distribution(fit, cfg)
        b = bootstrap_distribution(fit, cfg)
        assert np.array_equal(a.samples, b.samples)

    def test_seed_changes_the_draw(self):
        fit = self._ar1_fit(d=0.5)
        a = bootstrap_distribution(fit, BootstrapConfig(block_length=8, resamples=250, seed=1))
        b = bootstrap_distribution(fit, BootstrapConfig(block_length=8, resamples=250, seed=2))
        assert not np.array_equal(a.samples, b.samples)

    def test_matrix_draw_matches_sequential_offsets(self):
        # one (B, L) integers call consumes the stream exactly like B
        # sequential per-resample calls
        n, k, b = 37, 5, 12
        nblocks = block_count(n, k)
        matrix = np.random.default_rng(17).integers(0, n, size=(b, nblocks))
        rng = np.random.default_rng(17)
        rows = [draw_offsets(n, k, "circular_overlapping", rng) for _ in range(b)]
        assert np.array_equal(matrix, np.stack(rows))

    def test_matrix_draw_matches_sequential_offsets_nonoverlapping(self):
        n, k, b = 37, 5, 12
        nblocks = block_count(n, k)
        matrix = np.random.default_rng(23).integers(0, nblocks, size=(b, nblocks)) * k
        rng = np.random.default_rng(23)
        rows = [draw_offsets(n, k, "circular_nonoverlapping", rng) for _ in range(b)]
        assert np.array_equal(matrix, np.stack(rows))

    def test_chunking_does_not_change_samples(self, monkeypatch):
        fit = self._ar1_fit()
        cfg = BootstrapConfig(block_length=8, resamples=64, seed=9)
        whole = bootstrap_distribution(fit, cfg)
        import amocboot.bootstrap as bmod

        monkeypatch.setattr(bmod, "_CHUNK_TARGET_ELEMENTS", 80 * 7)
        chunked = bootstrap_distribution(fit, cfg)
        assert np.array_equal(whole.samples, chunked.samples)

    def test_nonoverlapping_scheme_runs(self):
        fit = self._ar1_fit()
        cfg = BootstrapConfig(
            block_length=8, resamples=100, scheme="circular_nonoverlapping", seed=13
        )
        dist = bootstrap_distribution(fit, cfg)
        assert dist.resamples == 100

    def test_block_length_beyond_series_rejected(self):
        fit = self._ar1_fit(n=20, m=10)
        with pytest.raises(ValueError, match="exceeds"):
            bootstrap_distribution(fit, BootstrapConfig(block_length=21, resamples=10))

    def test_estimates_concentrate_near_the_change(self):
        fit = self._ar1_fit(n=200, m=100, d=2.0, seed=31)
        dist = bootstrap_distribution(fit, BootstrapConfig(block_length=10, resamples=400, seed=8))
        assert abs(np.median(dist.samples) - fit.m_hat) <= 5


class TestBootstrapQuantiles:
    def test_worked_example_ten_points(self):
        samples = np.arange(1.0, 11.0)
        # alpha/2 = 0.1: count 1 of 10 at or below the cut on each side
        assert bootstrap_quantiles(samples, 0.2) == (2.0, 9.0)

    def test_worked_example_no_trim(self):
        samples = np.arange(1.0, 11.0)
        # alpha/2 = 0.095 < 1/10, so nothing can be cut from either end
        assert bootstrap_quantiles(samples, 0.19) == (1.0, 10.0)

    def test_boundary_fraction_is_kept(self):
        samples = np.arange(1.0, 21.0)
        # alpha/2 = 0.05 exactly equals 1/20, so one point is cut per side
        assert bootstrap_quantiles(samples, 0.1) == (2.0, 19.0)

    def test_degenerate_samples(self):
        samples = np.full(50, 5.0)
        assert bootstrap_quantiles(samples, 0.1) == (5.0, 5.0)

    def test_unsorted_input_is_sorted_internally(self):
        samples = np.array([9.0, 1.0, 5.0, 3.0, 7.0, 2.0, 8.0, 4.0, 6.0, 10.0])
        assert bootstrap_quantiles(samples, 0.2) == (2.0, 9.0)

    def test_alpha_validation(self):
        with pytest.raises(ValueError, match="alpha"):
            bootstrap_quantiles(np.arange(10.0), 0.0)
        with pytest.raises(ValueError, match="alpha"):
            bootstrap_quantiles(np.arange(10.0), 1.0)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError, match="samples"):
            bootstrap_quantiles(np.array([1.0]), 0.1)


class TestBootstrapCi:
    def test_reflects_quantiles_around_m_hat(self):
        samples = np.arange(30.0, 51.0)  # 21 values centered at 40
        dist = BootstrapDistribution(samples=samples, m_hat=40, gamma=0.5)
        q_lo, q_hi = bootstrap_quantiles(samples, 0.1)
        ci = bootstrap_ci(dist, 0.1)
        assert ci.lower == 2.0 * 40 - q_hi
        assert ci.upper == 2.0 * 40 - q_lo
        assert ci.level == 0.9
        assert ci.method == "bootstrap"

    def test_degenerate_distribution_gives_point_interval(self):
        dist = BootstrapDistribution(samples=np.full(100, 25.0), m_hat=25, gamma=0.5)
        ci = bootstrap_ci(dist, 0.05)
        assert (ci.lower, ci.upper) == (25.0, 25.0)
        assert ci.length == 0.0

    def test_interval_length_shrinks_with_alpha(self):
        rng = np.random.default_rng(41)
        samples = np.sort(rng.normal(40.0, 3.0, size=2000))
        dist = BootstrapDistribution(samples=samples, m_hat=40, gamma=0.5)
        lengths = [bootstrap_ci(dist, a).length for a in (0.01, 0.05, 0.1, 0.2)]
        assert lengths == sorted(lengths, reverse=True)


class TestWriteBootstrapCsv:
    def test_roundtrip(self, tmp_path):
        dist = BootstrapDistribution(
            samples=np.array([40, 41, 39, 40], dtype=np.int64), m_hat=40, gamma=0.5
        )
        path = tmp_path / "boot.csv"
        write_bootstrap_csv(dist, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["b", "m_star"]
        assert rows[1:] == [["1", "40"], ["2", "41"], ["3", "39"], ["4", "40"]]
