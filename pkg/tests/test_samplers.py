import math

import numpy as np
import pytest

from cptrie.errors import DegenerateZipfError, RankOverflowError
from cptrie.samplers import (
    SamplerConfig,
    adaptive_size,
    allowed_set_size,
    eta_size,
    mirostat_size,
    top_k_size,
    top_p_size,
)

from conftest import make_record, record_from_probs, uniform_record, zipf_record


def renormalized_entropy(probs, j):
    """Direct oracle: entropy of the top-j renormalized distribution."""
    top = probs[:j]
    s = sum(top)
    return -sum(p / s * math.log(p / s) for p in top)


def mirostat_oracle(probs, vocab, tau):
    """Independent reimplementation of the Zipf estimate and surprise cut."""
    m = min(100, len(probs) - 1)
    num = den = 0.0
    for i in range(1, m + 1):
        t = math.log((i + 1) / i)
        b = math.log(probs[i - 1] / probs[i])
        num += t * b
        den += t * t
    s = num / den
    eps = s - 1.0
    k = round((eps * 2 ** (2 * tau) / (1 - vocab ** (-eps))) ** (1 / s))
    return min(max(k, 1), len(probs))


class TestTopK:
    def test_k1(self):
        assert top_k_size(record_from_probs([0.5, 0.3, 0.2]), 1) == 1

    def test_clamps_at_vocabulary(self):
        assert top_k_size(record_from_probs([0.5, 0.3, 0.2]), 5) == 3

    def test_overflow_on_shallow_export(self):
        rec = record_from_probs([0.5, 0.3], vocab=10, tail=0.2)
        with pytest.raises(RankOverflowError):
            top_k_size(rec, 5)

    def test_exact_rank(self):
        rec = uniform_record(16)
        assert top_k_size(rec, 7) == 7


class TestTopP:
    def test_full_mass_gives_n(self):
        assert top_p_size(record_from_probs([0.5, 0.3, 0.2]), 1.0) == 3

    def test_boundary_inclusive(self):
        assert top_p_size(record_from_probs([0.5, 0.3, 0.2]), 0.8) == 2

    def test_just_past_boundary(self):
        assert top_p_size(record_from_probs([0.5, 0.3, 0.2]), 0.81) == 3

    def test_tiny_p_floors_at_one(self):
        assert top_p_size(record_from_probs([0.5, 0.3, 0.2]), 1e-9) == 1

    def test_overflow_into_tail(self):
        rec = record_from_probs([0.4, 0.3], vocab=100, tail=0.3)
        with pytest.raises(RankOverflowError):
            top_p_size(rec, 0.9)

    def test_float_shortfall_without_tail_is_n(self):
        probs = [1 / 7] * 7
        rec = record_from_probs(probs)
        assert top_p_size(rec, 1.0) == 7


class TestEta:
    def test_uniform_example(self):
        # eps=0.01 over uniform-4: threshold = min(0.01, 0.1 * e^{-ln 4}) = 0.01
        assert eta_size(uniform_record(4), 0.01) == 4

    def test_one_hot_floors_at_one(self):
        rec = record_from_probs([1.0])
        for eps in (1e-6, 0.5, 1.0):
            assert eta_size(rec, eps) == 1

    def test_peaked_example(self):
        rec = record_from_probs([0.9, 0.06, 0.04])
        assert eta_size(rec, 0.25) == 1

    def test_overflow_when_cut_escapes_export(self):
        # threshold below the last listed prob while mass remains unlisted
        rec = record_from_probs([0.3, 0.25], vocab=1000, tail=0.45)
        with pytest.raises(RankOverflowError):
            eta_size(rec, 1e-8)


class TestMirostat:
    @pytest.mark.parametrize("s", [1.05, 1.1, 1.5])
    @pytest.mark.parametrize("tau", [0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
    def test_matches_independent_oracle(self, s, tau):
        rec = zipf_record(s, 1000)
        expected = mirostat_oracle([t.prob for t in rec.tokens], rec.vocab_size, tau)
        assert mirostat_size(rec, tau) == expected

    def test_tiny_tau_gives_one(self):
        assert mirostat_size(zipf_record(1.1, 1000), 0.01) == 1

    def test_single_token_record(self):
        assert mirostat_size(record_from_probs([1.0]), 5.0) == 1

    def test_uniform_is_degenerate(self):
        with pytest.raises(DegenerateZipfError):
            mirostat_size(uniform_record(64), 3.0)

    def test_increasing_probs_cannot_happen_but_flat_zipf_degenerates(self):
        rec = record_from_probs([0.25, 0.25, 0.25, 0.25])
        with pytest.raises(DegenerateZipfError):
            mirostat_size(rec, 1.0)

    def test_overflow_on_shallow_export(self):
        full = zipf_record(1.1, 1000)
        head = [t.prob for t in full.tokens[:50]]
        rec = record_from_probs(
            head, vocab=1000, tail=1.0 - sum(head), entropy=full.entropy_nats
        )
        with pytest.raises(RankOverflowError):
            mirostat_size(rec, 5.0)

    def test_feedback_update(self):
        from cptrie.samplers import mirostat_feedback_update

        # on-target surprise leaves mu fixed; over-surprise shrinks it
        assert mirostat_feedback_update(6.0, 3.0, 3.0) == 6.0
        assert mirostat_feedback_update(6.0, 5.0, 3.0, learning_rate=0.5) == 5.0
        mu = 8.0
        for _ in range(50):
            mu = mirostat_feedback_update(mu, 4.0, 3.0, learning_rate=0.1)
        assert mu < 8.0


class TestAdaptive:
    def test_one_hot(self):
        assert adaptive_size(record_from_probs([1.0]), 1e-4) == 1

    def test_uniform_four_example(self):
        # scaled profile [0, 0.5, 0.792, 1]; first increment below 0.5 at j=2
        assert adaptive_size(uniform_record(4), 0.5) == 2

    def test_geometric_matches_brute_force(self):
        weights = [2.0 ** -(i + 1) for i in range(16)]
        probs = [w / sum(weights) for w in weights]
        rec = record_from_probs(probs)
        for delta in (1e-3, 1e-2, 0.05, 0.2, 0.9):
            h = [renormalized_entropy(probs, j) for j in range(1, 17)]
            lo, hi = min(h), max(h)
            scaled = [(x - lo) / (hi - lo) for x in h]
            expected = 16
            for j in range(15):
                if scaled[j + 1] - scaled[j] < delta:
                    expected = j + 1
                    break
            assert adaptive_size(rec, delta) == expected

    def test_huge_delta_gives_one(self):
        assert adaptive_size(uniform_record(8), 2.0) == 1


class TestIncrementalEntropyIdentity:
    def test_profile_matches_direct(self):
        from cptrie import kernels

        rng = np.random.default_rng(11)
        for _ in range(100):
            rec = make_record(rng, vocab=int(rng.integers(2, 80)))
            probs = [t.prob for t in rec.tokens]
            profile = kernels.entropy_profile(rec.probs)
            for j in range(1, len(probs) + 1):
                assert abs(profile[j - 1] - renormalized_entropy(probs, j)) < 1e-9


class TestMonotonicity:
    def test_two_hundred_random_records(self):
        rng = np.random.default_rng(23)
        for i in range(200):
            rec = make_record(rng, vocab=int(rng.integers(2, 64)), prefix_id=f"m{i}")
            n = rec.n
            k_sizes = [top_k_size(rec, k) for k in range(1, n + 1)]
            assert k_sizes == sorted(k_sizes)
            p_sizes = [top_p_size(rec, p) for p in np.linspace(0.01, 1.0, 23)]
            assert p_sizes == sorted(p_sizes)
            e_sizes = [eta_size(rec, e) for e in np.geomspace(1e-7, 1.0, 23)]
            assert e_sizes == sorted(e_sizes, reverse=True)
            a_sizes = [adaptive_size(rec, d) for d in np.geomspace(1e-6, 1.0, 23)]
            assert a_sizes == sorted(a_sizes, reverse=True)

    def test_mirostat_monotone_on_zipf(self):
        rec = zipf_record(1.2, 500)
        sizes = [mirostat_size(rec, tau) for tau in np.linspace(0.1, 8.0, 40)]
        assert sizes == sorted(sizes)


class TestFloorAtOne:
    def test_all_methods_return_at_least_one(self):
        rng = np.random.default_rng(5)
        thetas = {
            "top_k": 1,
            "top_p": 0.01,
            "eta": 1.0,
            "adaptive": 0.999,
        }
        for i in range(50):
            rec = make_record(rng, vocab=int(rng.integers(2, 40)), prefix_id=f"f{i}")
            for method, theta in thetas.items():
                assert allowed_set_size(rec, SamplerConfig(method, theta)) >= 1


class TestSamplerConfig:
    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown method"):
            SamplerConfig("typical", 0.5)

    @pytest.mark.parametrize(
        "method,theta",
        [
            ("top_k", 0),
            ("top_k", 2.5),
            ("top_p", 0.0),
            ("top_p", 1.5),
            ("eta", 0.0),
            ("eta", -1.0),
            ("mirostat", 0.0),
            ("adaptive", -1e-9),
        ],
    )
    def test_domain_violations(self, method, theta):
        with pytest.raises(ValueError):
            SamplerConfig(method, theta)

    def test_integer_valued_float_k_accepted(self):
        assert SamplerConfig("top_k", 15.0).theta == 15.0
