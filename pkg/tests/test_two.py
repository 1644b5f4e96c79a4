import numpy as np
import pytest

from spikegrad.two import (FrozenFactorsError, TemporalFactors, decode,
                           freeze, mean_decode, per_timestep_accuracy,
                           update_factors)


def _currents(values):
    # (T,) scalars -> (T, 1, 1)
    return np.array(values, dtype=np.float64).reshape(-1, 1, 1)


class TestDecode:
    def test_uniform_is_mean(self):
        f = TemporalFactors.uniform(2)
        np.testing.assert_allclose(decode(f, _currents([2.0, 4.0])), [[3.0]])

    def test_selector(self):
        f = TemporalFactors(f=np.array([1.0, 0.0]))
        np.testing.assert_allclose(decode(f, _currents([2.0, 4.0])), [[2.0]])

    def test_weighted(self):
        f = TemporalFactors(f=np.array([0.25, 0.75]))
        np.testing.assert_allclose(decode(f, _currents([2.0, 4.0])), [[3.5]])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            decode(TemporalFactors.uniform(3), _currents([1.0, 2.0]))

    def test_uniform_argmax_matches_mean_decode(self):
        rng = np.random.default_rng(0)
        currents = rng.normal(0, 1, (5, 32, 7))
        f = TemporalFactors.uniform(5)
        weighted = decode(f, currents)
        plain = mean_decode(currents)
        np.testing.assert_array_equal(weighted.argmax(1), plain.argmax(1))


class TestPerTimestepAccuracy:
    def test_all_correct(self):
        currents = np.zeros((3, 4, 2))
        currents[:, :, 1] = 1.0
        acc = per_timestep_accuracy(currents, np.ones(4, dtype=int))
        np.testing.assert_array_equal(acc, [1.0, 1.0, 1.0])

    def test_hand_counts(self):
        # t0: one of four correct; t1: three of four correct
        currents = np.zeros((2, 4, 2))
        currents[0, 0, 1] = 1.0
        currents[1, :3, 1] = 1.0
        labels = np.array([1, 1, 1, 1])
        np.testing.assert_allclose(
            per_timestep_accuracy(currents, labels), [0.25, 0.75])

    def test_ties_break_to_lowest_class(self):
        currents = np.zeros((1, 2, 3))  # all tied -> predicts class 0
        acc = per_timestep_accuracy(currents, np.array([0, 1]))
        np.testing.assert_array_equal(acc, [0.5])

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            per_timestep_accuracy(np.zeros((2, 0, 3)), np.zeros(0, dtype=int))


class TestUpdateFactors:
    def test_beta_one_is_identity(self):
        f = TemporalFactors(f=np.array([0.7, 0.3]), beta=1.0)
        out = update_factors(f, np.array([0.0, 1.0]))
        np.testing.assert_array_equal(out.f, [0.7, 0.3])

    def test_beta_zero_is_normalized_accuracy(self):
        f = TemporalFactors(f=np.array([0.9, 0.1]), beta=0.0)
        out = update_factors(f, np.array([0.2, 0.2]))
        np.testing.assert_allclose(out.f, [0.5, 0.5])

    def test_hand_update(self):
        f = TemporalFactors(f=np.full(4, 0.25), beta=0.9)
        out = update_factors(f, np.array([0.0, 0.0, 0.0, 1.0]))
        np.testing.assert_allclose(out.f, [0.225, 0.225, 0.225, 0.325])

    def test_zero_accuracy_falls_back_to_uniform(self):
        f = TemporalFactors(f=np.array([1.0, 0.0]), beta=0.5)
        out = update_factors(f, np.zeros(2))
        np.testing.assert_allclose(out.f, [0.75, 0.25])

    def test_simplex_preserved(self):
        rng = np.random.default_rng(4)
        f = TemporalFactors.uniform(8, beta=0.9)
        for _ in range(500):
            f = update_factors(f, rng.random(8))
            assert abs(f.f.sum() - 1.0) <= 1e-12
            assert np.all(f.f >= 0)

    def test_geometric_convergence_to_constant_accuracy(self):
        acc = np.array([0.1, 0.2, 0.3, 0.4])
        delta = acc / acc.sum()
        f = TemporalFactors.uniform(4, beta=0.9)
        for _ in range(200):
            f = update_factors(f, acc)
        assert np.max(np.abs(f.f - delta)) <= 1e-8


class TestFreeze:
    def test_decode_still_works(self):
        f = freeze(TemporalFactors.uniform(2))
        np.testing.assert_allclose(decode(f, _currents([2.0, 4.0])), [[3.0]])

    def test_update_rejected(self):
        f = freeze(TemporalFactors.uniform(2))
        with pytest.raises(FrozenFactorsError):
            update_factors(f, np.array([1.0, 1.0]))

    def test_idempotent(self):
        f = freeze(freeze(TemporalFactors.uniform(3)))
        assert f.frozen
        np.testing.assert_array_equal(f.f, np.full(3, 1 / 3))


def test_initialization_uniform():
    f = TemporalFactors.uniform(5)
    np.testing.assert_array_equal(f.f, np.full(5, 0.2))
    assert not f.frozen
