import numpy as np
import pytest

from spikegrad.surrogate import (ARCTAN, PIECEWISE_LINEAR, SurrogateSpec,
                                 relaxed_activation, sg_value)

V_TH = 0.5


class TestSgValue:
    def test_arctan_peak(self):
        spec = SurrogateSpec(ARCTAN, alpha=2.0)
        np.testing.assert_allclose(sg_value(spec, np.array([V_TH]), V_TH), [2.0])

    def test_arctan_hand_value(self):
        # u = 1/pi makes (pi/2 * 2 * u)^2 = 1, so value = 2/(1+1) = 1
        spec = SurrogateSpec(ARCTAN, alpha=2.0)
        np.testing.assert_allclose(
            sg_value(spec, np.array([V_TH + 1.0 / np.pi]), V_TH), [1.0])

    def test_plgrad_outside_support(self):
        spec = SurrogateSpec(PIECEWISE_LINEAR, alpha=1.0)
        np.testing.assert_array_equal(
            sg_value(spec, np.array([V_TH + 2.0]), V_TH), [0.0])

    def test_plgrad_hand_value(self):
        spec = SurrogateSpec(PIECEWISE_LINEAR, alpha=1.0)
        np.testing.assert_allclose(
            sg_value(spec, np.array([V_TH + 0.5]), V_TH), [0.5])

    @pytest.mark.parametrize("family", [ARCTAN, PIECEWISE_LINEAR])
    def test_nonnegative_symmetric_peaked(self, family):
        spec = SurrogateSpec(family, alpha=3.0)
        u = np.linspace(-4, 4, 801)
        vals = sg_value(spec, V_TH + u, V_TH)
        assert np.all(vals >= 0)
        np.testing.assert_allclose(vals, vals[::-1], atol=1e-12)
        assert vals.max() == pytest.approx(spec.alpha)
        assert vals.argmax() == 400  # u == 0

    def test_plgrad_zero_fraction_monotone_in_alpha(self):
        rng = np.random.default_rng(0)
        v = V_TH + rng.normal(0, 1, 5000)
        fractions = []
        for alpha in [0.5, 1.0, 2.0, 5.0, 10.0]:
            spec = SurrogateSpec(PIECEWISE_LINEAR, alpha=alpha)
            fractions.append((sg_value(spec, v, V_TH) == 0).mean())
        assert all(a <= b for a, b in zip(fractions, fractions[1:]))


class TestRelaxedActivation:
    @pytest.mark.parametrize("family", [ARCTAN, PIECEWISE_LINEAR])
    def test_zero_at_threshold(self, family):
        spec = SurrogateSpec(family, alpha=2.0)
        np.testing.assert_array_equal(
            relaxed_activation(spec, np.array([V_TH]), V_TH), [0.0])

    def test_arctan_finite_difference_at_point(self):
        spec = SurrogateSpec(ARCTAN, alpha=2.0)
        v = np.array([V_TH + 0.3], dtype=np.float64)
        h = 1e-6
        fd = (relaxed_activation(spec, v + h, V_TH)
              - relaxed_activation(spec, v - h, V_TH)) / (2 * h)
        np.testing.assert_allclose(fd, sg_value(spec, v, V_TH), rtol=1e-6)

    def test_plgrad_constant_outside_support(self):
        spec = SurrogateSpec(PIECEWISE_LINEAR, alpha=2.0)
        far = relaxed_activation(spec, V_TH + np.array([1.0, 5.0, 100.0]), V_TH)
        np.testing.assert_array_equal(far, [0.5, 0.5, 0.5])

    @pytest.mark.parametrize("family", [ARCTAN, PIECEWISE_LINEAR])
    @pytest.mark.parametrize("alpha", [0.5, 2.0, 7.0])
    def test_derivative_consistency_random_points(self, family, alpha):
        # Central differences of the antiderivative reproduce sg_value to
        # 1e-6 relative at 64-bit, over 1000 random potentials.
        spec = SurrogateSpec(family, alpha=alpha)
        rng = np.random.default_rng(11)
        v = (V_TH + rng.normal(0, 1, 1000)).astype(np.float64)
        if family == PIECEWISE_LINEAR:
            # keep sample points away from the kinks, where the one-sided
            # derivative genuinely differs
            dist = np.abs(np.abs(v - V_TH) - 1.0 / alpha)
            v = v[(dist > 1e-4) & (np.abs(v - V_TH) > 1e-4)]
        h = 1e-6
        fd = (relaxed_activation(spec, v + h, V_TH)
              - relaxed_activation(spec, v - h, V_TH)) / (2 * h)
        exact = sg_value(spec, v, V_TH)
        denom = np.maximum(np.abs(exact), 1e-6)
        assert np.max(np.abs(fd - exact) / denom) <= 1e-6


class TestSpec:
    def test_alpha_positive(self):
        with pytest.raises(ValueError):
            SurrogateSpec(ARCTAN, alpha=0.0)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            SurrogateSpec("rectangular", alpha=1.0)
