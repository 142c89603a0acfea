"""Normalization and Savitzky-Golay smoothing with derivative output."""

import numpy as np
import pytest

from kneecap import (
    CapacitySeries,
    ConfigurationError,
    SmootherConfig,
    default_smoother_config,
    normalize,
    savgol_filter,
    smooth_derivatives,
)


def series_from(caps, nominal):
    caps = np.asarray(caps, dtype=float)
    return CapacitySeries(
        cell_id="c",
        cycle=np.arange(float(len(caps))),
        capacity_ah=caps,
        nominal_capacity_ah=nominal,
        is_uniform=True,
    )


class TestNormalize:
    def test_direct_division(self):
        caps = [5.0, 4.5, 4.0, 3.9, 3.8, 3.7, 3.6, 3.5]
        out = normalize(series_from(caps, 5.0))
        assert np.allclose(out[:3], [1.0, 0.9, 0.8])
        assert out.shape == (8,)

    def test_all_equal_gives_ones(self):
        out = normalize(series_from([4.2] * 10, 4.2))
        assert np.array_equal(out, np.ones(10))

    def test_scale_consistency(self):
        rng = np.random.default_rng(0)
        caps = 5.0 - 0.001 * np.arange(20) + rng.normal(0, 1e-3, 20)
        a = normalize(series_from(caps, 5.0))
        b = normalize(series_from(2.0 * caps, 10.0))
        assert np.allclose(a, b, rtol=1e-15)


class TestSmootherConfig:
    def test_even_window_rejected(self):
        with pytest.raises(ConfigurationError):
            SmootherConfig(window_length=10, poly_order=3)

    def test_window_must_cover_order(self):
        with pytest.raises(ConfigurationError):
            SmootherConfig(window_length=3, poly_order=3)

    def test_order_must_cover_max_deriv(self):
        with pytest.raises(ConfigurationError):
            SmootherConfig(window_length=11, poly_order=1, max_deriv=2)

    def test_default_config_tracks_length(self):
        for n in (11, 50, 100, 600, 5000):
            cfg = default_smoother_config(n)
            assert cfg.window_length % 2 == 1
            assert cfg.window_length <= max(n, 11) or cfg.window_length <= n
            assert cfg.window_length <= 101
            assert cfg.poly_order >= cfg.max_deriv


class TestSavgolFilter:
    def test_constant_reproduced_exactly(self):
        y = np.full(50, 0.95)
        cfg = SmootherConfig(window_length=11, poly_order=3)
        out = savgol_filter(y, cfg, deriv=0)
        assert np.allclose(out, 0.95, rtol=0, atol=1e-14)

    def test_affine_first_derivative(self):
        n = np.arange(100.0)
        y = 1.0 - 0.001 * n
        cfg = SmootherConfig(window_length=11, poly_order=2, max_deriv=1)
        out = savgol_filter(y, cfg, deriv=1)
        assert np.abs(out + 0.001).max() < 1e-12

    def test_center_weights_window5_order2(self):
        # least-squares projection row solved directly: the weights are
        # the deriv-0 row of pinv(V) for the 5-point centered abscissa
        x = np.arange(-2.0, 3.0)
        vand = np.vander(x, 3, increasing=True)
        proj = np.linalg.pinv(vand)[0]
        assert np.allclose(proj, np.array([-3, 12, 17, 12, -3]) / 35.0, atol=1e-12)
        y = np.zeros(11)
        y[5] = 1.0  # impulse reads the convolution kernel off the output
        cfg = SmootherConfig(window_length=5, poly_order=2)
        out = savgol_filter(y, cfg, deriv=0)
        assert np.allclose(out[3:8], proj[::-1], atol=1e-12)

    def test_polynomial_reproduction_all_indices(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            order = int(rng.integers(2, 6))
            window = int(rng.choice([5, 7, 11, 21, 31]))
            if window < order + 1:
                window = order + 1 + ((order + 1) % 2 == 0)
            if window % 2 == 0:
                window += 1
            n = int(rng.integers(window, 120))
            coeffs = rng.normal(size=order + 1)
            poly = np.polynomial.Polynomial(coeffs)
            t = np.arange(n, dtype=float)
            cfg = SmootherConfig(window_length=window, poly_order=order, max_deriv=2)
            for d in range(min(order, 2) + 1):
                got = savgol_filter(poly(t), cfg, deriv=d)
                want = poly.deriv(d)(t) if d else poly(t)
                scale = max(np.abs(want).max(), 1.0)
                assert np.abs(got - want).max() / scale < 1e-9

    def test_dt_scaling_of_derivatives(self):
        dt = 0.25
        t = np.arange(80.0) * dt
        y = 0.5 * t**2
        cfg = SmootherConfig(window_length=9, poly_order=3, max_deriv=2)
        d1 = savgol_filter(y, cfg, deriv=1, dt=dt)
        d2 = savgol_filter(y, cfg, deriv=2, dt=dt)
        assert np.abs(d1 - t).max() < 1e-9
        assert np.abs(d2 - 1.0).max() < 1e-9

    def test_linearity(self):
        rng = np.random.default_rng(7)
        y1, y2 = rng.normal(size=(2, 60))
        cfg = SmootherConfig(window_length=11, poly_order=3)
        a, b = 2.5, -1.25
        lhs = savgol_filter(a * y1 + b * y2, cfg)
        rhs = a * savgol_filter(y1, cfg) + b * savgol_filter(y2, cfg)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_shift_equivariance_interior(self):
        rng = np.random.default_rng(9)
        y = rng.normal(size=64)
        cfg = SmootherConfig(window_length=11, poly_order=3)
        base = savgol_filter(y, cfg)
        shifted = savgol_filter(np.roll(y, 1), cfg)
        # away from both boundaries the response rolls with the input
        assert np.allclose(shifted[6:-6], base[5:-7], rtol=0, atol=1e-12)

    def test_short_series_rejected(self):
        cfg = SmootherConfig(window_length=11, poly_order=3)
        with pytest.raises(ConfigurationError):
            savgol_filter(np.zeros(10), cfg)

    def test_deriv_beyond_max_rejected(self):
        cfg = SmootherConfig(window_length=11, poly_order=3, max_deriv=1)
        with pytest.raises(ConfigurationError):
            savgol_filter(np.zeros(20), cfg, deriv=2)


class TestSmoothDerivatives:
    def test_stack_shape_and_rows(self):
        t = np.arange(60.0)
        y = 1.0 - 1e-3 * t - 1e-5 * t**2
        cfg = SmootherConfig(window_length=11, poly_order=3, max_deriv=2)
        stack = smooth_derivatives(y, 1.0, cfg, 2)
        assert stack.shape == (3, 60)
        assert np.abs(stack[1] - (-1e-3 - 2e-5 * t)).max() < 1e-9
        assert np.abs(stack[2] + 2e-5).max() < 1e-9
