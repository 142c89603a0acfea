"""Windowed DFT, periodogram, Bartlett and Welch PSD estimators."""

import numpy as np
import pytest

from kneecap import (
    ConfigurationError,
    CurvatureSeries,
    DegeneratePhaseError,
    DomainError,
    PhasePartition,
    WelchConfig,
    WindowSpec,
    bartlett_psd,
    default_segment_len,
    normalization_constant,
    periodogram,
    phase_psd,
    psd_windowed,
    signal_energy,
    signal_power,
    welch_psd,
    window_coefficients,
    windowed_dft,
)


def direct_dft(x, r):
    n = len(x)
    k = np.arange(n)
    ph = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return ph @ (x * r)


class TestWindows:
    def test_rectangular(self):
        r = window_coefficients(WindowSpec("rectangular", 4))
        assert np.array_equal(r, np.ones(4))

    def test_hann_five_points(self):
        r = window_coefficients(WindowSpec("hann", 5))
        assert np.allclose(r, [0.0, 0.5, 1.0, 0.5, 0.0], atol=1e-15)

    def test_hann_too_short_rejected(self):
        with pytest.raises(ConfigurationError):
            WindowSpec("hann", 2)
        with pytest.raises(ConfigurationError):
            WindowSpec("hann", 1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigurationError):
            WindowSpec("hamming", 8)

    def test_normalization_constants(self):
        assert normalization_constant(np.ones(16)) == 4.0
        r = window_coefficients(WindowSpec("hann", 5))
        assert normalization_constant(r) == pytest.approx(np.sqrt(1.5), rel=1e-15)
        assert normalization_constant(np.array([3.0])) == 3.0

    def test_zero_window_rejected(self):
        with pytest.raises(DomainError):
            normalization_constant(np.zeros(8))


class TestWindowedDft:
    def test_impulse_rectangular(self):
        x = np.zeros(16)
        x[0] = 1.0
        X = windowed_dft(x, np.ones(16))
        assert np.allclose(X, np.ones(16), atol=1e-12)

    def test_on_bin_cosine(self):
        n = np.arange(64)
        x = np.cos(2 * np.pi * n * 4 / 64)
        X = windowed_dft(x, np.ones(64))
        mag = np.abs(X)
        assert mag[4] == pytest.approx(32.0, rel=1e-12)
        assert mag[60] == pytest.approx(32.0, rel=1e-12)
        others = np.delete(mag, [4, 60])
        assert others.max() < 1e-9

    def test_zero_window_annihilates(self):
        rng = np.random.default_rng(0)
        X = windowed_dft(rng.normal(size=32), np.zeros(32))
        assert np.array_equal(X, np.zeros(32, dtype=complex))

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(1)
        for n in (17, 64, 100):
            x = rng.normal(size=n)
            r = window_coefficients(WindowSpec("hann", n))
            fast = windowed_dft(x, r)
            slow = direct_dft(x, r)
            assert np.abs(fast - slow).max() < 1e-9 * max(np.abs(slow).max(), 1.0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(DomainError):
            windowed_dft(np.ones(8), np.ones(9))


class TestEnergyPower:
    def test_dc_parseval(self):
        x = np.ones(8)
        X = windowed_dft(x, np.ones(8))
        C = normalization_constant(np.ones(8))
        assert signal_energy(X, C, 1.0) == pytest.approx(8.0, rel=1e-12)
        assert signal_power(X, C, 8, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_zero_signal(self):
        X = windowed_dft(np.zeros(16), np.ones(16))
        assert signal_energy(X, 4.0, 1.0) == 0.0
        assert signal_power(X, 4.0, 16, 1.0) == 0.0

    def test_power_equals_mean_square(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=256)
        X = windowed_dft(x, np.ones(256))
        C = normalization_constant(np.ones(256))
        P = signal_power(X, C, 256, 1.0)
        assert P == pytest.approx(np.mean(x**2), rel=1e-9)


class TestPeriodogram:
    def test_impulse_density(self):
        x = np.zeros(16)
        x[0] = 1.0
        est = periodogram(x)
        # two-sided level 1/16; one-sided doubles interior bins only
        assert est.density[0] == pytest.approx(1 / 16, rel=1e-12)
        assert est.density[-1] == pytest.approx(1 / 16, rel=1e-12)
        assert np.allclose(est.density[1:-1], 2 / 16, rtol=1e-12)
        assert est.total_power == pytest.approx(1 / 16, rel=1e-12)

    def test_total_power_is_mean_square(self):
        rng = np.random.default_rng(3)
        for n in (64, 255, 256, 1024):
            x = rng.normal(size=n)
            est = periodogram(x)
            assert est.total_power == pytest.approx(np.mean(x**2), rel=1e-9)

    def test_equivalence_with_rectangular_windowed(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=128)
        a = periodogram(x)
        b = psd_windowed(x, WindowSpec("rectangular", 128))
        rel = np.abs(a.density - b.density) / np.maximum(b.density, 1e-300)
        assert rel.max() < 1e-9

    def test_white_noise_total_power(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=4096)
        est = periodogram(x)
        assert abs(est.total_power - 1.0) < 0.05

    def test_frequency_axis(self):
        for n in (49, 50, 256):
            est = periodogram(np.sin(np.arange(float(n))), dt=0.5)
            kmax = n // 2
            assert np.array_equal(est.freq, np.arange(kmax + 1) / (n * 0.5))
            assert np.allclose(est.freq * n * 0.5, np.arange(kmax + 1), rtol=1e-12)
            # Nyquist bin present exactly when n is even
            if n % 2 == 0:
                assert est.freq[-1] == pytest.approx(1.0, rel=1e-12)
            else:
                assert est.freq[-1] < 1.0
        est = periodogram(np.sin(np.arange(2048.0)))
        assert np.array_equal(est.freq * 2048.0, np.arange(1025.0))


class TestPsdWindowed:
    def test_on_bin_cosine_total_power(self):
        n = np.arange(256)
        x = np.cos(2 * np.pi * 8 * n / 256)
        est = psd_windowed(x, WindowSpec("rectangular", 256))
        assert est.total_power == pytest.approx(0.5, rel=1e-9)

    def test_zero_input(self):
        est = psd_windowed(np.zeros(64), WindowSpec("hann", 64))
        assert np.array_equal(est.density, np.zeros(33))
        assert est.total_power == 0.0

    def test_density_nonnegative(self):
        rng = np.random.default_rng(6)
        for kind in ("rectangular", "hann"):
            x = rng.normal(size=100)
            est = psd_windowed(x, WindowSpec(kind, 100))
            assert np.all(est.density >= 0.0)


class TestBartlett:
    def test_single_segment_is_periodogram(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=200)
        a = bartlett_psd(x, 1)
        b = periodogram(x)
        assert np.allclose(a.density, b.density, rtol=1e-12)

    def test_matches_welch_same_path(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=1024)
        a = bartlett_psd(x, 8)
        b = welch_psd(x[: 8 * 128], 128, 0.0, kind="rectangular", detrend=False)
        assert np.array_equal(a.density, b.density)
        assert a.total_power == b.total_power

    def test_variance_reduction(self):
        # averaging K segment periodograms cuts per-bin variance by ~K
        rng = np.random.default_rng(9)
        K, n = 16, 8192
        single = []
        averaged = []
        for _ in range(200):
            x = rng.normal(size=n)
            averaged.append(bartlett_psd(x, K).density[1:-1])
            single.append(periodogram(x[: n // K]).density[1:-1])
        var_avg = np.var(np.array(averaged), axis=0).mean()
        var_one = np.var(np.array(single), axis=0).mean()
        ratio = var_one / var_avg
        assert K / 2 < ratio < K * 2

    def test_short_segments_rejected(self):
        with pytest.raises(ConfigurationError):
            bartlett_psd(np.ones(16), 8)


class TestWelch:
    def test_one_segment_rect_equals_windowed(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=256)
        a = welch_psd(x, 256, 0.0, kind="rectangular", detrend=False)
        b = psd_windowed(x, WindowSpec("rectangular", 256))
        assert np.array_equal(a.density, b.density)

    def test_identity_chain(self):
        rng = np.random.default_rng(11)
        for n in (64, 255, 256, 1024):
            x = rng.normal(size=n)
            p = periodogram(x)
            w = psd_windowed(x, WindowSpec("rectangular", n))
            v = welch_psd(x, n, 0.0, kind="rectangular", detrend=False)
            scale = np.maximum(p.density, 1e-300)
            assert (np.abs(p.density - w.density) / scale).max() < 1e-9
            assert (np.abs(p.density - v.density) / scale).max() < 1e-9

    def test_sine_peak_and_power(self):
        n = np.arange(2048)
        x = np.sin(2 * np.pi * 0.05 * n)
        est = welch_psd(x, default_segment_len(2048), 0.5, kind="hann")
        peak = est.freq[np.argmax(est.density)]
        assert abs(peak - 0.05) <= est.df / 2 + 1e-12
        assert abs(est.total_power - 0.5) < 0.01

    def test_white_noise_flat_density(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=8192)
        est = welch_psd(x, default_segment_len(8192), 0.5, kind="hann")
        # two-sided level 1.0 means doubled one-sided interior bins near 2.0
        interior = est.density[1:-1]
        assert abs(interior.mean() - 2.0) / 2.0 < 0.05

    def test_dc_isolation_detrend_off(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=128)
        a = welch_psd(x, 128, 0.0, kind="rectangular", detrend=False)
        b = welch_psd(x + 5.0, 128, 0.0, kind="rectangular", detrend=False)
        assert not np.isclose(a.density[0], b.density[0])
        assert np.allclose(a.density[1:], b.density[1:], rtol=1e-9)

    def test_dc_isolation_detrend_on(self):
        rng = np.random.default_rng(14)
        x = rng.normal(size=512)
        a = welch_psd(x, 128, 0.5, kind="hann", detrend=True)
        b = welch_psd(x + 5.0, 128, 0.5, kind="hann", detrend=True)
        assert np.allclose(a.density, b.density, rtol=1e-9, atol=1e-300)

    def test_segment_longer_than_series_rejected(self):
        with pytest.raises(ConfigurationError):
            welch_psd(np.ones(64), 65, 0.5)

    def test_bad_overlap_rejected(self):
        with pytest.raises(ConfigurationError):
            welch_psd(np.arange(64.0), 16, 1.0)
        with pytest.raises(ConfigurationError):
            welch_psd(np.arange(64.0), 16, -0.1)

    def test_default_segment_len(self):
        assert default_segment_len(2048) == 455
        assert default_segment_len(600) == 133
        assert default_segment_len(20) == 8


def quiet_osc_quiet(seed):
    rng = np.random.default_rng(seed)
    t = np.arange(250.0)
    osc = np.sin(2 * np.pi * t / 25) + np.sin(2 * np.pi * t / 40)
    x = np.concatenate(
        [rng.normal(size=200) * 1e-8, osc * 1e-5, rng.normal(size=150) * 1e-8]
    )
    return x


class TestPhasePsd:
    def partition(self, onset, knee, n):
        return PhasePartition(
            onset_index=onset,
            knee_index=knee,
            onset_cycle=float(onset),
            knee_cycle=float(knee),
            cac=np.zeros(n - 1),
        )

    def test_three_estimates_returned(self):
        x = quiet_osc_quiet(0)
        curv = CurvatureSeries(cycle=np.arange(600.0), kappa=x, dt=1.0)
        p1, p2, p3 = phase_psd(curv, self.partition(200, 450, 600))
        assert p2.total_power > 100 * p1.total_power
        assert p2.total_power > 100 * p3.total_power

    def test_short_phase_raises_with_phase_number(self):
        x = quiet_osc_quiet(1)
        curv = CurvatureSeries(cycle=np.arange(600.0), kappa=x, dt=1.0)
        with pytest.raises(DegeneratePhaseError) as exc:
            phase_psd(curv, self.partition(5, 450, 600))
        assert exc.value.phase == 1

    def test_skip_degenerate_leaves_none_slot(self):
        x = quiet_osc_quiet(2)
        curv = CurvatureSeries(cycle=np.arange(600.0), kappa=x, dt=1.0)
        out = phase_psd(curv, self.partition(5, 450, 600), skip_degenerate=True)
        assert out[0] is None
        assert out[1] is not None and out[2] is not None

    def test_segment_len_shrinks_to_phase(self):
        x = quiet_osc_quiet(3)
        curv = CurvatureSeries(cycle=np.arange(600.0), kappa=x, dt=1.0)
        cfg = WelchConfig(segment_len=300, overlap=0.5, window="hann", detrend=True)
        p1, p2, p3 = phase_psd(curv, self.partition(200, 450, 600), cfg)
        # phase 1 has 200 samples; a 300-sample segment cannot fit and is
        # shrunk rather than rejected
        assert len(p1.freq) <= 151


class TestWelchConfig:
    def test_defaults_valid(self):
        cfg = WelchConfig()
        assert cfg.overlap == 0.5
        assert cfg.window == "hann"
        assert cfg.detrend

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigurationError):
            WelchConfig(overlap=1.5)
        with pytest.raises(ConfigurationError):
            WelchConfig(window="flat-top")
        with pytest.raises(ConfigurationError):
            WelchConfig(segment_len=2)
