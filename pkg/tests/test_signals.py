"""Signal core: STFT against the naive DFT oracle, envelope, synchronization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fingertip.errors import (
    ConfigurationError,
    ExtrapolationError,
    InsufficientSamplesError,
)
from fingertip.signals import (
    SyncedSample,
    VibrationTrace,
    ZTrajectory,
    envelope,
    stft,
    synchronize,
    taper_window,
)
from oracles import naive_dft_magnitudes


def make_trace(samples, rate=44100.0, start=0.0):
    return VibrationTrace(np.asarray(samples, dtype=np.float64), rate, start)


class TestTraceTypes:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            make_trace([0.0, np.nan])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            make_trace([0.0, 1.5])

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            make_trace([0.0], rate=0.0)

    def test_duration(self):
        assert make_trace(np.zeros(441)).duration == pytest.approx(0.01)

    def test_ztrajectory_requires_increasing_times(self):
        with pytest.raises(ValueError):
            ZTrajectory(times=[0.0, 0.0], z_mm=[1.0, 2.0])

    def test_synced_sample_rejects_negative_intensity(self):
        with pytest.raises(ValueError):
            SyncedSample(time=0.0, z_mm=1.0, intensity=-0.1)


class TestStft:
    def test_zero_trace_gives_zero_magnitudes(self):
        spec = stft(make_trace(np.zeros(2048)), 512, 256, "hann")
        assert spec.magnitudes.shape == (7, 257)
        assert np.all(spec.magnitudes == 0.0)

    def test_bin_centered_sinusoid_peaks_at_its_bin(self):
        fs = 44100.0
        window = 512
        k = 37
        t = np.arange(4096) / fs
        trace = make_trace(0.9 * np.sin(2 * np.pi * (k * fs / window) * t), fs)
        spec = stft(trace, window, window, "rectangular")
        for frame in spec.magnitudes:
            assert np.argmax(frame) == k
            others = np.delete(frame, k)
            assert np.max(others) < 1e-9 * frame[k]

    def test_impulse_spreads_equally_over_bins(self):
        samples = np.zeros(256)
        samples[0] = 1.0
        spec = stft(make_trace(samples), 256, 256, "rectangular")
        assert np.allclose(spec.magnitudes[0], 1.0, rtol=1e-12)

    def test_matches_naive_dft_oracle(self):
        rng = np.random.default_rng(1234)
        for _ in range(10):
            n = int(rng.integers(600, 4097))
            window = int(rng.choice([64, 128, 256, 512]))
            hop = int(rng.choice([window // 2, window]))
            taper_name = str(rng.choice(["rectangular", "hann"]))
            samples = rng.uniform(-1, 1, n)
            spec = stft(make_trace(samples), window, hop, taper_name)
            oracle = naive_dft_magnitudes(samples, window, hop, taper_window(taper_name, window))
            assert np.allclose(spec.magnitudes, oracle, rtol=1e-9, atol=1e-9)

    def test_parseval_rectangular(self):
        rng = np.random.default_rng(7)
        samples = rng.uniform(-1, 1, 2048)
        window = 512
        spec = stft(make_trace(samples), window, window, "rectangular")
        for f, frame in enumerate(spec.magnitudes):
            chunk = samples[f * window : (f + 1) * window]
            # One-sided spectrum: interior bins appear twice in the full DFT.
            weights = np.full(spec.n_bins, 2.0)
            weights[0] = weights[-1] = 1.0
            spectral = np.sum(weights * frame**2)
            assert spectral == pytest.approx(window * np.sum(chunk**2), rel=1e-9)

    def test_frame_count_formula(self):
        spec = stft(make_trace(np.zeros(1000)), 256, 128)
        assert spec.n_frames == (1000 - 256) // 128 + 1

    def test_short_trace_raises(self):
        with pytest.raises(InsufficientSamplesError, match="insufficient samples"):
            stft(make_trace(np.zeros(100)), 256, 128)

    def test_non_power_of_two_window_raises(self):
        with pytest.raises(ConfigurationError):
            stft(make_trace(np.zeros(1000)), 300, 128)

    def test_unknown_taper_raises(self):
        with pytest.raises(ConfigurationError):
            stft(make_trace(np.zeros(1000)), 256, 128, window="hamming")


class TestEnvelope:
    def test_constant_trace_converges_to_magnitude(self):
        env = envelope(make_trace(np.full(1000, -0.25)), 256)
        assert np.allclose(env[255:], 0.25, rtol=1e-12)
        assert env[0] == pytest.approx(0.25 / 16)  # sqrt(1/256) warm-up

    def test_zero_trace(self):
        assert np.all(envelope(make_trace(np.zeros(500)), 64) == 0.0)

    def test_square_wave_rms_is_amplitude(self):
        wave = 0.5 * np.tile([1.0, -1.0], 500)
        env = envelope(make_trace(wave), 128)
        assert np.allclose(env[127:], 0.5, rtol=1e-12)

    def test_empty_trace_gives_empty_output(self):
        assert envelope(make_trace([]), 64).shape == (0,)

    def test_length_preserved(self):
        assert envelope(make_trace(np.zeros(123)), 999).shape == (123,)

    @given(
        delay=st.integers(min_value=0, max_value=64),
        window=st.integers(min_value=1, max_value=32),
        data=st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=64),
    )
    @settings(deadline=None, max_examples=60)
    def test_shift_equivariance(self, delay, window, data):
        base = np.asarray(data)
        delayed = np.concatenate([np.zeros(delay), base])
        env_base = envelope(make_trace(base), window)
        env_delayed = envelope(make_trace(delayed), window)
        assert np.array_equal(env_delayed[delay:], env_base)


class TestSynchronize:
    def test_constant_height(self):
        z = ZTrajectory(times=[0.0, 1.0], z_mm=[10.0, 10.0])
        series = synchronize(np.ones(100), 200.0, z)
        assert len(series) == 100
        assert np.all(series.z_mm == 10.0)

    def test_linear_height_midpoint(self):
        # 0 -> 21 mm over the duration spanned by 101 samples at 100 Hz.
        z = ZTrajectory(times=[0.0, 1.0], z_mm=[0.0, 21.0])
        series = synchronize(np.ones(101), 100.0, z)
        assert series.z_mm[50] == pytest.approx(10.5)

    def test_plateau_is_carried(self):
        z = ZTrajectory(
            times=[0.0, 0.3, 0.6, 0.8, 1.0],
            z_mm=[0.0, 6.0, 6.0, 10.0, 14.0],
        )

        def z_oracle(t):
            # 5-point piecewise-linear interpolation, written out by hand.
            for (t0, z0), (t1, z1) in zip(
                [(0.0, 0.0), (0.3, 6.0), (0.6, 6.0), (0.8, 10.0)],
                [(0.3, 6.0), (0.6, 6.0), (0.8, 10.0), (1.0, 14.0)],
            ):
                if t0 <= t <= t1:
                    return z0 + (z1 - z0) * (t - t0) / (t1 - t0)
            raise AssertionError

        series = synchronize(np.ones(101), 100.0, z)
        for i in (0, 31, 45, 59, 70, 85, 100):
            assert series.z_mm[i] == pytest.approx(z_oracle(i / 100.0))
        pause = series.z_mm[(series.times >= 0.3) & (series.times <= 0.6)]
        assert np.allclose(pause, 6.0)

    def test_extrapolation_rejected(self):
        z = ZTrajectory(times=[0.0, 0.5], z_mm=[0.0, 5.0])
        with pytest.raises(ExtrapolationError, match="extrapolation required"):
            synchronize(np.ones(100), 100.0, z)

    def test_monotone_z_preserved(self):
        rng = np.random.default_rng(3)
        times = np.cumsum(rng.uniform(0.01, 0.2, 20))
        z_values = np.cumsum(rng.uniform(0.0, 2.0, 20))
        z = ZTrajectory(times=times, z_mm=z_values)
        series = synchronize(
            np.ones(50), 50.0 / (times[-1] - times[0]), z, start_time=times[0]
        )
        assert np.all(np.diff(series.z_mm) >= 0)

    def test_output_pairs_lengths(self):
        z = ZTrajectory(times=[0.0, 1.0], z_mm=[0.0, 1.0])
        series = synchronize(np.arange(10) / 10.0, 100.0, z)
        assert len(series) == 10
        assert series[3].intensity == pytest.approx(0.3)
