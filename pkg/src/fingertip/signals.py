"""Signal types, STFT, envelope extraction, and dual-rate synchronization.

Two sensor streams run through everything here: a 44.1 kHz vibration channel
and a 15 Hz four-channel strain stream. All types are immutable values and
all operations are pure functions, so concurrent use needs no locking.
"""

from dataclasses import dataclass, field

import numpy as np

from fingertip import _backend
from fingertip.errors import (
    ConfigurationError,
    ExtrapolationError,
    InsufficientSamplesError,
)

VIBRATION_RATE_HZ = 44100.0
STRAIN_RATE_HZ = 15.0

#: Default moving-RMS window for the intensity envelope: 256 samples is
#: about 5.8 ms at 44.1 kHz, long enough to be sign-free and smooth, short
#: enough not to blur distinct contact bursts together.
DEFAULT_RMS_WINDOW = 256

TAPERS = ("rectangular", "hann")


def _as_float_array(values, name: str) -> np.ndarray:
    # Always copy: the array gets frozen, and freezing a caller's buffer
    # would be a surprising side effect.
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class VibrationTrace:
    """Contact-microphone amplitude samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: float = VIBRATION_RATE_HZ
    start_time: float = 0.0

    def __post_init__(self):
        samples = _as_float_array(self.samples, "samples")
        if samples.size and float(np.max(np.abs(samples))) > 1.0 + 1e-12:
            raise ValueError("samples must lie in [-1, 1]")
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self)) / self.sample_rate


@dataclass(frozen=True)
class StrainFrame:
    """One 15 Hz sample of the four strain-gauge channels (raw counts)."""

    channels: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        channels = _as_float_array(self.channels, "channels")
        if channels.shape != (4,):
            raise ValueError("exactly 4 strain channels required")
        object.__setattr__(self, "channels", channels)


@dataclass(frozen=True)
class StrainTrace:
    """Time-ordered strain frames, stored column-wise for vector math."""

    channels: np.ndarray  # (n_frames, 4)
    timestamps: np.ndarray  # (n_frames,)
    sample_rate: float = STRAIN_RATE_HZ

    def __post_init__(self):
        channels = np.array(self.channels, dtype=np.float64)
        timestamps = _as_float_array(self.timestamps, "timestamps")
        if channels.ndim != 2 or channels.shape[1] != 4:
            raise ValueError("channels must have shape (n, 4)")
        if channels.shape[0] != timestamps.shape[0]:
            raise ValueError("channels and timestamps disagree in length")
        if not np.all(np.isfinite(channels)):
            raise ValueError("channels must be finite")
        if timestamps.size > 1 and not np.all(np.diff(timestamps) > 0):
            raise ValueError("timestamps must be strictly increasing")
        channels.flags.writeable = False
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "timestamps", timestamps)

    def __len__(self) -> int:
        return int(self.channels.shape[0])

    def frame(self, index: int) -> StrainFrame:
        return StrainFrame(self.channels[index], float(self.timestamps[index]))


@dataclass(frozen=True)
class Spectrogram:
    """STFT magnitude frames (frames x bins) plus the transform geometry."""

    magnitudes: np.ndarray
    window_size: int
    hop: int
    sample_rate: float
    start_time: float = 0.0

    def __post_init__(self):
        mags = np.array(self.magnitudes, dtype=np.float64)
        if mags.ndim != 2:
            raise ValueError("magnitudes must be 2-D (frames x bins)")
        if mags.shape[1] != self.window_size // 2 + 1:
            raise ValueError("bin count must equal window_size/2 + 1")
        if mags.size and (not np.all(np.isfinite(mags)) or np.min(mags) < 0):
            raise ValueError("magnitudes must be finite and non-negative")
        mags.flags.writeable = False
        object.__setattr__(self, "magnitudes", mags)

    @property
    def n_frames(self) -> int:
        return int(self.magnitudes.shape[0])

    @property
    def n_bins(self) -> int:
        return int(self.magnitudes.shape[1])

    def frame_times(self) -> np.ndarray:
        """Start time of each analysis frame."""
        return self.start_time + np.arange(self.n_frames) * self.hop / self.sample_rate

    def bin_frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.window_size, d=1.0 / self.sample_rate)


@dataclass(frozen=True)
class ZTrajectory:
    """Robot height over time: (timestamp s, z mm) samples."""

    times: np.ndarray
    z_mm: np.ndarray

    def __post_init__(self):
        times = _as_float_array(self.times, "times")
        z_mm = _as_float_array(self.z_mm, "z_mm")
        if times.shape != z_mm.shape:
            raise ValueError("times and z_mm disagree in length")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "z_mm", z_mm)

    def z_at(self, t) -> np.ndarray:
        """Linearly interpolated height; refuses to extrapolate."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.times.size == 0:
            raise ExtrapolationError("empty trajectory")
        if t.size and (t.min() < self.times[0] or t.max() > self.times[-1]):
            raise ExtrapolationError(
                f"extrapolation required: queried [{t.min():g}, {t.max():g}] s "
                f"outside [{self.times[0]:g}, {self.times[-1]:g}] s"
            )
        return np.interp(t, self.times, self.z_mm)


@dataclass(frozen=True)
class SyncedSample:
    """One intensity sample paired with the interpolated robot height."""

    time: float
    z_mm: float
    intensity: float

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be >= 0")


@dataclass(frozen=True)
class SyncedSeries:
    """Sequence of SyncedSample stored as parallel arrays."""

    times: np.ndarray
    z_mm: np.ndarray
    intensity: np.ndarray

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def __getitem__(self, index: int) -> SyncedSample:
        return SyncedSample(
            float(self.times[index]),
            float(self.z_mm[index]),
            float(self.intensity[index]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def taper_window(name: str, window_size: int) -> np.ndarray:
    """Taper coefficients; hann is periodic, as usual for spectral analysis."""
    if name == "rectangular":
        return np.ones(window_size)
    if name == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(window_size) / window_size)
    raise ConfigurationError(f"unknown taper {name!r}; expected one of {TAPERS}")


def stft(
    trace: VibrationTrace,
    window_size: int = 1024,
    hop: int = 512,
    window: str = "hann",
) -> Spectrogram:
    """Short-time Fourier transform magnitudes.

    Frames are non-centered and start at multiples of ``hop``; the frame
    count is floor((n - window_size) / hop) + 1. Magnitudes are the modulus
    of the unnormalized DFT of each tapered frame, one-sided.
    """
    if window_size < 2 or window_size & (window_size - 1):
        raise ConfigurationError(
            f"window_size must be a power of two >= 2, got {window_size}"
        )
    if not 0 < hop <= window_size:
        raise ConfigurationError(f"hop must be in (0, window_size], got {hop}")
    n = len(trace)
    if n < window_size:
        raise InsufficientSamplesError(
            f"insufficient samples: trace has {n}, window needs {window_size}"
        )
    taper = taper_window(window, window_size)
    n_frames = (n - window_size) // hop + 1
    frames = np.lib.stride_tricks.sliding_window_view(trace.samples, window_size)
    frames = frames[:: hop][:n_frames]
    mags = np.abs(np.fft.rfft(frames * taper, axis=1))
    return Spectrogram(
        magnitudes=mags,
        window_size=window_size,
        hop=hop,
        sample_rate=trace.sample_rate,
        start_time=trace.start_time,
    )


def envelope(trace: VibrationTrace, rms_window: int = DEFAULT_RMS_WINDOW) -> np.ndarray:
    """Intensity envelope: moving RMS over a trailing window.

    The window is zero-padded before the first sample, so the output has the
    same length as the input and delaying the input delays the output exactly.
    """
    if rms_window < 1:
        raise ConfigurationError(f"rms_window must be >= 1, got {rms_window}")
    return _backend.moving_rms(trace.samples, rms_window)


def synchronize(
    intensity: np.ndarray,
    sample_rate: float,
    z: ZTrajectory,
    start_time: float = 0.0,
) -> SyncedSeries:
    """Pair every intensity sample with the robot height at its timestamp.

    The trajectory must span the intensity time range; only interpolation is
    supported, never extrapolation.
    """
    intensity = np.asarray(intensity, dtype=np.float64)
    if intensity.size and intensity.min() < 0:
        raise ValueError("intensity values must be >= 0")
    times = start_time + np.arange(intensity.shape[0]) / sample_rate
    z_values = z.z_at(times) if times.size else np.empty(0)
    return SyncedSeries(times=times, z_mm=np.asarray(z_values), intensity=intensity)
