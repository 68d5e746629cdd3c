"""Deterministic synthetic models of the fingertip's two sensing channels.

Everything here is a pure function of (parameters, seed): identical inputs
give bit-identical outputs. These models provide ground truth for every
downstream pipeline, so they are deliberately simple but not trivial:

* The strain channel is linear in force magnitude at any fixed force angle,
  but the effective gain is modulated by a second harmonic of the angle.
  A global linear fit therefore cannot invert the map; a small MLP can.
* Retraction reads a constant per-channel offset proportional to the peak
  strain of the press, the simplest model that exhibits hysteresis.
* The vibration channel composes band-shaped noise, texture impulse trains,
  and scripted contact transients, clamped to [-1, 1].
"""

import math
from dataclasses import dataclass, field

import numpy as np

from fingertip.errors import ConfigurationError
from fingertip.seeding import rng_for
from fingertip.signals import (
    STRAIN_RATE_HZ,
    VIBRATION_RATE_HZ,
    StrainTrace,
    VibrationTrace,
    ZTrajectory,
)


@dataclass(frozen=True)
class PlanarForce:
    """2D contact force in the fingertip's lateral plane, newtons."""

    fx: float
    fy: float

    def __post_init__(self):
        if not (math.isfinite(self.fx) and math.isfinite(self.fy)):
            raise ValueError("force components must be finite")

    @property
    def magnitude(self) -> float:
        return math.hypot(self.fx, self.fy)

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy])


@dataclass(frozen=True)
class FingertipModel:
    """Force-to-strain response of the four-gauge fingertip.

    channel_gains rows are the per-channel force projection vectors (counts
    per newton); their directions double as the gauge orientations used by
    the angle-dependent gain modulation.
    """

    channel_gains: np.ndarray  # (4, 2) counts / N
    stiffness: float = 1.0 / 6.0  # N per mm of indentation depth
    hysteresis_ratio: float = 0.02
    noise_sigma: float = 2.0  # counts, per frame and channel
    gain_modulation: float = 0.25  # second-harmonic gain swing, 0 = linear

    def __post_init__(self):
        gains = np.array(self.channel_gains, dtype=np.float64)
        if gains.shape != (4, 2) or not np.all(np.isfinite(gains)):
            raise ValueError("channel_gains must be a finite (4, 2) matrix")
        gains.flags.writeable = False
        object.__setattr__(self, "channel_gains", gains)
        if not self.stiffness > 0:
            raise ValueError("stiffness must be positive")
        if not 0.0 <= self.hysteresis_ratio <= 0.2:
            raise ValueError("hysteresis_ratio must be in [0, 0.2]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.gain_modulation < 0:
            raise ValueError("gain_modulation must be >= 0")

    def response(self, forces: np.ndarray) -> np.ndarray:
        """Noise-free strain counts for force rows (n, 2) -> (n, 4)."""
        forces = np.atleast_2d(np.asarray(forces, dtype=np.float64))
        linear = forces @ self.channel_gains.T
        if self.gain_modulation == 0.0:
            return linear
        gauge_angles = np.arctan2(self.channel_gains[:, 1], self.channel_gains[:, 0])
        force_angles = np.arctan2(forces[:, 1], forces[:, 0])
        swing = np.cos(2.0 * (force_angles[:, None] - gauge_angles[None, :]))
        return linear * (1.0 + self.gain_modulation * swing)

    def noisy_frame(self, force: PlanarForce, rng: np.random.Generator) -> np.ndarray:
        """One strain frame (4 counts) for a force, with sensor noise."""
        clean = self.response(force.as_array()[None, :])[0]
        if self.noise_sigma > 0:
            clean = clean + rng.normal(0.0, self.noise_sigma, size=4)
        return clean


def default_fingertip_model(**overrides) -> FingertipModel:
    """Gauges at 0/90/180/270 degrees with slightly unequal sensitivities."""
    scales = np.array([210.0, 195.0, 205.0, 188.0])
    directions = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    params = dict(channel_gains=scales[:, None] * directions)
    params.update(overrides)
    return FingertipModel(**params)


@dataclass(frozen=True)
class RigTrajectory:
    """Scripted press-then-retract indentation at one angle and height."""

    angle_deg: float = 0.0
    contact_height_mm: float = 0.0
    step_size_mm: float = 1.5
    max_displacement_mm: float = 30.0
    dwell_s: float = 8.0

    def __post_init__(self):
        if not -50.0 <= self.angle_deg <= 50.0:
            raise ConfigurationError("angle_deg must be in [-50, 50]")
        if not 0.0 <= self.contact_height_mm <= 5.0:
            raise ConfigurationError("contact_height_mm must be in [0, 5]")
        if not self.step_size_mm > 0:
            raise ConfigurationError("step_size_mm must be positive")
        if self.max_displacement_mm < self.step_size_mm:
            raise ConfigurationError("max_displacement_mm must be >= step_size_mm")
        if not self.dwell_s > 0:
            raise ConfigurationError("dwell_s must be positive")

    def depth_sequence(self) -> tuple[np.ndarray, np.ndarray]:
        """(depths_mm, branch) per dwell: initial rest, press steps, retract.

        branch is 0 at the initial rest, +1 while pressing, -1 while
        retracting; the retract branch ends back at depth 0.
        """
        n_steps = int(self.max_displacement_mm / self.step_size_mm)
        loading = self.step_size_mm * np.arange(1, n_steps + 1)
        unloading = self.step_size_mm * np.arange(n_steps - 1, -1, -1)
        depths = np.concatenate(([0.0], loading, unloading))
        branch = np.concatenate(
            ([0], np.ones(n_steps, dtype=np.int8), -np.ones(n_steps, dtype=np.int8))
        )
        return depths, branch


@dataclass(frozen=True)
class IndentationRun:
    """Synchronized output of one scripted indentation trial."""

    strain: StrainTrace
    forces: np.ndarray  # (n_frames, 2) ground-truth (fx, fy), newtons
    depths_mm: np.ndarray  # (n_frames,)
    branch: np.ndarray  # (n_frames,) 0 rest, +1 loading, -1 unloading
    angle_deg: float
    contact_height_mm: float
    dwell_frames: int

    def force(self, index: int) -> PlanarForce:
        return PlanarForce(float(self.forces[index, 0]), float(self.forces[index, 1]))


def simulate_indentation(
    model: FingertipModel, traj: RigTrajectory, seed: int
) -> IndentationRun:
    """Run one press-and-retract trial and emit 15 Hz strain frames.

    Ground-truth force magnitude is stiffness x depth along the trajectory
    angle. Retraction frames carry the hysteresis offset, a per-channel
    shift of hysteresis_ratio x the peak strain of the press.
    """
    depths, branch = traj.depth_sequence()
    theta = math.radians(traj.angle_deg)
    direction = np.array([math.cos(theta), math.sin(theta)])

    dwell_frames = max(1, round(traj.dwell_s * STRAIN_RATE_HZ))
    depths_f = np.repeat(depths, dwell_frames)
    branch_f = np.repeat(branch, dwell_frames)
    forces = model.stiffness * depths_f[:, None] * direction[None, :]

    strain = model.response(forces)
    peak_force = model.stiffness * depths.max() * direction
    peak_strain = model.response(peak_force[None, :])[0]
    strain = strain + model.hysteresis_ratio * peak_strain * (branch_f == -1)[:, None]

    rng = rng_for(seed, "indentation", f"{traj.angle_deg:g}", f"{traj.contact_height_mm:g}")
    if model.noise_sigma > 0:
        strain = strain + rng.normal(0.0, model.noise_sigma, size=strain.shape)

    timestamps = np.arange(strain.shape[0]) / STRAIN_RATE_HZ
    return IndentationRun(
        strain=StrainTrace(channels=strain, timestamps=timestamps),
        forces=forces,
        depths_mm=depths_f,
        branch=branch_f,
        angle_deg=traj.angle_deg,
        contact_height_mm=traj.contact_height_mm,
        dwell_frames=dwell_frames,
    )


# --- vibration synthesis -----------------------------------------------

#: Log-spaced analysis band edges (Hz) shared by the material profiles.
BAND_EDGES_HZ = np.geomspace(300.0, 18000.0, 9)

#: Sliding speed at which impulse_rate is specified; the effective texture
#: event rate scales linearly with speed.
REFERENCE_SPEED_MM_S = 20.0

MATERIAL_NAMES = (
    "tpu",
    "expanded_plastic",
    "copper_tape",
    "coarse_fabric",
    "flush_fabric",
    "wax_paper",
    "textured_fabric",
)


@dataclass(frozen=True)
class MaterialProfile:
    """Spectral fingerprint of one sliding-contact material."""

    name: str
    band_gains: np.ndarray  # (8,) linear gain per band
    impulse_rate: float  # texture events / s at the reference speed
    impulse_jitter: float  # relative amplitude spread of the impulses

    def __post_init__(self):
        gains = np.array(self.band_gains, dtype=np.float64)
        if gains.shape != (len(BAND_EDGES_HZ) - 1,):
            raise ValueError(f"band_gains must have {len(BAND_EDGES_HZ) - 1} entries")
        if not np.all(np.isfinite(gains)) or np.min(gains, initial=0.0) < 0:
            raise ValueError("band_gains must be finite and >= 0")
        gains.flags.writeable = False
        object.__setattr__(self, "band_gains", gains)
        if self.impulse_rate < 0:
            raise ValueError("impulse_rate must be >= 0")
        if self.impulse_jitter < 0:
            raise ValueError("impulse_jitter must be >= 0")


def default_material_profiles() -> dict[str, MaterialProfile]:
    """Seven hand-designed profiles.

    copper_tape and wax_paper are deliberately near-twins (they differ only
    in one mid band, by under 4 dB) so the classifier's residual confusion
    concentrates on that smooth-surface pair.
    """
    table = {
        "tpu": ([0.90, 0.50, 0.22, 0.10, 0.045, 0.02, 0.01, 0.005], 30.0, 0.3),
        "expanded_plastic": ([0.50, 0.62, 0.70, 0.75, 0.70, 0.60, 0.50, 0.40], 220.0, 0.5),
        "copper_tape": ([0.08, 0.10, 0.14, 0.20, 0.32, 0.25, 0.12, 0.05], 4.0, 0.2),
        "coarse_fabric": ([0.85, 1.00, 0.60, 0.33, 0.18, 0.08, 0.035, 0.018], 420.0, 0.6),
        "flush_fabric": ([0.35, 0.50, 0.60, 0.50, 0.35, 0.20, 0.10, 0.05], 90.0, 0.4),
        "wax_paper": ([0.08, 0.10, 0.14, 0.20, 0.215, 0.25, 0.12, 0.05], 4.0, 0.2),
        "textured_fabric": ([0.15, 0.20, 0.35, 0.60, 0.75, 0.50, 0.22, 0.08], 650.0, 0.15),
    }
    return {
        name: MaterialProfile(name, np.asarray(gains), rate, jitter)
        for name, (gains, rate, jitter) in table.items()
    }


def _band_gain_per_bin(freqs: np.ndarray, band_gains: np.ndarray) -> np.ndarray:
    """Piecewise-constant per-bin gain; DC stays zero."""
    idx = np.clip(np.searchsorted(BAND_EDGES_HZ, freqs, side="right") - 1, 0, len(band_gains) - 1)
    gain = band_gains[idx]
    gain = np.where(freqs <= 0.0, 0.0, gain)
    return gain


def _shaped_noise(
    n: int, band_gains: np.ndarray, rng: np.random.Generator, scale: float
) -> np.ndarray:
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / VIBRATION_RATE_HZ)
    shaped = np.fft.irfft(spectrum * _band_gain_per_bin(freqs, band_gains), n=n)
    return scale * shaped


def _impulse_train(
    n: int,
    rate_hz: float,
    jitter: float,
    rng: np.random.Generator,
    amplitude: float,
    decay_samples: int = 48,
) -> np.ndarray:
    out = np.zeros(n)
    expected = rate_hz * n / VIBRATION_RATE_HZ
    count = int(rng.poisson(expected)) if expected > 0 else 0
    if count == 0:
        return out
    positions = np.sort(rng.integers(0, n, size=count))
    amps = amplitude * np.maximum(0.2, 1.0 + jitter * rng.standard_normal(count))
    amps *= rng.choice((-1.0, 1.0), size=count)
    np.add.at(out, positions, amps)
    kernel = np.exp(-np.arange(4 * decay_samples) / decay_samples)
    return np.convolve(out, kernel)[:n]


def synthesize_sliding(
    profile: MaterialProfile,
    duration_s: float = 0.8,
    speed_mm_s: float = REFERENCE_SPEED_MM_S,
    seed: int = 0,
) -> VibrationTrace:
    """Vibration from sliding the fingernail over a material sample."""
    if not duration_s > 0:
        raise ConfigurationError("duration_s must be positive")
    rng = rng_for(seed, "sliding", profile.name)
    n = round(duration_s * VIBRATION_RATE_HZ)
    samples = _shaped_noise(n, profile.band_gains, rng, scale=0.1)
    effective_rate = profile.impulse_rate * speed_mm_s / REFERENCE_SPEED_MM_S
    samples += _impulse_train(n, effective_rate, profile.impulse_jitter, rng, amplitude=0.22)
    return VibrationTrace(samples=np.clip(samples, -1.0, 1.0))


def _decaying_tone(
    n_total: int, start: int, amplitude: float, freq_hz: float, decay_s: float
) -> np.ndarray:
    """Damped cosine burst written into a zero array of length n_total."""
    length = min(n_total - start, round(5 * decay_s * VIBRATION_RATE_HZ))
    if length <= 0:
        return np.zeros(n_total)
    t = np.arange(length) / VIBRATION_RATE_HZ
    burst = amplitude * np.exp(-t / decay_s) * np.cos(2.0 * np.pi * freq_hz * t)
    out = np.zeros(n_total)
    out[start : start + length] = burst
    return out


def synthesize_cup_slide(
    edge_heights_mm,
    slide_speed_mm_s: float = 5.0,
    total_travel_mm: float = 21.0,
    noise_floor: float = 0.01,
    seed: int = 0,
) -> tuple[VibrationTrace, ZTrajectory]:
    """Fingernail sliding down a cup stack: bursts where Z crosses each rim.

    Z descends linearly from total_travel to 0. Each edge height inside the
    travel injects a 20 ms decaying burst whose onset matches the crossing
    time to within one vibration sample and whose amplitude is at least 10x
    the noise floor.
    """
    edges = np.asarray(edge_heights_mm, dtype=np.float64)
    if edges.size > 1 and not np.all(np.diff(edges) > 0):
        raise ConfigurationError("edge heights must be strictly increasing")
    if edges.size and (edges.min() < 0 or edges.max() > total_travel_mm):
        raise ConfigurationError(
            f"edge heights must lie within [0, {total_travel_mm}] mm"
        )
    if not 0 < noise_floor <= 0.05:
        raise ConfigurationError("noise_floor must be in (0, 0.05]")
    if not slide_speed_mm_s > 0:
        raise ConfigurationError("slide_speed_mm_s must be positive")

    rng = rng_for(seed, "cup_slide")
    duration = total_travel_mm / slide_speed_mm_s
    n = round(duration * VIBRATION_RATE_HZ)
    samples = rng.uniform(-noise_floor, noise_floor, size=n)

    base_amplitude = max(0.6, 10.0 * noise_floor / 0.9)
    for height in edges:
        onset_t = (total_travel_mm - height) / slide_speed_mm_s
        start = min(round(onset_t * VIBRATION_RATE_HZ), n - 1)
        amp = base_amplitude * (1.0 + 0.1 * rng.uniform(-1.0, 1.0))
        samples += _decaying_tone(n, start, amp, freq_hz=2000.0, decay_s=0.004)

    z_times = np.arange(math.ceil(duration / 0.02) + 1) * 0.02
    z_mm = total_travel_mm - slide_speed_mm_s * z_times
    trace = VibrationTrace(samples=np.clip(samples, -1.0, 1.0))
    return trace, ZTrajectory(times=z_times, z_mm=z_mm)


CONTENT_CLASSES = ("empty", "rubber_bands", "screws")

SHAKE_NOISE_FLOOR = 0.004


def synthesize_shaking(
    content: str,
    duration_s: float = 5.6,
    shake_freq_hz: float = 0.67,
    seed: int = 0,
) -> VibrationTrace:
    """Vibration from shaking a box: one content transient per half period.

    screws land as clusters of sharp broadband clicks, rubber bands as a
    single soft low-band thud, and an empty box stays at the noise floor.
    """
    if content not in CONTENT_CLASSES:
        raise ConfigurationError(
            f"unknown content {content!r}; expected one of {CONTENT_CLASSES}"
        )
    if not duration_s > 0:
        raise ConfigurationError("duration_s must be positive")
    if not shake_freq_hz > 0:
        raise ConfigurationError("shake_freq_hz must be positive")

    rng = rng_for(seed, "shaking", content)
    n = round(duration_s * VIBRATION_RATE_HZ)
    samples = rng.uniform(-SHAKE_NOISE_FLOOR, SHAKE_NOISE_FLOOR, size=n)

    half_period = 1.0 / (2.0 * shake_freq_hz)
    n_events = int(duration_s / half_period)
    for k in range(1, n_events + 1):
        t_event = k * half_period * (1.0 + 0.03 * rng.uniform(-1.0, 1.0))
        start = round(t_event * VIBRATION_RATE_HZ)
        if start >= n:
            break
        if content == "screws":
            for _ in range(int(rng.integers(2, 5))):
                click_start = start + int(rng.integers(0, round(0.06 * VIBRATION_RATE_HZ)))
                if click_start >= n:
                    continue
                length = min(n - click_start, round(0.0015 * VIBRATION_RATE_HZ))
                click = rng.standard_normal(length)
                click *= np.exp(-np.arange(length) / (0.0005 * VIBRATION_RATE_HZ))
                amp = 0.45 * max(0.4, 1.0 + 0.3 * rng.standard_normal())
                samples[click_start : click_start + length] += amp * click
        elif content == "rubber_bands":
            amp = 0.12 * max(0.5, 1.0 + 0.2 * rng.standard_normal())
            samples += _decaying_tone(n, start, amp, freq_hz=400.0, decay_s=0.010)

    return VibrationTrace(samples=np.clip(samples, -1.0, 1.0))
