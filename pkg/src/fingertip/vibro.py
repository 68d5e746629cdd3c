"""Vibrotactile inference: features, classifiers, and burst-event detection.

Three consumers share this module:

* material identification from sliding contact (7-way),
* in-box content identification from shaking (3-way, majority-voted
  over a 10 Hz prediction stream),
* cup-edge detection while descending a stack (envelope -> threshold ->
  temporal clustering -> height lookup).
"""

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from fingertip import _backend
from fingertip.errors import ConfigurationError, InsufficientSamplesError
from fingertip.mlp import (
    Dataset,
    MlpModel,
    TrainConfig,
    forward,
    init_mlp,
    load_model,
    one_hot,
    save_model,
    train,
)
from fingertip.seeding import rng_for
from fingertip.signals import (
    DEFAULT_RMS_WINDOW,
    Spectrogram,
    VibrationTrace,
    ZTrajectory,
    envelope,
    stft,
)

#: Fraction of a window's magnitude ceiling used as the log floor; relative
#: so features are exactly invariant to overall amplitude scaling.
LOG_FLOOR_RATIO = 1e-10


@dataclass(frozen=True)
class FeatureConfig:
    """Geometry of the spectrogram windows fed to a classifier."""

    stft_window: int = 256
    stft_hop: int = 128
    window_length: int = 6  # spectrogram frames per feature window
    window_hop: int = 3
    taper: str = "hann"

    def __post_init__(self):
        if self.window_length < 1 or self.window_hop < 1:
            raise ConfigurationError("window_length and window_hop must be >= 1")

    @property
    def feature_dim(self) -> int:
        return self.window_length * (self.stft_window // 2 + 1)


#: Sliding-contact material pipeline: short windows, fine hop.
MATERIAL_FEATURES = FeatureConfig(stft_window=256, stft_hop=128, window_length=10, window_hop=5)

#: Shaking pipeline: 86-frame windows over a long recording.
SHAKE_FEATURES = FeatureConfig(stft_window=128, stft_hop=64, window_length=86, window_hop=43)

MATERIAL_ARCH_HIDDEN = (128,)
SHAKE_ARCH_HIDDEN = (128, 64)

DEFAULT_MATERIAL_TRAIN = TrainConfig(
    learning_rate=2e-2, epochs=40, batch_size=128, seed=11, loss="cross_entropy"
)
DEFAULT_SHAKE_TRAIN = TrainConfig(
    learning_rate=1e-2, epochs=12, batch_size=64, seed=13, loss="cross_entropy"
)


@dataclass(frozen=True)
class FeatureWindow:
    """Normalized log-magnitude spectrogram slice."""

    frames: np.ndarray  # (window_length, bins)
    offset: int  # index of the first spectrogram frame

    def flat(self) -> np.ndarray:
        return self.frames.ravel()


def _normalize_window(mags: np.ndarray) -> np.ndarray:
    ceiling = float(mags.max())
    floor = LOG_FLOOR_RATIO * ceiling if ceiling > 0 else 1.0
    logs = np.log(mags + floor)
    return logs - logs.mean()


def windows_from_spectrogram(spec: Spectrogram, config: FeatureConfig) -> list[FeatureWindow]:
    """Fixed-length window segmentation with per-window log normalization."""
    n = spec.n_frames
    if n < config.window_length:
        raise InsufficientSamplesError(
            f"insufficient samples: {n} spectrogram frames, window needs "
            f"{config.window_length}"
        )
    out = []
    for start in range(0, n - config.window_length + 1, config.window_hop):
        mags = spec.magnitudes[start : start + config.window_length]
        out.append(FeatureWindow(frames=_normalize_window(mags), offset=start))
    return out


def extract_material_features(
    trace: VibrationTrace, config: FeatureConfig = MATERIAL_FEATURES
) -> list[FeatureWindow]:
    """STFT, then fixed-length windows with log-magnitude normalization."""
    spec = stft(trace, config.stft_window, config.stft_hop, config.taper)
    return windows_from_spectrogram(spec, config)


# --- event detection -----------------------------------------------------


@dataclass(frozen=True)
class DetectConfig:
    """Threshold and clustering parameters for burst-event detection.

    tau may be left None and derived per run from a noise-floor recording
    via calibrate_threshold; merge_gap and min_duration bridge noise-split
    bursts and drop single-sample glitches.
    """

    tau: float | None = None
    merge_gap_s: float = 0.010
    min_duration_s: float = 0.005
    rms_window: int = DEFAULT_RMS_WINDOW
    tau_factor: float = 6.0

    def __post_init__(self):
        if self.tau is not None and self.tau < 0:
            raise ConfigurationError("tau must be >= 0")
        if self.merge_gap_s < 0 or self.min_duration_s < 0:
            raise ConfigurationError("merge_gap_s and min_duration_s must be >= 0")
        if self.tau_factor <= 0:
            raise ConfigurationError("tau_factor must be positive")

    def require_tau(self) -> float:
        if self.tau is None:
            raise ConfigurationError("tau is unset; calibrate it from a noise recording")
        return self.tau


def calibrate_threshold(noise_trace: VibrationTrace, cfg: DetectConfig) -> float:
    """tau_factor x the median envelope of a contact-free recording."""
    env = envelope(noise_trace, cfg.rms_window)
    if env.size == 0:
        raise InsufficientSamplesError("noise recording is empty")
    return cfg.tau_factor * float(np.median(env))


def binarize(intensity: np.ndarray, tau: float) -> np.ndarray:
    """B(t) = 1 where the intensity reaches tau (inclusive)."""
    if tau < 0:
        raise ConfigurationError("tau must be >= 0")
    return (np.asarray(intensity) >= tau).astype(np.uint8)


@dataclass(frozen=True)
class EventWindow:
    """Detected contact burst; sample indices are [onset, offset)."""

    onset: int
    offset: int
    onset_time: float
    z_at_onset: float | None = None

    def __post_init__(self):
        if not self.onset < self.offset:
            raise ValueError("onset must precede offset")
        if self.z_at_onset is not None and not np.isfinite(self.z_at_onset):
            raise ValueError("z_at_onset must be finite")


def _samples_threshold(seconds: float, sample_rate: float) -> int:
    """Smallest integer count n with n / sample_rate >= seconds.

    Found by probing the actual float comparison, so integer thresholding
    inside the kernels is exactly equivalent to comparing per-gap durations
    in seconds, ties included.
    """
    n = max(0, int(seconds * sample_rate))
    while n / sample_rate < seconds:
        n += 1
    while n > 0 and (n - 1) / sample_rate >= seconds:
        n -= 1
    return n


def cluster_events(
    binary: np.ndarray,
    sample_rate: float,
    cfg: DetectConfig,
    start_time: float = 0.0,
) -> list[EventWindow]:
    """Temporal clustering: merge runs split by short gaps, drop stubs."""
    starts, ends = _backend.binary_runs(np.asarray(binary, dtype=np.uint8))
    max_gap = _samples_threshold(cfg.merge_gap_s, sample_rate)
    min_len = _samples_threshold(cfg.min_duration_s, sample_rate)
    starts, ends = _backend.merge_runs(starts, ends, max_gap, min_len)
    return [
        EventWindow(onset=int(s), offset=int(e), onset_time=start_time + s / sample_rate)
        for s, e in zip(starts, ends)
    ]


def detect_cup_edges(
    trace: VibrationTrace, z: ZTrajectory, cfg: DetectConfig
) -> list[EventWindow]:
    """Envelope -> binarize -> cluster, then look up robot height at onsets."""
    tau = cfg.require_tau()
    intensity = envelope(trace, cfg.rms_window)
    events = cluster_events(
        binarize(intensity, tau), trace.sample_rate, cfg, trace.start_time
    )
    if not events:
        return events
    onset_times = np.array([ev.onset_time for ev in events])
    heights = z.z_at(onset_times)
    return [replace(ev, z_at_onset=float(h)) for ev, h in zip(events, heights)]


# --- window classification ----------------------------------------------


@dataclass(frozen=True)
class VoteResult:
    """Majority vote over a stream of per-window predictions."""

    window_classes: tuple[int, ...]
    counts: tuple[int, ...]
    final_class: int
    tie: bool

    def __post_init__(self):
        if sum(self.counts) != len(self.window_classes):
            raise ValueError("counts must sum to the number of windows")
        if self.counts and self.counts[self.final_class] != max(self.counts):
            raise ValueError("final_class must hold a maximal count")


def majority_vote(window_classes, n_classes: int) -> VoteResult:
    """Modal class; ties resolve to the lowest class index and are flagged."""
    window_classes = tuple(int(c) for c in window_classes)
    counts = np.bincount(np.asarray(window_classes, dtype=np.intp), minlength=n_classes)
    final = int(np.argmax(counts))
    tie = int((counts == counts[final]).sum()) > 1
    return VoteResult(
        window_classes=window_classes,
        counts=tuple(int(c) for c in counts),
        final_class=final,
        tie=tie,
    )


def classify_stream(
    model: MlpModel,
    trace: VibrationTrace,
    window_rate_hz: float = 10.0,
    config: FeatureConfig = SHAKE_FEATURES,
) -> VoteResult:
    """Classify feature windows sampled at window_rate_hz, then vote.

    Window start times advance at exactly the window rate; windows that
    would run past the end of the spectrogram are dropped.
    """
    if window_rate_hz <= 0:
        raise ConfigurationError("window_rate_hz must be positive")
    spec = stft(trace, config.stft_window, config.stft_hop, config.taper)
    if config.feature_dim != model.layer_sizes[0]:
        raise ValueError(
            f"feature dim {config.feature_dim} does not match model input "
            f"{model.layer_sizes[0]}"
        )
    frames_per_second = trace.sample_rate / config.stft_hop
    n_classes = model.layer_sizes[-1]
    rows, k = [], 0
    while True:
        start = round(k / window_rate_hz * frames_per_second)
        if start + config.window_length > spec.n_frames:
            break
        mags = spec.magnitudes[start : start + config.window_length]
        rows.append(_normalize_window(mags).ravel())
        k += 1
    if not rows:
        raise InsufficientSamplesError("trace is shorter than one feature window")
    probs = forward(model, np.asarray(rows))
    return majority_vote(np.argmax(probs, axis=1), n_classes)


# --- training ------------------------------------------------------------


@dataclass(frozen=True)
class ClassifierReport:
    """Held-out evaluation: accuracy, confusion, per-class precision/recall."""

    classes: tuple[str, ...]
    accuracy: float
    confusion: np.ndarray  # rows true, cols predicted
    n_train_windows: int
    n_test_windows: int

    def precision(self) -> np.ndarray:
        col = self.confusion.sum(axis=0)
        return np.divide(
            np.diag(self.confusion), col, out=np.zeros(len(self.classes)), where=col > 0
        )

    def recall(self) -> np.ndarray:
        row = self.confusion.sum(axis=1)
        return np.divide(
            np.diag(self.confusion), row, out=np.zeros(len(self.classes)), where=row > 0
        )

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "accuracy": self.accuracy,
            "confusion": self.confusion.astype(int).tolist(),
            "precision": [float(p) for p in self.precision()],
            "recall": [float(r) for r in self.recall()],
            "n_train_windows": self.n_train_windows,
            "n_test_windows": self.n_test_windows,
        }


def _window_matrix(traces: list[VibrationTrace], config: FeatureConfig) -> list[np.ndarray]:
    return [
        np.asarray([fw.flat() for fw in extract_material_features(t, config)])
        for t in traces
    ]


def train_window_classifier(
    traces_by_class: dict[str, list[VibrationTrace]],
    cfg: TrainConfig,
    config: FeatureConfig,
    hidden: tuple[int, ...],
    test_fraction: float = 0.2,
) -> tuple[MlpModel, ClassifierReport]:
    """Train a softmax MLP on per-class trace collections.

    The held-out split is at trace level: windows from one recording never
    appear on both sides, which keeps the evaluation honest despite window
    overlap. Class order is the sorted class-name order.
    """
    classes = tuple(sorted(traces_by_class))
    if len(classes) < 2:
        raise ConfigurationError("need at least 2 classes")

    per_class = {name: _window_matrix(traces_by_class[name], config) for name in classes}
    counts = {name: sum(len(m) for m in mats) for name, mats in per_class.items()}
    low, high = min(counts.values()), max(counts.values())
    if low == 0 or high > 1.5 * low:
        raise ConfigurationError(f"unbalanced window counts per class: {counts}")

    rng = rng_for(cfg.seed, "trace-split")
    train_x, train_y, test_x, test_y = [], [], [], []
    for label, name in enumerate(classes):
        mats = per_class[name]
        order = rng.permutation(len(mats))
        n_test = max(1, round(len(mats) * test_fraction))
        for j, idx in enumerate(order):
            target = (test_x, test_y) if j < n_test else (train_x, train_y)
            target[0].append(mats[idx])
            target[1].append(np.full(mats[idx].shape[0], label, dtype=np.intp))

    x_train = np.concatenate(train_x)
    y_train = np.concatenate(train_y)
    x_test = np.concatenate(test_x)
    y_test = np.concatenate(test_y)

    arch = (config.feature_dim, *hidden, len(classes))
    model = init_mlp(arch, head="softmax", seed=cfg.seed)
    data = Dataset(x_train, one_hot(y_train, len(classes)), "train")
    model, _history = train(model, data, cfg)

    pred = np.argmax(forward(model, x_test), axis=1)
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(confusion, (y_test, pred), 1)
    report = ClassifierReport(
        classes=classes,
        accuracy=float(np.mean(pred == y_test)),
        confusion=confusion,
        n_train_windows=int(x_train.shape[0]),
        n_test_windows=int(x_test.shape[0]),
    )
    return model, report


def train_material_classifier(
    traces_by_class: dict[str, list[VibrationTrace]],
    cfg: TrainConfig = DEFAULT_MATERIAL_TRAIN,
    config: FeatureConfig = MATERIAL_FEATURES,
) -> tuple[MlpModel, ClassifierReport]:
    """7-way material classifier over sliding-contact recordings."""
    return train_window_classifier(traces_by_class, cfg, config, MATERIAL_ARCH_HIDDEN)


def train_content_classifier(
    traces_by_class: dict[str, list[VibrationTrace]],
    cfg: TrainConfig = DEFAULT_SHAKE_TRAIN,
    config: FeatureConfig = SHAKE_FEATURES,
) -> tuple[MlpModel, ClassifierReport]:
    """3-way box-content classifier over shaking recordings."""
    return train_window_classifier(traces_by_class, cfg, config, SHAKE_ARCH_HIDDEN)


def save_classifier(
    model_path, model: MlpModel, classes, features: FeatureConfig
) -> None:
    """Model in the shared binary format plus a JSON metadata sidecar."""
    model_path = Path(model_path)
    save_model(model_path, model)
    meta = {"classes": list(classes), "features": asdict(features)}
    model_path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=2))


def load_classifier(model_path) -> tuple[MlpModel, tuple[str, ...], FeatureConfig]:
    model_path = Path(model_path)
    model = load_model(model_path)
    meta = json.loads(model_path.with_suffix(".meta.json").read_text())
    return model, tuple(meta["classes"]), FeatureConfig(**meta["features"])
