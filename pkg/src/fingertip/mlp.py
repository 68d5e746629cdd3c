"""Minimal multilayer perceptron with a deterministic training loop.

One implementation serves force regression (linear head, squared error)
and every classifier (softmax head, cross-entropy). Hidden layers are ReLU.
Training is plain minibatch gradient descent with momentum; all shuffling
and initialization flow from explicit seeds, so identical configs produce
bit-identical models.
"""

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from fingertip.errors import ModelFormatError, TrainingDivergedError
from fingertip.seeding import rng_for

MODEL_MAGIC = b"MLPM0001"
MODEL_VERSION = 1

_ACTIVATION_IDS = {"relu": 0}
_HEAD_IDS = {"linear": 0, "softmax": 1}
_HEAD_NAMES = {v: k for k, v in _HEAD_IDS.items()}


@dataclass(frozen=True)
class MlpModel:
    """Fully-connected network: ReLU hidden layers plus a linear or softmax head."""

    weights: tuple[np.ndarray, ...]  # each (fan_in, fan_out)
    biases: tuple[np.ndarray, ...]
    head: str = "linear"

    def __post_init__(self):
        if self.head not in _HEAD_IDS:
            raise ValueError(f"head must be one of {tuple(_HEAD_IDS)}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("weights and biases must pair up, one per layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {i}: weight/bias shapes disagree")
            if i and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {i}: input dim mismatch with layer {i - 1}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i}: non-finite parameters")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-2
    epochs: int = 200
    batch_size: int = 64
    seed: int = 0
    loss: str = "mse"  # "mse" or "cross_entropy"
    momentum: float = 0.9

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.loss not in ("mse", "cross_entropy"):
            raise ValueError("loss must be 'mse' or 'cross_entropy'")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")


@dataclass(frozen=True)
class Dataset:
    """Input rows with regression targets or one-hot class rows."""

    inputs: np.ndarray  # (N, D)
    targets: np.ndarray  # (N, K)
    split: str = ""

    def __post_init__(self):
        inputs = np.asarray(self.inputs)
        targets = np.asarray(self.targets)
        if inputs.ndim != 2 or targets.ndim != 2:
            raise ValueError("inputs and targets must be 2-D")
        if inputs.shape[0] != targets.shape[0] or inputs.shape[0] < 1:
            raise ValueError("inputs and targets must share N >= 1 rows")
        if not np.all(np.isfinite(inputs)) or not np.all(np.isfinite(targets)):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def take(self, indices: np.ndarray, split: str | None = None) -> "Dataset":
        return Dataset(
            self.inputs[indices],
            self.targets[indices],
            self.split if split is None else split,
        )


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.intp)
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def split_dataset(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split into (train, test)."""
    n = len(data)
    n_test = max(1, round(n * test_fraction))
    order = rng_for(seed, "split").permutation(n)
    return data.take(order[n_test:], "train"), data.take(order[:n_test], "test")


def init_mlp(layer_sizes, head: str = "linear", seed: int = 0) -> MlpModel:
    """He-style uniform initialization scaled by fan-in; zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("layer_sizes needs >= 2 positive entries")
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        limit = np.sqrt(6.0 / fan_in)
        rng = rng_for(seed, "init", i)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=tuple(weights), biases=tuple(biases), head=head)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward_cached(model: MlpModel, x: np.ndarray):
    """Forward pass keeping pre/post activations for backprop."""
    activations = [x]
    n_layers = len(model.weights)
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = activations[-1] @ w + b
        if i < n_layers - 1:
            z = np.maximum(z, 0.0)
        activations.append(z)
    if model.head == "softmax":
        activations[-1] = _softmax(activations[-1])
    return activations


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Network output for one input vector or a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.layer_sizes[0]:
        raise ValueError(
            f"input dim {x.shape[1]} does not match model input {model.layer_sizes[0]}"
        )
    out = _forward_cached(model, x)[-1]
    return out[0] if single else out


def loss_and_gradient(model: MlpModel, inputs: np.ndarray, targets: np.ndarray, loss: str):
    """Loss and its analytic gradient over one batch.

    mse is the mean over rows of the squared error vector norm; cross_entropy
    is the mean over rows of -sum(y * log p) and requires the softmax head.
    Gradients come back as one (dW, db) pair per layer.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("batch must be non-empty")
    if loss == "cross_entropy" and model.head != "softmax":
        raise ValueError("cross_entropy requires a softmax head")

    activations = _forward_cached(model, inputs)
    output = activations[-1]
    if loss == "mse":
        err = output - targets
        value = float(np.mean(np.sum(err * err, axis=1)))
        if model.head == "softmax":
            # d(softmax)/dz contracted against the error term.
            dot = np.sum(err * output, axis=1, keepdims=True)
            delta = 2.0 * output * (err - dot) / n
        else:
            delta = 2.0 * err / n
    elif loss == "cross_entropy":
        clipped = np.clip(output, 1e-300, None)
        value = float(-np.mean(np.sum(targets * np.log(clipped), axis=1)))
        delta = (output - targets) / n
    else:
        raise ValueError(f"unknown loss {loss!r}")

    grads = []
    for i in range(len(model.weights) - 1, -1, -1):
        post = activations[i + 1]
        if i < len(model.weights) - 1:
            delta = delta * (post > 0.0)
        grads.append((activations[i].T @ delta, delta.sum(axis=0)))
        if i > 0:
            delta = delta @ model.weights[i].T
    grads.reverse()
    return value, grads


def train(model: MlpModel, data: Dataset, cfg: TrainConfig) -> tuple[MlpModel, list[float]]:
    """Minibatch gradient descent with momentum; deterministic given cfg.seed.

    Returns the trained model and the per-epoch mean training loss.
    """
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    current = replace(model, weights=tuple(weights), biases=tuple(biases))

    n = len(data)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng_for(cfg.seed, "shuffle", epoch).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            value, grads = loss_and_gradient(
                current, data.inputs[batch], data.targets[batch], cfg.loss
            )
            if not np.isfinite(value):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch offset {start}: {value}"
                )
            epoch_loss += value * len(batch)
            for i, (dw, db) in enumerate(grads):
                vel_w[i] = cfg.momentum * vel_w[i] - cfg.learning_rate * dw
                vel_b[i] = cfg.momentum * vel_b[i] - cfg.learning_rate * db
                weights[i] += vel_w[i]
                biases[i] += vel_b[i]
        history.append(epoch_loss / n)
        current = replace(current, weights=tuple(weights), biases=tuple(biases))
    return current, history


def mean_squared_error(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over rows of the squared error vector norm."""
    err = np.atleast_2d(pred) - np.atleast_2d(target)
    return float(np.mean(np.sum(err * err, axis=1)))


def save_model(path, model: MlpModel) -> None:
    """Versioned binary serialization; round-trips bit-exactly."""
    sizes = model.layer_sizes
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<H", MODEL_VERSION))
        fh.write(struct.pack("<BB", _ACTIVATION_IDS["relu"], _HEAD_IDS[model.head]))
        fh.write(struct.pack("<I", len(sizes)))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        for w, b in zip(model.weights, model.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        blob = fh.read()

    def chunk(offset: int, size: int) -> bytes:
        if offset + size > len(blob):
            raise ModelFormatError(f"{path}: truncated model file")
        return blob[offset : offset + size]

    if chunk(0, 8) != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: bad magic, not a model file")
    (version,) = struct.unpack("<H", chunk(8, 2))
    if version != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    activation, head_id = struct.unpack("<BB", chunk(10, 2))
    if activation not in _ACTIVATION_IDS.values() or head_id not in _HEAD_NAMES:
        raise ModelFormatError(f"{path}: unknown activation/head id")
    (n_sizes,) = struct.unpack("<I", chunk(12, 4))
    if not 2 <= n_sizes <= 64:
        raise ModelFormatError(f"{path}: implausible layer count {n_sizes}")
    sizes = struct.unpack(f"<{n_sizes}I", chunk(16, 4 * n_sizes))
    offset = 16 + 4 * n_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(chunk(offset, 8 * fan_in * fan_out), dtype="<f8")
        offset += 8 * fan_in * fan_out
        b = np.frombuffer(chunk(offset, 8 * fan_out), dtype="<f8")
        offset += 8 * fan_out
        weights.append(w.reshape(fan_in, fan_out).copy())
        biases.append(b.copy())
    if offset != len(blob):
        raise ModelFormatError(f"{path}: {len(blob) - offset} trailing bytes")
    return MlpModel(
        weights=tuple(weights), biases=tuple(biases), head=_HEAD_NAMES[head_id]
    )
