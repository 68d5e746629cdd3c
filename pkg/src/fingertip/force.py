"""Strain-gauge force calibration: dataset generation, baselines, estimator.

The flow mirrors the physical characterization procedure: sweep a grid of
indentation angles and contact heights, press and retract in fixed steps,
average the stabilized dwell frames into one row per step, then regress
strain counts onto planar force. A plain least-squares baseline documents
how far from linear the sensor is; the MLP estimator is the product.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fingertip.errors import RankDeficiencyError
from fingertip.mlp import (
    Dataset,
    MlpModel,
    TrainConfig,
    forward,
    init_mlp,
    load_model,
    mean_squared_error,
    save_model,
    split_dataset,
    train,
)
from fingertip.seeding import derive_seed, rng_for
from fingertip.sim import FingertipModel, PlanarForce, RigTrajectory, simulate_indentation
from fingertip.signals import StrainFrame

FORCE_ARCH = (4, 32, 32, 2)

#: Training defaults for the force regressor; small problem, so favor many
#: epochs of small steps for a stable fit.
DEFAULT_FORCE_TRAIN = TrainConfig(
    learning_rate=3e-3, epochs=400, batch_size=64, seed=7, loss="mse", momentum=0.9
)


@dataclass(frozen=True)
class CalibrationGrid:
    """Angle/height sweep of scripted indentations; defaults match the rig."""

    angles_deg: tuple = tuple(float(a) for a in range(-50, 51, 10))
    heights_mm: tuple = tuple(float(h) for h in range(0, 6))
    step_size_mm: float = 1.5
    max_displacement_mm: float = 30.0
    dwell_s: float = 8.0
    randomize_order: bool = False
    seed: int = 0

    def trials(self) -> list[RigTrajectory]:
        trials = [
            RigTrajectory(
                angle_deg=a,
                contact_height_mm=h,
                step_size_mm=self.step_size_mm,
                max_displacement_mm=self.max_displacement_mm,
                dwell_s=self.dwell_s,
            )
            for a in self.angles_deg
            for h in self.heights_mm
        ]
        if self.randomize_order:
            order = rng_for(self.seed, "grid-order").permutation(len(trials))
            trials = [trials[i] for i in order]
        return trials


@dataclass(frozen=True)
class CalibrationTable:
    """One row per dwell step: averaged strain, ground-truth force, metadata."""

    strain: np.ndarray  # (n, 4) counts
    force: np.ndarray  # (n, 2) newtons
    angle_deg: np.ndarray  # (n,)
    height_mm: np.ndarray  # (n,)
    branch: np.ndarray  # (n,) +1 loading, -1 unloading

    def __len__(self) -> int:
        return int(self.strain.shape[0])

    def dataset(self, split: str = "") -> Dataset:
        return Dataset(self.strain, self.force, split)

    CSV_HEADER = ["ch0", "ch1", "ch2", "ch3", "fx", "fy", "angle_deg", "height_mm", "branch"]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_HEADER)
            for i in range(len(self)):
                writer.writerow(
                    [repr(float(v)) for v in self.strain[i]]
                    + [repr(float(v)) for v in self.force[i]]
                    + [
                        repr(float(self.angle_deg[i])),
                        repr(float(self.height_mm[i])),
                        str(int(self.branch[i])),
                    ]
                )

    @classmethod
    def read_csv(cls, path) -> "CalibrationTable":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != cls.CSV_HEADER:
                raise ValueError(f"{path}: expected header {cls.CSV_HEADER}, got {header}")
            for row in reader:
                if row:
                    rows.append([float(v) for v in row])
        data = np.asarray(rows)
        return cls(
            strain=data[:, 0:4],
            force=data[:, 4:6],
            angle_deg=data[:, 6],
            height_mm=data[:, 7],
            branch=data[:, 8].astype(np.int8),
        )


def build_calibration_dataset(
    model: FingertipModel, grid: CalibrationGrid, seed: int = 0
) -> CalibrationTable:
    """Simulate the whole grid and average each dwell into one row.

    Only the second half of each dwell's frames is averaged, the simulated
    stand-in for waiting out the stabilization pause before recording. The
    initial rest dwell is the pre-contact baseline and contributes no row.
    """
    strain_rows, force_rows, angles, heights, branches = [], [], [], [], []
    for index, traj in enumerate(grid.trials()):
        run = simulate_indentation(model, traj, derive_seed(seed, "trial", index))
        n_dwells = run.strain.channels.shape[0] // run.dwell_frames
        for dwell in range(1, n_dwells):
            lo = dwell * run.dwell_frames + run.dwell_frames // 2
            hi = (dwell + 1) * run.dwell_frames
            strain_rows.append(run.strain.channels[lo:hi].mean(axis=0))
            force_rows.append(run.forces[lo])
            angles.append(traj.angle_deg)
            heights.append(traj.contact_height_mm)
            branches.append(run.branch[lo])
    return CalibrationTable(
        strain=np.asarray(strain_rows),
        force=np.asarray(force_rows),
        angle_deg=np.asarray(angles),
        height_mm=np.asarray(heights),
        branch=np.asarray(branches, dtype=np.int8),
    )


@dataclass(frozen=True)
class LinearBaseline:
    """Least-squares strain->force map: force = matrix @ channels + offset."""

    matrix: np.ndarray  # (2, 4)
    offset: np.ndarray  # (2,)
    test_mse: float | None = None

    def predict(self, strain: np.ndarray) -> np.ndarray:
        return np.atleast_2d(strain) @ self.matrix.T + self.offset


def fit_linear_baseline(train_data: Dataset, test_data: Dataset | None = None) -> LinearBaseline:
    """Ordinary least squares with intercept; refuses rank-deficient input."""
    x = np.asarray(train_data.inputs, dtype=np.float64)
    if x.shape[0] < 8:
        raise ValueError(f"need >= 8 rows to fit the baseline, got {x.shape[0]}")
    design = np.hstack([x, np.ones((x.shape[0], 1))])
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        raise RankDeficiencyError(
            f"design matrix rank {rank} < {design.shape[1]}: "
            "strain rows do not span all channels"
        )
    coef, *_ = np.linalg.lstsq(design, train_data.targets, rcond=None)
    baseline = LinearBaseline(matrix=coef[:4].T, offset=coef[4])
    if test_data is not None:
        mse = mean_squared_error(baseline.predict(test_data.inputs), test_data.targets)
        baseline = LinearBaseline(baseline.matrix, baseline.offset, test_mse=mse)
    return baseline


@dataclass(frozen=True)
class ForceEstimator:
    """Trained strain->force regressor with its input normalization."""

    model: MlpModel
    input_mean: np.ndarray  # (4,)
    input_scale: np.ndarray  # (4,)
    force_range_n: tuple = (0.0, 5.0)
    test_mse: float | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.input_mean)) or not np.all(
            np.isfinite(self.input_scale)
        ):
            raise ValueError("normalization constants must be finite")
        if np.min(self.input_scale) <= 0:
            raise ValueError("input_scale must be positive")


def train_force_estimator(
    table: CalibrationTable,
    cfg: TrainConfig = DEFAULT_FORCE_TRAIN,
    test_fraction: float = 0.2,
) -> ForceEstimator:
    """Split 80/20, normalize from the train split, train the regressor."""
    train_set, test_set = split_dataset(table.dataset(), test_fraction, cfg.seed)
    mean = train_set.inputs.mean(axis=0)
    scale = np.maximum(train_set.inputs.std(axis=0), 1e-9)
    norm_train = Dataset((train_set.inputs - mean) / scale, train_set.targets, "train")
    norm_test = Dataset((test_set.inputs - mean) / scale, test_set.targets, "test")

    model = init_mlp(FORCE_ARCH, head="linear", seed=cfg.seed)
    model, _history = train(model, norm_train, cfg)
    test_mse = mean_squared_error(forward(model, norm_test.inputs), norm_test.targets)
    return ForceEstimator(
        model=model, input_mean=mean, input_scale=scale, test_mse=test_mse
    )


def estimate_force(est: ForceEstimator, frame: StrainFrame) -> PlanarForce:
    """Per-frame force estimate; StrainFrame guarantees finite channels."""
    normalized = (frame.channels - est.input_mean) / est.input_scale
    fx, fy = forward(est.model, normalized)
    return PlanarForce(float(fx), float(fy))


def estimate_forces(est: ForceEstimator, strain: np.ndarray) -> np.ndarray:
    """Batch variant of estimate_force over (n, 4) strain rows."""
    strain = np.atleast_2d(np.asarray(strain, dtype=np.float64))
    if not np.all(np.isfinite(strain)):
        raise ValueError("strain rows must be finite")
    return forward(est.model, (strain - est.input_mean) / est.input_scale)


def save_force_estimator(model_path, est: ForceEstimator) -> None:
    """Model in the shared binary format plus a JSON normalization sidecar."""
    model_path = Path(model_path)
    save_model(model_path, est.model)
    sidecar = {
        "input_mean": est.input_mean.tolist(),
        "input_scale": est.input_scale.tolist(),
        "force_range_n": list(est.force_range_n),
        "test_mse": est.test_mse,
    }
    model_path.with_suffix(".norm.json").write_text(json.dumps(sidecar, indent=2))


def load_force_estimator(model_path) -> ForceEstimator:
    model_path = Path(model_path)
    model = load_model(model_path)
    sidecar = json.loads(model_path.with_suffix(".norm.json").read_text())
    return ForceEstimator(
        model=model,
        input_mean=np.asarray(sidecar["input_mean"]),
        input_scale=np.asarray(sidecar["input_scale"]),
        force_range_n=tuple(sidecar["force_range_n"]),
        test_mse=sidecar["test_mse"],
    )
