"""Shared fixtures: the expensive trained artifacts are session-scoped so
unit tests and the acceptance suite reuse one force estimator, one material
classifier, and one content classifier."""

import numpy as np
import pytest

from fingertip.config import ExperimentConfig
from fingertip.force import build_calibration_dataset, train_force_estimator
from fingertip.seeding import derive_seed
from fingertip.sim import (
    CONTENT_CLASSES,
    default_fingertip_model,
    default_material_profiles,
    synthesize_shaking,
    synthesize_sliding,
)
from fingertip.vibro import train_content_classifier, train_material_classifier

MASTER_SEED = 42


@pytest.fixture(scope="session")
def experiment_config():
    return ExperimentConfig(seed=MASTER_SEED)


@pytest.fixture(scope="session")
def fingertip_model():
    return default_fingertip_model()


@pytest.fixture(scope="session")
def calibration_table(experiment_config, fingertip_model):
    return build_calibration_dataset(
        fingertip_model,
        experiment_config.grid,
        seed=derive_seed(MASTER_SEED, "calibration"),
    )


@pytest.fixture(scope="session")
def force_estimator(calibration_table, experiment_config):
    return train_force_estimator(calibration_table, experiment_config.train_force)


@pytest.fixture(scope="session")
def material_corpus(experiment_config):
    profiles = default_material_profiles()
    p = experiment_config.materials
    return {
        name: [
            synthesize_sliding(
                profile, p.duration_s, p.speed_mm_s,
                derive_seed(MASTER_SEED, "material", name, i),
            )
            for i in range(p.traces_per_class)
        ]
        for name, profile in profiles.items()
    }


@pytest.fixture(scope="session")
def material_classifier(material_corpus, experiment_config):
    """(model, report) for the 7-way material classifier."""
    return train_material_classifier(material_corpus, experiment_config.train_material)


@pytest.fixture(scope="session")
def shake_corpus(experiment_config):
    p = experiment_config.shaking
    return {
        name: [
            synthesize_shaking(
                name, p.duration_s, p.shake_freq_hz,
                derive_seed(MASTER_SEED, "shake", name, i),
            )
            for i in range(p.traces_per_class)
        ]
        for name in CONTENT_CLASSES
    }


@pytest.fixture(scope="session")
def content_classifier(shake_corpus, experiment_config):
    """(model, report) for the 3-way box-content classifier."""
    return train_content_classifier(shake_corpus, experiment_config.train_shake)
