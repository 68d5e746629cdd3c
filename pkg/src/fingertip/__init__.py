"""Synthetic multi-modal tactile fingertip stack.

Force calibration from strain gauges, vibrotactile material and event
perception from a contact microphone, and three contact-driven task
controllers, all running over deterministic seeded sensor models.
"""

from fingertip._backend import BACKEND as kernel_backend
from fingertip.signals import (
    Spectrogram,
    StrainFrame,
    StrainTrace,
    SyncedSample,
    SyncedSeries,
    VibrationTrace,
    ZTrajectory,
    envelope,
    stft,
    synchronize,
)
from fingertip.sim import (
    FingertipModel,
    MaterialProfile,
    PlanarForce,
    RigTrajectory,
    default_fingertip_model,
    default_material_profiles,
    simulate_indentation,
    synthesize_cup_slide,
    synthesize_shaking,
    synthesize_sliding,
)

__version__ = "0.1.0"

__all__ = [
    "FingertipModel",
    "MaterialProfile",
    "PlanarForce",
    "RigTrajectory",
    "Spectrogram",
    "StrainFrame",
    "StrainTrace",
    "SyncedSample",
    "SyncedSeries",
    "VibrationTrace",
    "ZTrajectory",
    "default_fingertip_model",
    "default_material_profiles",
    "envelope",
    "kernel_backend",
    "simulate_indentation",
    "stft",
    "synchronize",
    "synthesize_cup_slide",
    "synthesize_shaking",
    "synthesize_sliding",
    "__version__",
]
