"""The three contact-driven task pipelines as explicit state machines.

Each trial closes a loop over a simulated plant: the pinch controller steps
fingers closed against a compliant object until the estimated force reaches
its threshold; the cup task slides, counts rims, and grasps at a planned
height; the shake task classifies box contents and selects the matching
box. Robot motion is abstracted to scripted one-dimensional trajectories.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from fingertip.errors import (
    ConfigurationError,
    ContractViolationError,
    InsufficientEdgesError,
)
from fingertip.force import ForceEstimator, estimate_force
from fingertip.mlp import MlpModel
from fingertip.seeding import derive_seed, rng_for
from fingertip.signals import STRAIN_RATE_HZ, StrainFrame
from fingertip.sim import (
    CONTENT_CLASSES,
    FingertipModel,
    PlanarForce,
    synthesize_cup_slide,
    synthesize_shaking,
)
from fingertip.vibro import (
    SHAKE_FEATURES,
    DetectConfig,
    FeatureConfig,
    VoteResult,
    calibrate_threshold,
    classify_stream,
    detect_cup_edges,
)

# --- fragile pinching ------------------------------------------------------

PINCH_PHASES = ("approaching", "closing", "holding", "lifting", "done", "failed")
TERMINAL_PHASES = frozenset({"done", "failed"})


@dataclass(frozen=True)
class PinchConfig:
    """Force-threshold controller parameters plus the plant's safety limits."""

    force_threshold_n: float
    step_size_mm: float = 0.02
    damage_force_n: float = 1.0
    hold_force_min_n: float = 0.2

    def __post_init__(self):
        if not 0 < self.hold_force_min_n <= self.force_threshold_n < self.damage_force_n:
            raise ConfigurationError(
                "need 0 < hold_force_min <= force_threshold < damage_force, got "
                f"{self.hold_force_min_n}/{self.force_threshold_n}/{self.damage_force_n}"
            )
        if not self.step_size_mm > 0:
            raise ConfigurationError("step_size_mm must be positive")


@dataclass(frozen=True)
class PinchState:
    phase: str = "approaching"
    aperture_mm: float = 0.0
    measured_force_n: float = 0.0

    def __post_init__(self):
        if self.phase not in PINCH_PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")


def pinch_step(state: PinchState, force_n: float, cfg: PinchConfig):
    """One 15 Hz control tick: returns (next_state, command).

    Commands are "close" (step fingers in by cfg.step_size_mm, already
    applied to the returned aperture), "hold", "lift", or "abort". Measured
    force at or above the threshold stops closing; anything above the
    damage limit aborts.
    """
    if state.phase in TERMINAL_PHASES:
        raise ContractViolationError(f"pinch_step called in terminal phase {state.phase!r}")
    if force_n > cfg.damage_force_n:
        return PinchState("failed", state.aperture_mm, force_n), "abort"
    if state.phase == "approaching":
        return PinchState("closing", state.aperture_mm - cfg.step_size_mm, force_n), "close"
    if state.phase == "closing":
        if force_n < cfg.force_threshold_n:
            return (
                PinchState("closing", state.aperture_mm - cfg.step_size_mm, force_n),
                "close",
            )
        return PinchState("holding", state.aperture_mm, force_n), "hold"
    if state.phase == "holding":
        return PinchState("lifting", state.aperture_mm, force_n), "lift"
    # lifting: keep squeezing at the held aperture until the lift completes
    return PinchState("done", state.aperture_mm, force_n), "hold"


@dataclass(frozen=True)
class PinchPlant:
    """Compliant object between the fingers: force = stiffness x overlap."""

    name: str
    stiffness_n_mm: float
    damage_force_n: float
    hold_force_min_n: float
    width_mm: float = 20.0

    def __post_init__(self):
        if self.stiffness_n_mm <= 0:
            raise ConfigurationError("stiffness must be positive")
        if not 0 < self.hold_force_min_n < self.damage_force_n:
            raise ConfigurationError("need 0 < hold_force_min < damage_force")

    def contact_force(self, aperture_mm: float) -> float:
        return self.stiffness_n_mm * max(0.0, self.width_mm - aperture_mm)


#: Synthetic stand-ins for the demo objects; stiffness and limits are not
#: measurements, just plausible constants that make the task non-trivial.
TOFU_PLANT = PinchPlant("tofu", stiffness_n_mm=0.8, damage_force_n=1.0, hold_force_min_n=0.2)
CHIP_PLANT = PinchPlant("chip", stiffness_n_mm=2.0, damage_force_n=0.4, hold_force_min_n=0.02)

#: Demonstration-calibrated pinch thresholds per object.
PINCH_THRESHOLDS_N = {"tofu": 0.5, "chip": 0.1}

APPROACH_GAP_MM = 1.0
LIFT_TICKS = 15  # one second of simulated lifting


@dataclass(frozen=True)
class PinchOutcome:
    outcome: str  # success | crushed | dropped
    ticks: int
    final_force_n: float
    peak_force_n: float

    def record(self) -> dict:
        return {
            "outcome": self.outcome,
            "ticks": self.ticks,
            "final_force_n": self.final_force_n,
            "peak_force_n": self.peak_force_n,
        }


def run_pinch_trial(
    plant: PinchPlant,
    estimator: ForceEstimator | None,
    cfg: PinchConfig,
    seed: int,
    fingertip: FingertipModel | None = None,
    max_ticks: int = 3000,
) -> PinchOutcome:
    """Close the 15 Hz loop: deform plant, read strain, estimate, step.

    With estimator=None the controller sees the true contact force (the
    oracle case); otherwise each tick renders a noisy strain frame through
    the fingertip model and runs the trained estimator on it.
    """
    if estimator is not None and fingertip is None:
        raise ConfigurationError("a fingertip model is required with a trained estimator")
    rng = rng_for(seed, "pinch", plant.name)
    state = PinchState(phase="approaching", aperture_mm=plant.width_mm + APPROACH_GAP_MM)
    peak_true = 0.0
    crushed = False
    lift_ticks_left = LIFT_TICKS
    ticks = 0
    true_force = 0.0

    while state.phase not in TERMINAL_PHASES and ticks < max_ticks:
        ticks += 1
        true_force = plant.contact_force(state.aperture_mm)
        peak_true = max(peak_true, true_force)
        if true_force > plant.damage_force_n:
            crushed = True
        if estimator is None:
            measured = true_force
        else:
            frame = StrainFrame(
                fingertip.noisy_frame(PlanarForce(true_force, 0.0), rng),
                timestamp=ticks / STRAIN_RATE_HZ,
            )
            measured = estimate_force(estimator, frame).magnitude
        if state.phase == "lifting":
            # Lift takes simulated time; stay in phase until it completes.
            lift_ticks_left -= 1
            if lift_ticks_left > 0:
                continue
        state, _command = pinch_step(state, measured, cfg)

    if crushed or true_force > plant.damage_force_n:
        return PinchOutcome("crushed", ticks, true_force, peak_true)
    if state.phase == "done" and true_force >= plant.hold_force_min_n:
        return PinchOutcome("success", ticks, true_force, peak_true)
    return PinchOutcome("dropped", ticks, true_force, peak_true)


# --- cup counting and unstacking -------------------------------------------

ENGAGE_OFFSET_MM = 2.0
UNSTACK_GRASP_FORCE_N = 0.5


@dataclass(frozen=True)
class UnstackPlan:
    """Grasp height and force for lifting a counted number of cups."""

    target_cups: int
    grasp_height_mm: float
    grasp_force_n: float
    edge_heights_mm: tuple[float, ...]

    def __post_init__(self):
        if self.target_cups > len(self.edge_heights_mm):
            raise ValueError("target exceeds the detected edge count")


def plan_unstack(edges, target: int) -> UnstackPlan:
    """Grasp just under the target-th rim met while sliding down.

    Edges are ordered by onset time (descending height); the grasp height
    is that rim's height minus a fixed engage offset so the fingernail
    sits under the lip.
    """
    if target < 1:
        raise ConfigurationError(f"target must be >= 1, got {target}")
    if target > len(edges):
        raise InsufficientEdgesError(
            f"insufficient edges detected: need {target}, have {len(edges)}"
        )
    ordered = sorted(edges, key=lambda ev: ev.onset_time)
    heights = tuple(float(ev.z_at_onset) for ev in ordered)
    if any(not math.isfinite(h) for h in heights):
        raise ValueError("edges must carry z_at_onset heights")
    return UnstackPlan(
        target_cups=target,
        grasp_height_mm=heights[target - 1] - ENGAGE_OFFSET_MM,
        grasp_force_n=UNSTACK_GRASP_FORCE_N,
        edge_heights_mm=heights,
    )


@dataclass(frozen=True)
class CupScenario:
    """Five nested cups; the slide covers the top three rims."""

    n_cups: int = 5
    lip_spacing_mm: float = 7.0
    top_rim_mm: float = 17.5
    total_travel_mm: float = 21.0
    slide_speed_mm_s: float = 5.0
    noise_floor: float = 0.01

    def __post_init__(self):
        if self.n_cups < 1:
            raise ConfigurationError("n_cups must be >= 1")
        if not 0 < self.top_rim_mm <= self.total_travel_mm:
            raise ConfigurationError("top rim must lie inside the travel")

    def rim_heights(self) -> np.ndarray:
        """All rim heights, top first; lower rims may sit below the travel."""
        return self.top_rim_mm - self.lip_spacing_mm * np.arange(self.n_cups)

    def rims_in_travel(self) -> np.ndarray:
        rims = self.rim_heights()
        return rims[(rims >= 0) & (rims <= self.total_travel_mm)]


@dataclass(frozen=True)
class CupTrialResult:
    target: int
    counted: int
    lifted: int
    counting_ok: bool
    planning_ok: bool
    lift_ok: bool
    success: bool
    grasp_height_mm: float | None
    detected_heights_mm: tuple[float, ...]
    tau: float

    def record(self) -> dict:
        return {
            "target": self.target,
            "counted": self.counted,
            "lifted": self.lifted,
            "counting_ok": self.counting_ok,
            "planning_ok": self.planning_ok,
            "lift_ok": self.lift_ok,
            "success": self.success,
            "grasp_height_mm": self.grasp_height_mm,
            "detected_heights_mm": list(self.detected_heights_mm),
            "tau": self.tau,
        }


def run_cup_trial(
    scenario: CupScenario,
    target: int,
    cfg: DetectConfig,
    seed: int,
) -> CupTrialResult:
    """Slide, detect rims, plan, and check the grasp against ground truth.

    Success requires the detector to count every rim inside the travel and
    the planned grasp height to land strictly inside the target cup's
    engagement band. An unset tau is calibrated from a contact-free
    recording at the scenario's noise floor.
    """
    rims = scenario.rims_in_travel()
    trace, z = synthesize_cup_slide(
        edge_heights_mm=np.sort(rims),
        slide_speed_mm_s=scenario.slide_speed_mm_s,
        total_travel_mm=scenario.total_travel_mm,
        noise_floor=scenario.noise_floor,
        seed=derive_seed(seed, "cup-slide"),
    )
    if cfg.tau is None:
        calibration, _ = synthesize_cup_slide(
            edge_heights_mm=[],
            slide_speed_mm_s=scenario.slide_speed_mm_s,
            total_travel_mm=scenario.total_travel_mm,
            noise_floor=scenario.noise_floor,
            seed=derive_seed(seed, "tau-calibration"),
        )
        cfg = replace(cfg, tau=calibrate_threshold(calibration, cfg))

    events = detect_cup_edges(trace, z, cfg)
    counted = len(events)
    counting_ok = counted == len(rims)

    grasp_height = None
    planning_ok = False
    lifted = 0
    if 1 <= target <= counted:
        plan = plan_unstack(events, target)
        grasp_height = plan.grasp_height_mm
        planning_ok = True
        all_rims = scenario.rim_heights()
        if not np.any(np.isclose(all_rims, grasp_height)):
            lifted = int(np.sum(all_rims > grasp_height))

    lift_ok = planning_ok and lifted == target
    return CupTrialResult(
        target=target,
        counted=counted,
        lifted=lifted,
        counting_ok=counting_ok,
        planning_ok=planning_ok,
        lift_ok=lift_ok,
        success=counting_ok and planning_ok and lift_ok,
        grasp_height_mm=grasp_height,
        detected_heights_mm=tuple(float(ev.z_at_onset) for ev in events),
        tau=float(cfg.tau),
    )


# --- hidden-content shake and select ----------------------------------------


@dataclass(frozen=True)
class BoxDecision:
    """Outcome of shaking every box and matching votes against the target."""

    votes: tuple[VoteResult, ...]
    predicted_contents: tuple[str, ...]
    target_content: str
    selected_box: int | None
    status: str  # selected | target_absent | ambiguous

    def record(self) -> dict:
        return {
            "predicted_contents": list(self.predicted_contents),
            "target_content": self.target_content,
            "selected_box": self.selected_box,
            "status": self.status,
            "vote_counts": [list(v.counts) for v in self.votes],
            "ties": [v.tie for v in self.votes],
        }


def run_shake_trial(
    box_contents,
    target_content: str,
    model: MlpModel,
    seed: int,
    features: FeatureConfig = SHAKE_FEATURES,
    duration_s: float = 5.6,
    shake_freq_hz: float = 0.67,
) -> BoxDecision:
    """Shake each box, vote on its content, and select the matching box.

    If no box, or more than one, votes as the target, the decision reports
    target_absent or ambiguous instead of guessing.
    """
    if target_content not in CONTENT_CLASSES:
        raise ConfigurationError(f"unknown target content {target_content!r}")
    votes = []
    predicted = []
    for index, content in enumerate(box_contents):
        trace = synthesize_shaking(
            content,
            duration_s=duration_s,
            shake_freq_hz=shake_freq_hz,
            seed=derive_seed(seed, "box", index),
        )
        vote = classify_stream(model, trace, config=features)
        votes.append(vote)
        predicted.append(CONTENT_CLASSES[vote.final_class])

    matches = [i for i, name in enumerate(predicted) if name == target_content]
    if len(matches) == 1:
        selected, status = matches[0], "selected"
    elif not matches:
        selected, status = None, "target_absent"
    else:
        selected, status = None, "ambiguous"
    return BoxDecision(
        votes=tuple(votes),
        predicted_contents=tuple(predicted),
        target_content=target_content,
        selected_box=selected,
        status=status,
    )
