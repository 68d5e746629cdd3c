"""Experiment configuration: plain-text key-value files with sections.

The grammar is INI (configparser): `[section]` headers, `key = value`
lines, `#` comments. Every key has a built-in default and the defaults
reproduce the full acceptance suite, so a config file only needs the keys
it overrides. Lists are comma-separated numbers.

Example::

    [experiment]
    seed = 42

    [fingertip]
    noise_sigma = 2.0

    [cups]
    slide_speed_mm_s = 5.0
"""

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields, replace

from fingertip.errors import ConfigurationError
from fingertip.force import DEFAULT_FORCE_TRAIN, CalibrationGrid
from fingertip.mlp import TrainConfig
from fingertip.tasks import CupScenario
from fingertip.vibro import DEFAULT_MATERIAL_TRAIN, DEFAULT_SHAKE_TRAIN, DetectConfig


@dataclass(frozen=True)
class FingertipParams:
    """Overridable constants of the synthetic fingertip."""

    stiffness: float = 1.0 / 6.0
    hysteresis_ratio: float = 0.02
    noise_sigma: float = 2.0
    gain_modulation: float = 0.25


@dataclass(frozen=True)
class MaterialCorpusParams:
    traces_per_class: int = 24  # ~1200 feature windows per class
    duration_s: float = 0.8
    speed_mm_s: float = 20.0


@dataclass(frozen=True)
class ShakeCorpusParams:
    traces_per_class: int = 12
    duration_s: float = 5.6
    shake_freq_hz: float = 0.67


@dataclass(frozen=True)
class PinchParams:
    objects: tuple[str, ...] = ("tofu", "chip")
    step_size_mm: float = 0.02


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully-resolved experiment parameters; built from defaults + one file."""

    seed: int = 42
    fingertip: FingertipParams = field(default_factory=FingertipParams)
    grid: CalibrationGrid = field(default_factory=CalibrationGrid)
    materials: MaterialCorpusParams = field(default_factory=MaterialCorpusParams)
    shaking: ShakeCorpusParams = field(default_factory=ShakeCorpusParams)
    cups: CupScenario = field(default_factory=CupScenario)
    pinch: PinchParams = field(default_factory=PinchParams)
    detect: DetectConfig = field(default_factory=DetectConfig)
    train_force: TrainConfig = DEFAULT_FORCE_TRAIN
    train_material: TrainConfig = DEFAULT_MATERIAL_TRAIN
    train_shake: TrainConfig = DEFAULT_SHAKE_TRAIN


_SECTION_FIELDS = {
    "fingertip": "fingertip",
    "calibration": "grid",
    "material_corpus": "materials",
    "shake_corpus": "shaking",
    "cups": "cups",
    "pinch": "pinch",
    "detect": "detect",
    "train.force": "train_force",
    "train.material": "train_material",
    "train.shake": "train_shake",
}


def _parse_value(raw: str, like):
    """Parse raw text into the type of the default value `like`."""
    raw = raw.strip()
    if isinstance(like, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"expected a boolean, got {raw!r}")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    if isinstance(like, tuple):
        items = [v.strip() for v in raw.split(",") if v.strip()]
        if like and isinstance(like[0], str):
            return tuple(items)
        return tuple(float(v) for v in items)
    if like is None:
        # Optional numeric field (e.g. an unset threshold).
        if raw.lower() in ("none", ""):
            return None
        return float(raw)
    if isinstance(like, str):
        return raw
    raise ConfigurationError(f"unsupported config value type {type(like).__name__}")


def _apply_section(obj, section: configparser.SectionProxy, section_name: str):
    valid = {f.name: getattr(obj, f.name) for f in fields(obj)}
    updates = {}
    for key, raw in section.items():
        if key not in valid:
            raise ConfigurationError(
                f"unknown key {key!r} in [{section_name}]; valid keys: {sorted(valid)}"
            )
        try:
            updates[key] = _parse_value(raw, valid[key])
        except ValueError as exc:
            raise ConfigurationError(f"[{section_name}] {key} = {raw!r}: {exc}") from exc
    return replace(obj, **updates) if updates else obj


def load_config(path=None, seed: int | None = None) -> ExperimentConfig:
    """Defaults, overlaid with a config file, overlaid with a CLI seed."""
    cfg = ExperimentConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(str(path))
        if not read:
            raise ConfigurationError(f"config file not found: {path}")
        for section_name in parser.sections():
            if section_name == "experiment":
                if "seed" in parser[section_name]:
                    cfg = replace(cfg, seed=int(parser[section_name]["seed"]))
                extra = set(parser[section_name]) - {"seed"}
                if extra:
                    raise ConfigurationError(
                        f"unknown keys in [experiment]: {sorted(extra)}"
                    )
                continue
            if section_name not in _SECTION_FIELDS:
                raise ConfigurationError(
                    f"unknown section [{section_name}]; valid: "
                    f"{['experiment'] + sorted(_SECTION_FIELDS)}"
                )
            attr = _SECTION_FIELDS[section_name]
            cfg = replace(
                cfg, **{attr: _apply_section(getattr(cfg, attr), parser[section_name], section_name)}
            )
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def render_config(cfg: ExperimentConfig) -> str:
    """Serialize the fully-resolved config back to the file grammar."""
    out = io.StringIO()
    out.write("[experiment]\n")
    out.write(f"seed = {cfg.seed}\n")
    for section_name, attr in _SECTION_FIELDS.items():
        obj = getattr(cfg, attr)
        out.write(f"\n[{section_name}]\n")
        for f in fields(obj):
            out.write(f"{f.name} = {_format_value(getattr(obj, f.name))}\n")
    return out.getvalue()


def config_digest(cfg: ExperimentConfig) -> str:
    """Stable hash of the fully-resolved config."""
    return hashlib.sha256(render_config(cfg).encode()).hexdigest()[:16]
