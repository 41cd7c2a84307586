"""Run configuration: every module tunable, keyed as ``module.key``.

Config files are flat text: one ``section.key = value`` assignment per
line, ``#`` comments, blank lines ignored.  Unknown keys are rejected so
typos fail fast instead of silently running defaults.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UsageError
from .fp_enhance import FilterParams
from .fp_match import ElasticTolerances
from .fusion import FusionParams
from .hwmodel import HwParams

BACKENDS = ("reference", "hardware-model")


@dataclass
class MinutiaeParams:
    border_margin: int = 12


@dataclass
class MatchParams:
    neighbor_radius: float = 50.0
    hypotheses: int = 3
    delta_r: float = 8.0
    delta_theta_deg: float = 8.0
    delta_o_deg: float = 15.0
    growth_per_100px: float = 0.5

    def tolerances(self) -> ElasticTolerances:
        return ElasticTolerances(
            delta_r=self.delta_r,
            delta_theta=math.radians(self.delta_theta_deg),
            delta_o=math.radians(self.delta_o_deg),
            growth_per_100px=self.growth_per_100px,
        )


@dataclass
class IrisParams:
    radial_samples: int = 64
    angular_samples: int = 360
    outer_multiple: float = 2.8
    blur_sigma: float = 5.0
    area_min: float = 300.0
    area_frac_max: float = 0.25
    ecc_max: float = 0.6
    sigma1: float = 4.0
    rotations: int = 8


@dataclass
class EvalParams:
    enroll_fp: int = 1     # fingerprint impressions consumed by enrollment
    enroll_iris: int = 3   # iris images consumed by enrollment (odd)
    sweep_points: int = 201


@dataclass
class RunConfig:
    backend: str = "reference"
    dataset_root: Path | None = None
    fp_enhance: FilterParams = field(default_factory=FilterParams)
    fp_minutiae: MinutiaeParams = field(default_factory=MinutiaeParams)
    fp_match: MatchParams = field(default_factory=MatchParams)
    iris: IrisParams = field(default_factory=IrisParams)
    fusion: FusionParams = field(default_factory=FusionParams)
    hwmodel: HwParams = field(default_factory=HwParams)
    eval: EvalParams = field(default_factory=EvalParams)


_SECTIONS = {
    "fp_enhance": FilterParams,
    "fp_minutiae": MinutiaeParams,
    "fp_match": MatchParams,
    "iris": IrisParams,
    "fusion": FusionParams,
    "hwmodel": HwParams,
    "eval": EvalParams,
}


def _convert(raw: str, target_type, key: str):
    raw = raw.strip()
    if target_type is float:
        return float(raw)
    if target_type is int:
        return int(raw)
    if target_type is str:
        return raw
    if target_type is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    raise UsageError(f"config key {key} has unsupported type {target_type}")


def apply_assignment(config: RunConfig, key: str, raw_value: str) -> None:
    key = key.strip()
    if key == "backend":
        if raw_value.strip() not in BACKENDS:
            raise UsageError(f"backend must be one of {BACKENDS}")
        config.backend = raw_value.strip()
        return
    if key == "dataset_root":
        config.dataset_root = Path(raw_value.strip())
        return
    if "." not in key:
        raise UsageError(f"unknown config key {key!r}")
    section_name, field_name = key.split(".", 1)
    if section_name not in _SECTIONS:
        raise UsageError(f"unknown config section {section_name!r}")
    section = getattr(config, section_name)
    fields = {f.name: f for f in dataclasses.fields(section)}
    if field_name not in fields:
        raise UsageError(f"unknown config key {key!r}")
    current = getattr(section, field_name)
    target_type = type(current)
    try:
        value = _convert(raw_value, target_type, key)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw_value!r}") from exc
    updated = dataclasses.replace(section, **{field_name: value})
    setattr(config, section_name, updated)


def load_config(path: str | Path | None = None,
                overrides: list[str] | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus ``key=value`` overrides."""
    config = RunConfig()
    if path is not None:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = stripped.split("=", 1)
            apply_assignment(config, key, raw)
    for item in overrides or []:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        apply_assignment(config, key, raw)
    return config
