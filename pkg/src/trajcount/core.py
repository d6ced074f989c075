"""Shared domain types, hyperparameters and the flat config file format."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple, Optional


class TrajcountError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigError(TrajcountError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


class FrameGeometry(NamedTuple):
    """Footage extent in pixels. Image coordinates: origin top-left, y grows down."""

    width: int
    height: int


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box: top-left corner (x, y) and positive extent (w, h)."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"bbox extent must be positive, got w={self.w} h={self.h}")


def bbox_center(b: BBox) -> Point2:
    return Point2(b.x + b.w / 2, b.y + b.h / 2)


@dataclass(frozen=True)
class DetectionRecord:
    """One detector output line: frame index, box, confidence and optional track id."""

    frame: int
    bbox: BBox
    confidence: float
    class_label: str = "vehicle"
    track_id: Optional[int] = None

    def __post_init__(self):
        if self.frame < 0:
            raise ValueError(f"frame must be non-negative, got {self.frame}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence outside [0,1]: {self.confidence}")
        if self.track_id is not None and self.track_id < 0:
            raise ValueError(f"track_id must be non-negative, got {self.track_id}")


@dataclass(frozen=True)
class HyperParams:
    """All tunables of the pipeline.

    lambda8 is kept as a floor/fraction pair because the sweep support
    threshold is per-cluster: max(lambda8_floor, lambda8_frac * num_tracks).
    """

    lambda1: float = 0.25       # detection confidence floor (inclusive)
    lambda2: float = 0.75       # grid-confidence selection threshold (strict)
    lambda3: float = 0.25       # cluster-area fraction of the mean below which clusters drop
    lambda4: float = 0.9        # tracker association gate on IoU distance
    lambda5: float = 100.0      # scale factor on the heading angle feature
    lambda6: int = 3            # minimum tracks per movement cluster
    lambda7: float = 5.0        # distance-window multiplier (units of grid_size)
    lambda8_floor: int = 5      # minimum sweep support, absolute floor
    lambda8_frac: float = 0.05  # minimum sweep support, fraction of cluster size
    lambda9: int = 3            # minimum points per directional path
    gamma_is_grid_size: bool = True  # sweep position spacing tracks grid_size
    k_min: int = 2
    k_max: int = 15
    angle_degrees: bool = False  # heading feature in degrees instead of radians


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


def validate_params(p: HyperParams) -> ValidationResult:
    """Check HyperParams invariants; returns violations instead of raising."""
    bad = []
    for name in ("lambda1", "lambda2"):
        v = getattr(p, name)
        if not (0.0 < v <= 1.0):
            bad.append(f"{name} not in (0,1]: {v}")
    for name in ("lambda3", "lambda4", "lambda5", "lambda6", "lambda7",
                 "lambda8_floor", "lambda8_frac", "lambda9"):
        v = getattr(p, name)
        if not v > 0:
            bad.append(f"{name} must be positive: {v}")
    if p.k_min < 2:
        bad.append(f"k_min must be at least 2: {p.k_min}")
    if p.k_min > p.k_max:
        bad.append(f"k_min {p.k_min} exceeds k_max {p.k_max}")
    return ValidationResult(ok=not bad, violations=tuple(bad))


# Config file: one `key = value` per line, `#` starts a comment, unknown keys
# are an error.  Round-trips losslessly (floats written with repr).

_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False}


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def _parse_value(name: str, text: str, kind: type):
    if kind is bool:
        w = text.strip().lower()
        if w not in _BOOL_WORDS:
            raise ConfigError(f"bad boolean for {name}: {text!r}")
        return _BOOL_WORDS[w]
    try:
        if kind is int:
            return int(text)
        value = float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"non-finite value for {name}: {text!r}")
    return value


def save_params(p: HyperParams, path) -> None:
    lines = [f"{f.name} = {_format_value(getattr(p, f.name))}" for f in fields(HyperParams)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_params(path, base: HyperParams | None = None) -> HyperParams:
    """Read a config file; keys absent from the file keep their current value."""
    known = {f.name: f.type for f in fields(HyperParams)}
    kinds = {"lambda6": int, "lambda8_floor": int, "lambda9": int, "k_min": int, "k_max": int,
             "gamma_is_grid_size": bool, "angle_degrees": bool}
    params = base if base is not None else HyperParams()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {raw.strip()!r}")
            name, _, text = line.partition("=")
            name = name.strip()
            if name not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {name!r}")
            value = _parse_value(name, text.strip(), kinds.get(name, float))
            params = replace(params, **{name: value})
    return params


def set_param(p: HyperParams, name: str, text: str) -> HyperParams:
    """Apply one textual `key=value` override, as used by CLI flags."""
    known = {f.name for f in fields(HyperParams)}
    if name not in known:
        raise ConfigError(f"unknown hyperparameter {name!r}")
    kinds = {"lambda6": int, "lambda8_floor": int, "lambda9": int, "k_min": int, "k_max": int,
             "gamma_is_grid_size": bool, "angle_degrees": bool}
    return replace(p, **{name: _parse_value(name, text, kinds.get(name, float))})
