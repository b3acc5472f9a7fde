"""Loading and validation of JSON run and sweep configurations.

Error messages always name the offending field by its dotted path, because a
config problem the user cannot locate is not actionably reported.  Seeds are
deliberately mandatory: every run must be reproducible from its config file
alone.
"""

import json
from dataclasses import dataclass

from .errors import ConfigError, InvalidCutoffError
from .frequency import TransformKind, low_band_count
from .predictor import MAX_ORDER
from .toydit import ToyDitConfig

_MISSING = object()


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 50
    noise_seed: int = 0


@dataclass(frozen=True)
class SweepGrid:
    transforms: tuple
    low_orders: tuple
    high_orders: tuple
    intervals: tuple
    cutoff: float


def _read_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


def _section(doc: dict, name: str, required: bool = False) -> dict:
    sec = doc.get(name, _MISSING)
    if sec is _MISSING:
        if required:
            raise ConfigError(f"section {name!r} is required")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    return sec


def _no_unknown(sec: dict, allowed, path: str) -> None:
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"unknown field {path}.{key}")


def _int_field(sec, key, path, default=_MISSING, minimum=None):
    value = sec.get(key, _MISSING)
    if value is _MISSING:
        if default is _MISSING:
            raise ConfigError(f"{path}.{key} is required")
        return default
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key} must be >= {minimum}, got {value}")
    return value


def _float_field(sec, key, path, default=_MISSING):
    value = sec.get(key, _MISSING)
    if value is _MISSING:
        if default is _MISSING:
            raise ConfigError(f"{path}.{key} is required")
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key} must be a number, got {value!r}")
    return float(value)


def _transform_field(sec, key, path, default):
    value = sec.get(key, default)
    try:
        return TransformKind(value)
    except ValueError:
        raise ConfigError(
            f"{path}.{key} must be one of 'dct', 'fft', 'none', got {value!r}"
        ) from None


def _model_config(sec: dict) -> ToyDitConfig:
    _no_unknown(
        sec,
        {"layers", "channels", "tokens", "heads", "seed", "embed_dim", "mlp_ratio", "gate_scale"},
        "model",
    )
    return ToyDitConfig(
        layers=_int_field(sec, "layers", "model", 8, 1),
        channels=_int_field(sec, "channels", "model", 64, 1),
        tokens=_int_field(sec, "tokens", "model", 16, 1),
        heads=_int_field(sec, "heads", "model", 4, 1),
        seed=_int_field(sec, "seed", "model"),
        embed_dim=_int_field(sec, "embed_dim", "model", 32, 2),
        mlp_ratio=_int_field(sec, "mlp_ratio", "model", 4, 1),
        gate_scale=_float_field(sec, "gate_scale", "model", 2.0),
    )


def _sampler_config(sec: dict) -> SamplerConfig:
    _no_unknown(sec, {"steps", "noise_seed"}, "sampler")
    return SamplerConfig(
        steps=_int_field(sec, "steps", "sampler", 50, 1),
        noise_seed=_int_field(sec, "noise_seed", "sampler"),
    )


def _order_field(sec, key, path, default):
    value = _int_field(sec, key, path, default, 0)
    if value > MAX_ORDER:
        raise ConfigError(f"{path}.{key} must be <= {MAX_ORDER}, got {value}")
    return value


def _policy_fields(sec: dict, steps: int, channels: int):
    from .engine import PolicyConfig

    _no_unknown(sec, {"interval", "low_order", "high_order", "cutoff", "transform"}, "policy")
    interval = _int_field(sec, "interval", "policy", 5, 1)
    if interval > steps:
        raise ConfigError(
            f"policy.interval ({interval}) exceeds sampler.steps ({steps})"
        )
    cutoff = _float_field(sec, "cutoff", "policy", 0.25)
    transform = _transform_field(sec, "transform", "policy", "dct")
    try:
        low_band_count(channels, cutoff, transform)
    except InvalidCutoffError as exc:
        raise ConfigError(f"policy.cutoff: {exc}") from exc
    return PolicyConfig(
        interval=interval,
        low_order=_order_field(sec, "low_order", "policy", 0),
        high_order=_order_field(sec, "high_order", "policy", 2),
        cutoff=cutoff,
        transform=transform,
    )


@dataclass(frozen=True)
class RunConfig:
    model: ToyDitConfig
    sampler: SamplerConfig
    policy: object


def load_run_config(path) -> RunConfig:
    """Parse a run configuration file.

    Layout: {"model": {...}, "sampler": {...}, "policy": {...}}.  The model
    seed and the sampler noise seed are required; everything else has a
    default.
    """
    doc = _read_json(path)
    _no_unknown(doc, {"model", "sampler", "policy"}, "config")
    model = _model_config(_section(doc, "model", required=True))
    sampler = _sampler_config(_section(doc, "sampler", required=True))
    policy = _policy_fields(_section(doc, "policy"), sampler.steps, model.channels)
    return RunConfig(model, sampler, policy)


@dataclass(frozen=True)
class GridConfig:
    model: ToyDitConfig
    sampler: SamplerConfig
    grid: SweepGrid


def _int_list(sec, key, path, default, minimum=0, maximum=None):
    value = sec.get(key, _MISSING)
    if value is _MISSING:
        return tuple(default)
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}.{key} must be a non-empty list")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{path}.{key}[{i}] must be an integer, got {v!r}")
        if v < minimum or (maximum is not None and v > maximum):
            hi = "" if maximum is None else f", {maximum}"
            raise ConfigError(f"{path}.{key}[{i}] must lie in [{minimum}{hi}], got {v}")
        out.append(v)
    return tuple(out)


def load_grid_config(path) -> GridConfig:
    """Parse a sweep grid file.

    Layout: {"model": {...}, "sampler": {...}, "grid": {"transforms": [...],
    "low_orders": [...], "high_orders": [...], "intervals": [...],
    "cutoff": ...}}.  Every grid list has a full default so a minimal file
    only needs the two seeds.
    """
    doc = _read_json(path)
    _no_unknown(doc, {"model", "sampler", "grid"}, "config")
    model = _model_config(_section(doc, "model", required=True))
    sampler = _sampler_config(_section(doc, "sampler", required=True))
    sec = _section(doc, "grid")
    _no_unknown(
        sec, {"transforms", "low_orders", "high_orders", "intervals", "cutoff"}, "grid"
    )
    raw_transforms = sec.get("transforms", ["dct", "fft", "none"])
    if not isinstance(raw_transforms, list) or not raw_transforms:
        raise ConfigError("grid.transforms must be a non-empty list")
    transforms = []
    for i, v in enumerate(raw_transforms):
        try:
            transforms.append(TransformKind(v))
        except ValueError:
            raise ConfigError(
                f"grid.transforms[{i}] must be one of 'dct', 'fft', 'none', got {v!r}"
            ) from None
    transforms = tuple(transforms)
    cutoff = _float_field(sec, "cutoff", "grid", 0.25)
    for kind in transforms:
        try:
            low_band_count(model.channels, cutoff, kind)
        except InvalidCutoffError as exc:
            raise ConfigError(f"grid.cutoff: {exc}") from exc
    intervals = _int_list(sec, "intervals", "grid", (3, 5, 7), 1, sampler.steps)
    grid = SweepGrid(
        transforms=transforms,
        low_orders=_int_list(sec, "low_orders", "grid", (0, 1, 2), 0, MAX_ORDER),
        high_orders=_int_list(sec, "high_orders", "grid", (0, 1, 2), 0, MAX_ORDER),
        intervals=intervals,
        cutoff=cutoff,
    )
    return GridConfig(model, sampler, grid)
