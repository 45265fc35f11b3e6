"""Run-configuration parsing.

A run config is a single JSON object with sections "geometry", "pump",
"calibration", "noise", "mle" and "output".  All lengths are in mm and
wavelengths in nm, with units suffixed in the key names so a bare number
cannot be misread; values are converted to SI on load.  Errors carry the
dotted path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .geometry import Geometry
from .states import Gaussian, OddMode, PlaneWave, Tabulated
from .tomography import MleConfig

NM = 1e-9
MM = 1e-3


class ConfigError(ValueError):
    """A config field is missing, unknown, or has an invalid value."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class OutputConfig:
    """Where report artifacts go; figures can be disabled wholesale."""

    figures: bool = True
    figure_dir: str | None = None


@dataclass(frozen=True)
class RunConfig:
    geometry: Geometry
    pump: object = field(default_factory=PlaneWave)
    R0: float = 1000.0
    time: float = 1.0
    seed: int | None = None
    noiseless: bool = False
    mle: MleConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)


def _section(data, key, path, required=False):
    value = data.get(key)
    if value is None:
        if required:
            raise ConfigError(f"{path}{key}", "section is required")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path}{key}", f"expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"{path}{key}", f"unknown field (expected one of {sorted(allowed)})")


def _number(mapping, key, path, required=False, default=None):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}{key}", "field is required")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key}", f"expected a number, got {value!r}")
    return float(value)


def parse_geometry(data, path="geometry."):
    _reject_unknown(
        data,
        {"lambda_pump_nm", "z_a_mm", "z_minus_za_mm", "s_mm", "a_mm", "b_mm", "L_mm"},
        path,
    )
    lam = _number(data, "lambda_pump_nm", path, required=True) * NM
    z_a = _number(data, "z_a_mm", path, required=True) * MM
    dz = _number(data, "z_minus_za_mm", path, required=True) * MM
    s = _number(data, "s_mm", path, required=True) * MM
    a = _number(data, "a_mm", path, required=True) * MM
    b = _number(data, "b_mm", path, required=True) * MM
    L = _number(data, "L_mm", path)
    geom = Geometry(
        lambda_pump=lam,
        z_a=z_a,
        z=z_a + dz,
        s=s,
        a=a,
        b=b,
        L_override=None if L is None else L * MM,
    )
    try:
        geom.check()
    except ValueError as exc:
        raise ConfigError(path.rstrip("."), str(exc)) from exc
    return geom


def parse_pump(data, path="pump."):
    kind = data.get("type")
    if kind == "plane-wave" or kind is None and not data:
        _reject_unknown(data, {"type"}, path)
        return PlaneWave()
    if kind == "gaussian":
        _reject_unknown(data, {"type", "waist_mm", "center_mm"}, path)
        waist = _number(data, "waist_mm", path, required=True)
        center = _number(data, "center_mm", path, default=0.0)
        if waist <= 0:
            raise ConfigError(f"{path}waist_mm", f"must be positive, got {waist!r}")
        return Gaussian(waist=waist * MM, center=center * MM)
    if kind == "odd-mode":
        _reject_unknown(data, {"type", "waist_mm"}, path)
        waist = _number(data, "waist_mm", path, required=True)
        if waist <= 0:
            raise ConfigError(f"{path}waist_mm", f"must be positive, got {waist!r}")
        return OddMode(waist=waist * MM)
    if kind == "tabulated":
        _reject_unknown(data, {"type", "samples"}, path)
        samples = data.get("samples")
        if not isinstance(samples, list) or not samples:
            raise ConfigError(f"{path}samples", "expected a non-empty list of [x_mm, re, im] triples")
        try:
            pump = Tabulated([(row[0] * MM, row[1], row[2]) for row in samples])
            pump.check()
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError(f"{path}samples", str(exc)) from exc
        return pump
    raise ConfigError(
        f"{path}type",
        f"unknown pump type {kind!r} (expected plane-wave, gaussian, odd-mode, or tabulated)",
    )


def parse_mle(data, path="mle."):
    _reject_unknown(data, {"max_iterations", "parameter_tolerance", "model", "initializer"}, path)
    kwargs = {}
    if "max_iterations" in data:
        value = data["max_iterations"]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}max_iterations", f"expected an integer, got {value!r}")
        kwargs["max_iterations"] = value
    if "parameter_tolerance" in data:
        kwargs["parameter_tolerance"] = _number(data, "parameter_tolerance", path)
    if "model" in data:
        kwargs["model"] = data["model"]
    if "initializer" in data:
        kwargs["initializer"] = data["initializer"]
    cfg = MleConfig(**kwargs)
    try:
        cfg.check()
    except ValueError as exc:
        raise ConfigError(path.rstrip("."), str(exc)) from exc
    return cfg


def parse_config(data):
    """Build a :class:`RunConfig` from a decoded JSON object."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", f"expected an object, got {type(data).__name__}")
    _reject_unknown(data, {"geometry", "pump", "calibration", "noise", "mle", "output"}, "")

    geometry = parse_geometry(_section(data, "geometry", "", required=True))
    pump = parse_pump(_section(data, "pump", ""))

    calibration = _section(data, "calibration", "")
    _reject_unknown(calibration, {"R0_hz", "time_s"}, "calibration.")
    R0 = _number(calibration, "R0_hz", "calibration.", default=1000.0)
    time = _number(calibration, "time_s", "calibration.", default=1.0)
    if R0 <= 0:
        raise ConfigError("calibration.R0_hz", f"must be positive, got {R0!r}")
    if time <= 0:
        raise ConfigError("calibration.time_s", f"must be positive, got {time!r}")

    noise = _section(data, "noise", "")
    _reject_unknown(noise, {"seed", "noiseless"}, "noise.")
    seed = noise.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("noise.seed", f"expected an integer, got {seed!r}")
    noiseless = noise.get("noiseless", False)
    if not isinstance(noiseless, bool):
        raise ConfigError("noise.noiseless", f"expected a boolean, got {noiseless!r}")

    mle_cfg = parse_mle(_section(data, "mle", "")) if "mle" in data else None

    output = _section(data, "output", "")
    _reject_unknown(output, {"figures", "figure_dir"}, "output.")
    figures = output.get("figures", True)
    if not isinstance(figures, bool):
        raise ConfigError("output.figures", f"expected a boolean, got {figures!r}")
    figure_dir = output.get("figure_dir")
    if figure_dir is not None and not isinstance(figure_dir, str):
        raise ConfigError("output.figure_dir", f"expected a string, got {figure_dir!r}")

    return RunConfig(
        geometry=geometry,
        pump=pump,
        R0=R0,
        time=time,
        seed=seed,
        noiseless=noiseless,
        mle=mle_cfg,
        output=OutputConfig(figures=figures, figure_dir=figure_dir),
    )


def load_config(path):
    """Read and parse a JSON run config from disk."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON in {path}: {exc}") from exc
    return parse_config(data)
