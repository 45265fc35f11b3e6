"""The sixteen coincidence measurements: settings, operators, rates, counts.

Each arm of the coincidence setup is configured either at the slit plane
(detector images one source slit, projecting onto |+> or |->) or at the
detection plane behind a movable slit at position x (projecting onto the
diffracted superposition selected by that slit).  Sixteen combinations over
positions {0, x1} form an informationally complete set for the two-qubit
state, ordered so that

    1-4    both arms slit plane, pairs (++, +-, -+, --)
    5-8    signal slit plane x idler detection plane (+, 0), (+, x1), (-, 0), (-, x1)
    9-10   signal detection plane x idler slit (0, +), (x1, +)
    11-12  both detection plane (0, 0), (0, x1)
    13-14  signal detection plane x idler slit (0, -), (x1, -)
    15-16  both detection plane (x1, 0), (x1, x1)

A detection-plane arm transmits only a fraction of the diffracted light;
its operator carries the scale 2b / L, and simulated integration times are
stretched by chi = L / (2b) per detection arm so expected counts stay
comparable across the three setting classes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .geometry import derive_params
from .propagation import r_coeff_raw
from .states import as_matrix

_MM = 1e-3


@dataclass(frozen=True)
class SlitArm:
    """Arm detecting at the slit plane: which-slit projector onto +1 or -1."""

    slit: int

    def __post_init__(self):
        if self.slit not in (+1, -1):
            raise ValueError(f"slit must be +1 or -1, got {self.slit!r}")


@dataclass(frozen=True)
class DetectionArm:
    """Arm detecting behind a detection-plane slit centered at x (m)."""

    x: float


@dataclass(frozen=True)
class MeasurementSetting:
    """One row of the measurement protocol: arm_s is the signal arm."""

    id: int
    arm_s: object
    arm_i: object

    def detection_arm_count(self):
        return sum(isinstance(arm, DetectionArm) for arm in (self.arm_s, self.arm_i))


def standard_settings(geom):
    """The sixteen standard settings with detection positions {0, x1}."""
    derived = derive_params(geom)
    x0, x1 = 0.0, derived.x1
    plus, minus = SlitArm(+1), SlitArm(-1)
    rows = [
        (plus, plus),
        (plus, minus),
        (minus, plus),
        (minus, minus),
        (plus, DetectionArm(x0)),
        (plus, DetectionArm(x1)),
        (minus, DetectionArm(x0)),
        (minus, DetectionArm(x1)),
        (DetectionArm(x0), plus),
        (DetectionArm(x1), plus),
        (DetectionArm(x0), DetectionArm(x0)),
        (DetectionArm(x0), DetectionArm(x1)),
        (DetectionArm(x0), minus),
        (DetectionArm(x1), minus),
        (DetectionArm(x1), DetectionArm(x0)),
        (DetectionArm(x1), DetectionArm(x1)),
    ]
    return [MeasurementSetting(id=i + 1, arm_s=s_arm, arm_i=i_arm) for i, (s_arm, i_arm) in enumerate(rows)]


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Scaled measurement operator E (4x4) and its transmission scale factor.

    The expected coincidence rate is R0 * Tr(rho E); the scale (2b/L per
    detection arm) is already folded into E.
    """

    operator: np.ndarray
    scale: float


def _arm_operator(arm, geom, derived, unit_modulus):
    if isinstance(arm, SlitArm):
        idx = 0 if arm.slit == +1 else 1
        op = np.zeros((2, 2), dtype=complex)
        op[idx, idx] = 1.0
        return op, 1.0
    # Detection arm: project onto the post-selected mode.  The measurement
    # direction is the conjugate of (r+, r-); with it, Tr(rho E) reproduces
    # |B(x_s, x_i)|^2 for pure states.  The 1/2 makes the operator a scaled
    # projector of unit weight in the |r| = 1 idealization.
    r = np.array(
        [
            r_coeff_raw(arm.x, +1, geom.s, geom.a, derived.alpha),
            r_coeff_raw(arm.x, -1, geom.s, geom.a, derived.alpha),
        ],
        dtype=complex,
    )
    if unit_modulus:
        r = r / np.abs(r)
    v = r.conj()
    scale = 2.0 * geom.b / derived.L
    return scale * 0.5 * np.outer(v, v.conj()), scale


def povm_element(setting, geom, unit_modulus=False):
    """Measurement operator for one setting.

    ``unit_modulus`` replaces each r coefficient by its phase factor,
    the idealization under which the closed-form inversion is exact.
    """
    derived = derive_params(geom)
    op_s, scale_s = _arm_operator(setting.arm_s, geom, derived, unit_modulus)
    op_i, scale_i = _arm_operator(setting.arm_i, geom, derived, unit_modulus)
    return PovmElement(operator=np.kron(op_s, op_i), scale=scale_s * scale_i)


def expected_rates(rho, settings, geom, R0, unit_modulus=False):
    """Expected coincidence rate R0 * Tr(rho E_k) for every setting.

    Requires a physical state; tiny negative traces from rounding are
    clamped to zero.
    """
    if not R0 > 0.0:
        raise ValueError(f"R0 must be positive, got {R0!r}")
    m = as_matrix(rho)
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise ValueError("expected_rates requires a Hermitian state")
    if abs(np.trace(m).real - 1.0) > 1e-9:
        raise ValueError("expected_rates requires a unit-trace state")
    if np.linalg.eigvalsh(m)[0] < -1e-10:
        raise ValueError("expected_rates requires a positive semidefinite state")
    rates = np.empty(len(settings), dtype=float)
    for k, setting in enumerate(settings):
        element = povm_element(setting, geom, unit_modulus=unit_modulus)
        rates[k] = max(0.0, float(np.trace(m @ element.operator).real)) * R0
    return rates


@dataclass(frozen=True, eq=False)
class CountRecord:
    """Coincidence counts for the sixteen settings plus calibration metadata.

    counts          integer counts per setting
    times           per-setting integration time (s)
    time_base       slit-pair integration time (s); detection arms get
                    time_base * chi per arm
    R0              configured coincidence normalization (counts/s)
    chi             diffraction-loss factor used for the times
    seed            RNG seed when counts were sampled, else None
    exact_rates     unrounded expected rates (Hz) for noiseless records
    """

    settings: tuple
    counts: np.ndarray
    times: np.ndarray
    time_base: float
    R0: float
    chi: float
    seed: int | None = None
    exact_rates: np.ndarray | None = None

    def __post_init__(self):
        settings = tuple(self.settings)
        counts = np.asarray(self.counts, dtype=np.int64)
        times = np.asarray(self.times, dtype=float)
        if len(settings) != 16 or sorted(s.id for s in settings) != list(range(1, 17)):
            raise ValueError("a count record must contain settings with ids 1..16 exactly once")
        if counts.shape != (16,) or times.shape != (16,):
            raise ValueError("counts and times must each have 16 entries")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if np.any(times <= 0.0):
            raise ValueError("integration times must be positive")
        counts.flags.writeable = False
        times.flags.writeable = False
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "times", times)
        if self.exact_rates is not None:
            rates = np.asarray(self.exact_rates, dtype=float)
            if rates.shape != (16,):
                raise ValueError("exact_rates must have 16 entries")
            rates.flags.writeable = False
            object.__setattr__(self, "exact_rates", rates)

    def effective_counts(self):
        """Counts at full precision: exact rate times time when available."""
        if self.exact_rates is not None:
            return self.exact_rates * self.times
        return self.counts.astype(float)


def setting_times(settings, time, chi):
    """Per-setting integration times: base time stretched chi-fold per detection arm."""
    return np.array([time * chi**setting.detection_arm_count() for setting in settings], dtype=float)


def simulate_counts(rho, settings, geom, R0, time, seed=None, noiseless=False, unit_modulus=False):
    """Forward-simulate a :class:`CountRecord` for a state.

    Noiseless records keep the exact rates alongside the rounded counts;
    noisy records draw each setting independently from Poisson(rate * time)
    with a dedicated generator seeded by ``seed``.
    """
    if not time > 0.0:
        raise ValueError(f"time must be positive, got {time!r}")
    derived = derive_params(geom)
    rates = expected_rates(rho, settings, geom, R0, unit_modulus=unit_modulus)
    times = setting_times(settings, time, derived.chi)
    expected = rates * times
    if noiseless:
        counts = np.rint(expected).astype(np.int64)
        return CountRecord(
            settings=tuple(settings),
            counts=counts,
            times=times,
            time_base=float(time),
            R0=float(R0),
            chi=float(derived.chi),
            seed=None,
            exact_rates=rates,
        )
    rng = np.random.default_rng(seed)
    counts = rng.poisson(expected).astype(np.int64)
    return CountRecord(
        settings=tuple(settings),
        counts=counts,
        times=times,
        time_base=float(time),
        R0=float(R0),
        chi=float(derived.chi),
        seed=seed,
        exact_rates=None,
    )


def _arm_to_json(arm):
    if isinstance(arm, SlitArm):
        return "+" if arm.slit == +1 else "-"
    return {"x_mm": arm.x / _MM}


def _arm_from_json(value):
    if value == "+":
        return SlitArm(+1)
    if value == "-":
        return SlitArm(-1)
    if isinstance(value, dict) and "x_mm" in value:
        return DetectionArm(x=float(value["x_mm"]) * _MM)
    raise ValueError(f"unrecognized arm encoding {value!r}")


def record_to_dict(record):
    out = {
        "settings": [
            {"id": s.id, "arm_s": _arm_to_json(s.arm_s), "arm_i": _arm_to_json(s.arm_i)}
            for s in record.settings
        ],
        "counts": [int(c) for c in record.counts],
        "time_s": record.time_base,
        "times_s": [float(t) for t in record.times],
        "R0_hz": record.R0,
        "chi": record.chi,
    }
    if record.seed is not None:
        out["seed"] = record.seed
    if record.exact_rates is not None:
        out["exact_rates"] = [float(r) for r in record.exact_rates]
    return out


def record_from_dict(data):
    settings = tuple(
        MeasurementSetting(
            id=int(entry["id"]),
            arm_s=_arm_from_json(entry["arm_s"]),
            arm_i=_arm_from_json(entry["arm_i"]),
        )
        for entry in data["settings"]
    )
    return CountRecord(
        settings=settings,
        counts=np.asarray(data["counts"], dtype=np.int64),
        times=np.asarray(data["times_s"], dtype=float),
        time_base=float(data["time_s"]),
        R0=float(data["R0_hz"]),
        chi=float(data["chi"]),
        seed=data.get("seed"),
        exact_rates=np.asarray(data["exact_rates"], dtype=float) if "exact_rates" in data else None,
    )


def save_record(record, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record_to_dict(record), fh, indent=2)
        fh.write("\n")


def load_record(path):
    with open(path, encoding="utf-8") as fh:
        return record_from_dict(json.load(fh))


def _arm_to_text(arm):
    if isinstance(arm, SlitArm):
        return "+" if arm.slit == +1 else "-"
    return f"x={arm.x / _MM:.6g}mm"


def record_to_csv(record, path):
    """One row per setting: mirrors the JSON record for spreadsheet use."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["id", "arm_s", "arm_i", "time_s", "counts"]
        if record.exact_rates is not None:
            header.append("exact_rate_hz")
        writer.writerow(header)
        for k, setting in enumerate(record.settings):
            row = [
                setting.id,
                _arm_to_text(setting.arm_s),
                _arm_to_text(setting.arm_i),
                repr(float(record.times[k])),
                int(record.counts[k]),
            ]
            if record.exact_rates is not None:
                row.append(repr(float(record.exact_rates[k])))
            writer.writerow(row)
