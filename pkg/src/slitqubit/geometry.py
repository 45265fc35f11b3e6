"""Experimental geometry and the optical parameters derived from it.

The setup is a two-photon double-slit interferometer: a nonlinear crystal at
the origin, a symmetric double slit in each photon arm at distance ``z_a``,
and a movable detection double slit in a plane at distance ``z`` from the
crystal.  Everything downstream (post-selection amplitudes, measurement
operators, inversion formulas) is a function of a handful of derived
quantities collected in :class:`DerivedGeometry`.

Units are SI (meters) throughout the library; the CLI config layer converts
from millimeter / nanometer keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class GeometryError(ValueError):
    """A geometry field violates a physical constraint."""

    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class Geometry:
    """Physical layout of the interferometer.

    lambda_pump  pump wavelength (m)
    z_a          crystal-to-source-double-slit distance (m)
    z            crystal-to-detection-plane distance (m), z > z_a
    s            slit-center offset from the axis (m); centers sit at +/- s
    a            source slit half width (m)
    b            detection slit half width (m)
    L_override   optional manual diffraction-pattern width (m)
    """

    lambda_pump: float
    z_a: float
    z: float
    s: float
    a: float
    b: float
    L_override: float | None = None

    def check(self):
        """Raise :class:`GeometryError` on the first violated constraint."""
        for name in ("lambda_pump", "z_a", "z", "s", "a", "b"):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise GeometryError(name, f"{name} must be a positive finite length, got {value!r}")
        if self.L_override is not None and not (self.L_override > 0.0):
            raise GeometryError("L_override", f"L_override must be positive when given, got {self.L_override!r}")
        if not self.z > self.z_a:
            raise GeometryError("z", f"detection plane must lie beyond the double slit (z={self.z} <= z_a={self.z_a})")
        if self.s < self.a:
            # s >= a keeps the two slit modes non-overlapping, hence an orthonormal qubit basis
            raise GeometryError("s", f"slit offset must be at least the slit half width (s={self.s} < a={self.a})")
        if self.b > self.s:
            raise GeometryError("b", f"detection slit half width must not exceed the slit offset (b={self.b} > s={self.s})")


@dataclass(frozen=True)
class DerivedGeometry:
    """Optical parameters computed from a :class:`Geometry`.

    k_p    pump wavenumber (rad/m)
    k_dc   down-converted-photon wavenumber, k_p / 2 (degenerate pairs)
    alpha  diffraction scale (z - z_a) / k_dc (m^2)
    x1     detection position where the two slit amplitudes differ by a
           quarter phase (m); the spatial analog of a circular-basis setting
    L      effective transverse width of the diffraction pattern (m)
    chi    diffraction-loss compensation factor L / (2 b)
    """

    k_p: float
    k_dc: float
    alpha: float
    x1: float
    L: float
    chi: float


def derive_params(geom):
    """Validate ``geom`` and compute its :class:`DerivedGeometry`.

    The down-converted wavenumber k_dc = k_p / 2 governs propagation: each
    photon of the degenerate pair carries half the pump energy, i.e. twice
    the pump wavelength.  The default pattern width L is the full central
    lobe of the sinc envelope, 4 pi alpha / a.
    """
    geom.check()
    k_p = 2.0 * math.pi / geom.lambda_pump
    k_dc = k_p / 2.0
    alpha = (geom.z - geom.z_a) / k_dc
    x1 = alpha * math.pi / (2.0 * geom.s)
    L = geom.L_override if geom.L_override is not None else 4.0 * math.pi * alpha / geom.a
    chi = L / (2.0 * geom.b)
    return DerivedGeometry(k_p=k_p, k_dc=k_dc, alpha=alpha, x1=x1, L=L, chi=chi)


def validate(geom):
    """Report each constraint as pass/fail plus numerical health warnings.

    Unlike :meth:`Geometry.check` this never raises; it returns a dict with
    one entry per constraint and two advisory figures:

    * ``fraunhofer_figure``: b^2 / (4 alpha), the phase spread across a
      detection slit.  The stationary-phase closed forms assume it is small.
    * ``basis_overlap``: residual overlap of the two slit modes, zero for
      any geometry passing the constraints.
    """
    checks = {}

    def record(name, passed, detail):
        checks[name] = {"passed": bool(passed), "detail": detail}

    positive = all(
        getattr(geom, name) > 0.0 and math.isfinite(getattr(geom, name))
        for name in ("lambda_pump", "z_a", "z", "s", "a", "b")
    )
    record("positive_lengths", positive, "all lengths strictly positive and finite")
    record("z_beyond_slits", geom.z > geom.z_a, f"z={geom.z} > z_a={geom.z_a}")
    record("s_ge_a", geom.s >= geom.a, f"s={geom.s} >= a={geom.a}")
    record("b_le_s", geom.b <= geom.s, f"b={geom.b} <= s={geom.s}")

    warnings = {}
    if positive and geom.z > geom.z_a:
        derived = derive_params_unchecked(geom)
        warnings["fraunhofer_figure"] = geom.b**2 / (4.0 * derived.alpha)
        warnings["x1"] = derived.x1
        warnings["chi"] = derived.chi
    warnings["basis_overlap"] = max(0.0, 1.0 - geom.s / geom.a) if geom.a > 0 else float("nan")

    return {
        "passed": all(entry["passed"] for entry in checks.values()),
        "checks": checks,
        "warnings": warnings,
    }


def derive_params_unchecked(geom):
    """:func:`derive_params` without constraint checks, for diagnostics only."""
    k_p = 2.0 * math.pi / geom.lambda_pump
    k_dc = k_p / 2.0
    alpha = (geom.z - geom.z_a) / k_dc
    x1 = alpha * math.pi / (2.0 * geom.s)
    L = geom.L_override if geom.L_override is not None else 4.0 * math.pi * alpha / geom.a
    return DerivedGeometry(k_p=k_p, k_dc=k_dc, alpha=alpha, x1=x1, L=L, chi=L / (2.0 * geom.b))


def default_geometry():
    """The Kr-ion-pump benchmark layout used throughout the tests.

    413.1 nm pump, slits 200 mm from the crystal, detection plane 600 mm
    behind the slits, 0.1 mm wide slits with centers 0.5 mm apart, and an
    equal detection slit width.
    """
    return Geometry(
        lambda_pump=413.1e-9,
        z_a=200e-3,
        z=800e-3,
        s=0.25e-3,
        a=0.05e-3,
        b=0.05e-3,
    )
