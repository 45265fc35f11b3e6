import dataclasses
import math

import pytest

import slitqubit as sq
from slitqubit.geometry import Geometry, derive_params_unchecked


def test_benchmark_derived_values(geom, derived):
    assert abs(derived.x1 - 0.496e-3) <= 0.002e-3
    assert derived.k_p == pytest.approx(2.0 * math.pi / 413.1e-9, rel=1e-12)
    assert derived.k_dc == pytest.approx(derived.k_p / 2.0, rel=1e-12)
    assert derived.alpha == pytest.approx(7.8896e-8, rel=1e-4)
    assert derived.L == pytest.approx(4.0 * math.pi * derived.alpha / geom.a, rel=1e-12)
    assert derived.chi == pytest.approx(198.288, rel=1e-5)


def test_x1_quarter_phase_definition(geom, derived):
    # x1 is defined so that x1 * s / alpha = pi / 2
    assert derived.x1 * geom.s / derived.alpha == pytest.approx(math.pi / 2.0, rel=1e-12)


def test_L_override_changes_chi(geom):
    g = dataclasses.replace(geom, L_override=0.01)
    d = sq.derive_params(g)
    assert d.L == 0.01
    assert d.chi == pytest.approx(0.01 / (2.0 * geom.b), rel=1e-12)
    # other derived values are untouched
    assert d.x1 == sq.derive_params(geom).x1


@pytest.mark.parametrize(
    "field,value",
    [
        ("lambda_pump", 0.0),
        ("lambda_pump", -1e-9),
        ("z_a", 0.0),
        ("z", 0.0),
        ("s", 0.0),
        ("a", 0.0),
        ("b", 0.0),
        ("lambda_pump", float("nan")),
        ("z", float("inf")),
    ],
)
def test_positive_finite_lengths_enforced(geom, field, value):
    g = dataclasses.replace(geom, **{field: value})
    with pytest.raises(sq.GeometryError) as err:
        sq.derive_params(g)
    assert err.value.field == field


def test_detection_plane_beyond_slits(geom):
    g = dataclasses.replace(geom, z=geom.z_a)
    with pytest.raises(sq.GeometryError) as err:
        sq.derive_params(g)
    assert err.value.field == "z"


def test_slit_offset_at_least_half_width(geom):
    g = dataclasses.replace(geom, s=0.4 * geom.a)
    with pytest.raises(sq.GeometryError) as err:
        sq.derive_params(g)
    assert err.value.field == "s"


def test_detection_width_at_most_offset(geom):
    g = dataclasses.replace(geom, b=2.0 * geom.s)
    with pytest.raises(sq.GeometryError) as err:
        sq.derive_params(g)
    assert err.value.field == "b"


def test_equalities_allowed(geom):
    # s == a and b == s are both legal boundary layouts
    sq.derive_params(dataclasses.replace(geom, s=geom.a, b=geom.a))
    sq.derive_params(dataclasses.replace(geom, b=geom.s))


def test_bad_L_override(geom):
    g = dataclasses.replace(geom, L_override=-1.0)
    with pytest.raises(sq.GeometryError) as err:
        sq.derive_params(g)
    assert err.value.field == "L_override"


def test_validate_passes_benchmark(geom):
    report = sq.validate(geom)
    assert report["passed"]
    assert all(entry["passed"] for entry in report["checks"].values())
    # small Fraunhofer figure is what makes the closed forms usable here
    assert report["warnings"]["fraunhofer_figure"] == pytest.approx(0.00792, rel=1e-2)
    assert report["warnings"]["basis_overlap"] == 0.0


def test_validate_reports_failures_without_raising(geom):
    g = dataclasses.replace(geom, z=geom.z_a / 2.0, s=0.4 * geom.a)
    report = sq.validate(g)
    assert not report["passed"]
    assert not report["checks"]["z_beyond_slits"]["passed"]
    assert not report["checks"]["s_ge_a"]["passed"]
    assert report["checks"]["positive_lengths"]["passed"]


def test_derive_params_unchecked_skips_validation(geom):
    g = dataclasses.replace(geom, s=0.4 * geom.a)
    d = derive_params_unchecked(g)
    assert d.x1 > 0


def test_default_geometry_benchmark_fields():
    g = sq.default_geometry()
    assert g.lambda_pump == pytest.approx(413.1e-9)
    assert g.z - g.z_a == pytest.approx(600e-3)
    assert (g.s, g.a, g.b) == (0.25e-3, 0.05e-3, 0.05e-3)
