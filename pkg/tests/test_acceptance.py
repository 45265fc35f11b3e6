"""Acceptance gate: eight end-to-end checks, one verdict line each.

Each test records a ``criterion N PASS|FAIL`` line that the conftest
terminal-summary hook prints at the end of the pytest run, then asserts,
so a regression fails the suite as usual.
"""

import functools
import time

import numpy as np
import pytest

import slitqubit as sq
from helpers import noiseless_record, poisson_record, random_full_rank, random_pure


VERDICTS = []


def criterion(number, description):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                VERDICTS.append(f"criterion {number} FAIL  {description} [{type(exc).__name__}]")
                raise
            VERDICTS.append(f"criterion {number} PASS  {description}")

        return run

    return wrap


@criterion(1, "derived quarter-phase position x1 = 0.496 +/- 0.002 mm in < 1 ms")
def test_criterion_1_geometry(geom):
    elapsed = min(
        _timed(lambda: sq.derive_params(geom))[1] for _ in range(5)
    )
    derived = sq.derive_params(geom)
    assert abs(derived.x1 - 0.496e-3) <= 0.002e-3
    assert elapsed < 1e-3


def _timed(fn):
    start = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - start


@criterion(2, "noiseless round trip fidelity >= 1 - 1e-9 for 100 random states in < 1 s")
def test_criterion_2_noiseless_round_trip(geom):
    rng = np.random.default_rng(20260815)
    states = [random_pure(rng) for _ in range(50)] + [random_full_rank(rng) for _ in range(50)]

    def run():
        worst = 1.0
        for rho in states:
            record = noiseless_record(rho, geom)
            estimate = sq.invert_exact(record, geom).rho_hat
            worst = min(worst, sq.fidelity(estimate, rho))
        return worst

    worst, elapsed = _timed(run)
    assert worst >= 1.0 - 1e-9
    assert elapsed < 1.0


@criterion(3, "closed-form inversion >= 0.99 on three pump shapes; exact under unit-modulus model")
def test_criterion_3_paper_form_inverter(geom, settings):
    for pump in (sq.Gaussian(waist=0.4e-3), sq.PlaneWave(), sq.OddMode(waist=0.4e-3)):
        rho = sq.to_density(sq.build_state(pump, geom))
        record = noiseless_record(rho, geom)
        assert sq.fidelity(sq.invert_paper(record, geom).rho_hat, rho) >= 0.99
        unit_record = sq.simulate_counts(
            rho, settings, geom, R0=1000.0, time=1e9, noiseless=True, unit_modulus=True
        )
        unit_fid = sq.fidelity(sq.invert_paper(unit_record, geom).rho_hat, rho)
        assert unit_fid >= 1.0 - 1e-9


@criterion(4, "closed-form detection integral within 5% of quadrature on the 30-point grid in < 10 s")
def test_criterion_4_integral_oracle(geom, derived):
    def run():
        cf = sq.fresnel_factor(derived.alpha)
        worst = 0.0
        for x in (0.0, derived.x1, -derived.x1, 2 * derived.x1, -2 * derived.x1):
            for q in (0.0, np.pi / (4 * geom.b), -np.pi / (4 * geom.b)):
                for sign in (+1, -1):
                    closed = sq.i_integral_closed(x, sign, q, geom)
                    quad = sq.i_integral_quadrature(x, sign, q, geom) / cf
                    scale = max(abs(quad), abs(closed), 1e-30)
                    worst = max(worst, abs(quad - closed) / scale)
        return worst

    worst, elapsed = _timed(run)
    assert worst <= 0.05
    assert elapsed < 10.0


@criterion(5, "concurrence: odd-mode pump = 1; plane-wave pump matches |sin(kp s^2 / 2 zA)|")
def test_criterion_5_entanglement(geom, derived):
    odd = sq.to_density(sq.build_state(sq.OddMode(waist=0.4e-3), geom))
    assert sq.concurrence(odd) == pytest.approx(1.0, abs=1e-9)
    plane = sq.to_density(sq.build_state(sq.PlaneWave(), geom))
    phase = derived.k_p * geom.s**2 / (2.0 * geom.z_a)
    value = sq.concurrence(plane)
    assert value == pytest.approx(abs(np.sin(phase)), abs=1e-3)
    assert value == pytest.approx(0.69258, abs=1e-4)


@criterion(6, "MLE over 50 Poisson trials: physical estimates, mean fidelity >= 0.98")
def test_criterion_6_mle_physicality(geom):
    rho = sq.to_density(sq.build_state(sq.OddMode(waist=0.4e-3), geom))
    fidelities = []
    for seed in range(50):
        record = poisson_record(rho, geom, 1e4, seed)
        result = sq.mle(record, geom)
        assert result.rho_hat.min_eigenvalue >= -1e-10
        assert abs(np.trace(result.rho_hat.matrix).real - 1.0) <= 1e-9
        fidelities.append(sq.fidelity(result.rho_hat, rho))
    assert np.mean(fidelities) >= 0.98


@criterion(7, "standard settings are informationally complete; collapsing x1 to 0 degrades rank")
def test_criterion_7_informational_completeness(geom, settings):
    mm = sq.measurement_matrix(settings, geom)
    assert np.linalg.matrix_rank(mm.matrix) == 16
    assert np.isfinite(mm.condition_number)
    collapsed = []
    import dataclasses

    for s in settings:
        arm_s = sq.DetectionArm(0.0) if isinstance(s.arm_s, sq.DetectionArm) else s.arm_s
        arm_i = sq.DetectionArm(0.0) if isinstance(s.arm_i, sq.DetectionArm) else s.arm_i
        collapsed.append(dataclasses.replace(s, arm_s=arm_s, arm_i=arm_i))
    with pytest.raises(sq.DegenerateSettingsError):
        sq.measurement_matrix(collapsed, geom)


@criterion(8, "slit modes orthogonal: exact overlap 0 for separated slits, |<f(0)|f(x1)>| <= 1e-3")
def test_criterion_8_basis_orthogonality(geom, derived):
    assert sq.slit_basis_overlap(geom) == 0.0
    import dataclasses

    touching = dataclasses.replace(geom, s=geom.a)
    assert sq.slit_basis_overlap(touching) == 0.0
    assert abs(sq.f_overlap(0.0, derived.x1, geom)) <= 1e-3
