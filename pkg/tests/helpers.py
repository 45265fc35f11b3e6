"""Shared construction helpers for the test suite."""

import numpy as np

import slitqubit as sq


def random_pure(rng):
    """Haar-ish random pure two-qubit density matrix."""
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_full_rank(rng):
    """Random full-rank density matrix (complex Wishart, normalized)."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def bell_like_state(geom):
    """(|++> - |-->)/sqrt(2), produced by an odd pump mode."""
    return sq.build_state(sq.OddMode(waist=0.4e-3), geom)


def noiseless_record(rho, geom, counts_per_setting=1e9):
    settings = sq.standard_settings(geom)
    return sq.simulate_counts(
        rho, settings, geom, R0=1000.0, time=counts_per_setting / 1000.0, noiseless=True
    )


def poisson_record(rho, geom, counts_per_setting, seed):
    settings = sq.standard_settings(geom)
    return sq.simulate_counts(
        rho, settings, geom, R0=1000.0, time=counts_per_setting / 1000.0, seed=seed
    )
