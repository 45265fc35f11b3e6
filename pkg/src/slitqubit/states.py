"""Two-spatial-qubit states: construction from a pump profile and metrics.

A photon pair produced in the crystal passes a double slit in each arm.
Post-selecting on passage leaves a two-qubit state whose computational basis
labels which slit (upper ``+`` or lower ``-``) each photon took.  The pump
field W(x) at the slit plane fixes the four amplitudes:

    w_uv proportional to W((u + v) s / 2) x quadratic pump phase,

so the diagonal pairs (++, --) sample W at +/- s and the cross pairs sample
W at the axis with an extra phase k_p s^2 / (2 z_a) picked up between the
crystal and the slits.

Basis order everywhere: (++, +-, -+, --).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .geometry import derive_params

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10


class NullStateError(ValueError):
    """The pump vanishes at every slit position, leaving no state."""


@dataclass(frozen=True)
class PlaneWave:
    """Uniform pump field, W(x) = 1."""


@dataclass(frozen=True)
class Gaussian:
    """Gaussian pump amplitude exp(-((x - center) / waist)^2)."""

    waist: float
    center: float = 0.0

    def check(self):
        if not (self.waist > 0.0):
            raise ValueError(f"Gaussian waist must be positive, got {self.waist!r}")


@dataclass(frozen=True)
class OddMode:
    """First-order odd pump mode (x / waist) exp(-(x / waist)^2), node on axis."""

    waist: float

    def check(self):
        if not (self.waist > 0.0):
            raise ValueError(f"OddMode waist must be positive, got {self.waist!r}")


@dataclass(frozen=True)
class Tabulated:
    """Sampled pump profile with linear interpolation, zero outside the range.

    ``samples`` is a sequence of (x, re, im) triples with strictly
    increasing x.
    """

    samples: tuple

    def __init__(self, samples):
        object.__setattr__(self, "samples", tuple((float(x), float(re), float(im)) for x, re, im in samples))

    def check(self):
        if len(self.samples) < 2:
            raise ValueError("Tabulated pump needs at least 2 samples")
        xs = [x for x, _, _ in self.samples]
        if any(x2 <= x1 for x1, x2 in zip(xs, xs[1:])):
            raise ValueError("Tabulated pump samples must be strictly increasing in x")


def eval_pump(pump, x):
    """Evaluate the pump field W(x) of any profile variant at a position (m)."""
    if isinstance(pump, PlaneWave):
        return complex(1.0)
    if isinstance(pump, Gaussian):
        pump.check()
        u = (x - pump.center) / pump.waist
        return complex(math.exp(-u * u))
    if isinstance(pump, OddMode):
        pump.check()
        u = x / pump.waist
        return complex(u * math.exp(-u * u))
    if isinstance(pump, Tabulated):
        pump.check()
        xs = np.array([p[0] for p in pump.samples])
        if x < xs[0] or x > xs[-1]:
            return complex(0.0)
        re = np.interp(x, xs, np.array([p[1] for p in pump.samples]))
        im = np.interp(x, xs, np.array([p[2] for p in pump.samples]))
        return complex(re, im)
    raise TypeError(f"unknown pump profile {type(pump).__name__}")


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Pure two-qubit state with amplitude matrix ``w`` indexed (u, v) in {+,-}^2."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        if w.shape != (2, 2):
            raise ValueError(f"amplitude matrix must be 2x2, got shape {w.shape}")
        norm = np.linalg.norm(w)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm must be 1 within 1e-12, got {norm!r}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def vector(self):
        """Amplitudes flattened in basis order (++, +-, -+, --)."""
        return self.w.reshape(4).copy()


def build_state(pump, geom):
    """Construct the post-selected two-qubit state for a pump profile.

    The cross amplitudes carry the pump phase accumulated over the
    crystal-to-slit distance; the diagonal amplitudes sample the pump at the
    slit centers where that quadratic phase cancels against the slit offset.
    """
    derived = derive_params(geom)
    cross_phase = cmath.exp(1j * derived.k_p * geom.s**2 / (2.0 * geom.z_a))
    w_cross = eval_pump(pump, 0.0) * cross_phase
    w = np.array(
        [
            [eval_pump(pump, +geom.s), w_cross],
            [w_cross, eval_pump(pump, -geom.s)],
        ],
        dtype=complex,
    )
    norm = np.linalg.norm(w)
    if norm <= 0.0:
        raise NullStateError("pump field vanishes at all slit positions (-s, 0, +s)")
    return TwoQubitState(w=w / norm)


def slit_basis_overlap(geom):
    """Residual overlap of the upper and lower slit modes.

    The slit modes are top-hat apertures of half width ``a`` centered at
    +/- s; their overlap is the triangle function max(0, 1 - s/a).  It is
    exactly zero for every geometry satisfying s >= a, which is what makes
    the which-slit basis orthonormal.
    """
    return max(0.0, 1.0 - geom.s / geom.a)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated 4x4 Hermitian unit-trace matrix in basis (++, +-, -+, --).

    Hermiticity and trace are enforced on construction; positivity is not,
    because linear inversion legitimately produces indefinite estimates.
    Use :attr:`is_physical` or :func:`project_physical` for positivity.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix must be Hermitian within 1e-12")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
            raise ValueError(f"density matrix trace must be 1 within 1e-12, got {np.trace(m)!r}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])

    @property
    def is_physical(self):
        return self.min_eigenvalue >= PSD_TOL


def as_matrix(rho):
    """Accept a DensityMatrix, TwoQubitState, or raw array; return a 4x4 array."""
    if isinstance(rho, DensityMatrix):
        return np.asarray(rho.matrix)
    if isinstance(rho, TwoQubitState):
        v = rho.vector
        return np.outer(v, v.conj())
    m = np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    return m


def to_density(psi):
    """Outer product |psi><psi| of a pure state as a :class:`DensityMatrix`."""
    v = psi.vector
    return DensityMatrix(matrix=np.outer(v, v.conj()))


def purity(rho):
    m = as_matrix(rho)
    return float(np.trace(m @ m).real)


def _psd_sqrt(m):
    # Eigenvalue square root with clipping: slightly indefinite inputs from
    # noisy linear inversion must not produce NaNs.
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Negative eigenvalues of either argument are clipped to zero inside the
    matrix square roots (no renormalization), so the value is well defined
    for raw linear-inversion outputs as well as proper states.
    """
    a = as_matrix(rho)
    b = as_matrix(sigma)
    if np.max(np.abs(a - a.conj().T)) > 1e-9 or np.max(np.abs(b - b.conj().T)) > 1e-9:
        raise ValueError("fidelity arguments must be Hermitian")
    sa = _psd_sqrt(0.5 * (a + a.conj().T))
    inner = sa @ (0.5 * (b + b.conj().T)) @ sa
    vals = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(np.sum(np.sqrt(vals)) ** 2)


def trace_distance(rho, sigma):
    """Half the trace norm of the difference, 0 for equal states and 1 for orthogonal."""
    d = as_matrix(rho) - as_matrix(sigma)
    d = 0.5 * (d + d.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))))


_SPIN_FLIP = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)


def concurrence(rho):
    """Two-qubit concurrence via the spin-flip construction.

    For a pure state with amplitude matrix w this reduces to
    2 |w_pp w_mm - w_pm w_mp|; the general mixed-state form is
    max(0, l1 - l2 - l3 - l4) with l_i the sorted square roots of the
    eigenvalues of rho (Y x Y) rho* (Y x Y).
    """
    m = as_matrix(rho)
    flipped = _SPIN_FLIP @ m.conj() @ _SPIN_FLIP
    vals = np.linalg.eigvals(m @ flipped)
    roots = np.sqrt(np.clip(vals.real, 0.0, None))
    roots = np.sort(roots)[::-1]
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


def metrics(rho, reference=None):
    """Standard state metrics, plus fidelity and trace distance to a reference.

    Returns a dict with keys purity, min_eigenvalue, concurrence and, when a
    reference is given, fidelity and trace_distance.
    """
    m = as_matrix(rho)
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise ValueError("metrics input must be Hermitian")
    out = {
        "purity": purity(m),
        "min_eigenvalue": float(np.linalg.eigvalsh(m)[0]),
        "concurrence": concurrence(m),
    }
    if reference is not None:
        out["fidelity"] = fidelity(m, reference)
        out["trace_distance"] = trace_distance(m, reference)
    return out


def project_physical(rho_like):
    """Nearest physical state by eigenvalue clipping.

    Hermitizes, clips negative eigenvalues to zero, renormalizes the trace.
    Idempotent on physical inputs.  Raises if nothing positive remains.
    """
    m = as_matrix(rho_like)
    m = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    total = float(np.sum(vals))
    if total <= 0.0:
        raise ValueError("matrix has no positive part to project onto")
    clipped = (vecs * (vals / total)) @ vecs.conj().T
    clipped = 0.5 * (clipped + clipped.conj().T)
    return DensityMatrix(matrix=clipped)
