"""Density-matrix reconstruction from coincidence records.

Three reconstructors, in increasing order of robustness to noise:

* :func:`invert_exact` solves the full linear system rate_k = R0 Tr(rho E_k)
  by least squares over the 15 free real parameters of a Hermitian
  unit-trace matrix.  Exact on noiseless data, indefinite under noise.
* :func:`invert_paper` evaluates sixteen closed-form combinations of the
  counts, one per density-matrix element.  The forms assume the post-
  selection amplitudes have unit modulus, so they carry a small systematic
  error from the true sinc envelopes (about 0.1 percent at the benchmark
  geometry).  See the function docstring for the derivation notes.
* :func:`mle` maximizes a Poisson (or Gaussian) likelihood over the cone of
  physical states via the Cholesky-style parameterization
  rho = T^dag T / Tr(T^dag T) and always returns a positive state.

All reconstructors re-estimate the calibration R0 from the four slit-pair
counts instead of trusting the configured value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .geometry import derive_params
from .measurement import DetectionArm, SlitArm, povm_element, standard_settings
from .states import DensityMatrix, as_matrix, project_physical

OFF_DIAG = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


class DegenerateSettingsError(RuntimeError):
    """The measurement settings do not span the 16-dimensional state space."""


class IncompleteRecordError(ValueError):
    """The record does not contain all sixteen settings."""


class NonstandardRecordError(ValueError):
    """The record's settings are not the standard set at positions {0, x1}."""


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Real 16x16 forward map: rates / R0 = matrix @ params(rho)."""

    matrix: np.ndarray
    condition_number: float


@dataclass(frozen=True)
class MleConfig:
    """Optimizer knobs for :func:`mle`.

    ``parameter_tolerance`` is applied as the optimizer's projected-gradient
    threshold; ``model`` selects the likelihood; ``initializer`` is either
    "linear-inversion" (projected least-squares estimate) or
    "maximally-mixed".
    """

    max_iterations: int = 100_000
    parameter_tolerance: float = 1e-8
    model: str = "poisson"
    initializer: str = "linear-inversion"

    def check(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")
        if not self.parameter_tolerance > 0.0:
            raise ValueError(f"parameter_tolerance must be positive, got {self.parameter_tolerance!r}")
        if self.model not in ("poisson", "gaussian-approx"):
            raise ValueError(f"model must be 'poisson' or 'gaussian-approx', got {self.model!r}")
        if self.initializer not in ("linear-inversion", "maximally-mixed"):
            raise ValueError(f"initializer must be 'linear-inversion' or 'maximally-mixed', got {self.initializer!r}")


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """An estimated state plus method tag and diagnostics."""

    rho_hat: DensityMatrix
    method: str
    residual: float
    physical_projection_applied: bool
    condition_number: float
    log_likelihood: float | None = None
    converged: bool | None = None
    iterations: int | None = None


def density_to_params(rho):
    """Flatten a Hermitian matrix to 16 real parameters.

    Layout: four diagonal entries, six real parts of the upper triangle,
    six imaginary parts, with the off-diagonal order of ``OFF_DIAG``.
    """
    m = as_matrix(rho)
    p = [m[j, j].real for j in range(4)]
    p += [m[j, k].real for j, k in OFF_DIAG]
    p += [m[j, k].imag for j, k in OFF_DIAG]
    return np.array(p)


def params_to_density(p):
    """Inverse of :func:`density_to_params`; returns a raw 4x4 array."""
    p = np.asarray(p, dtype=float)
    m = np.zeros((4, 4), dtype=complex)
    for j in range(4):
        m[j, j] = p[j]
    for i, (j, k) in enumerate(OFF_DIAG):
        m[j, k] = p[4 + i] + 1j * p[10 + i]
        m[k, j] = m[j, k].conjugate()
    return m


def measurement_matrix(settings, geom, unit_modulus=False):
    """Assemble the real forward map of the sixteen measurement operators.

    Row k contracts the parameter vector with E_k:
    Tr(rho E) = sum_j rho_jj E_jj + 2 sum_{j<k} (Re rho_jk Re E_jk + Im rho_jk Im E_jk).
    Raises :class:`DegenerateSettingsError` when the rows do not span all
    16 dimensions (for example with both detection positions equal).
    """
    if len(settings) != 16:
        raise IncompleteRecordError(f"need 16 settings, got {len(settings)}")
    M = np.zeros((16, 16))
    for k, setting in enumerate(settings):
        E = povm_element(setting, geom, unit_modulus=unit_modulus).operator
        row = [E[j, j].real for j in range(4)]
        row += [2.0 * E[j, k2].real for j, k2 in OFF_DIAG]
        row += [2.0 * E[j, k2].imag for j, k2 in OFF_DIAG]
        M[k] = row
    if np.linalg.matrix_rank(M) < 16:
        raise DegenerateSettingsError("measurement settings are linearly dependent (rank below 16)")
    return MeasurementMatrix(matrix=M, condition_number=float(np.linalg.cond(M)))


def _slit_pair_mask(settings):
    return np.array(
        [isinstance(s.arm_s, SlitArm) and isinstance(s.arm_i, SlitArm) for s in settings],
        dtype=bool,
    )


def _normalized_rates(record):
    """Per-setting Tr(rho E) estimates and the slit-pair count total.

    The four slit-pair settings satisfy sum_k Tr(rho E_k) = 1, so their
    total count estimates R0 * time_base; dividing each setting's
    equal-time count by it yields the dimensionless rate vector the
    inverters consume.
    """
    mask = _slit_pair_mask(record.settings)
    if int(mask.sum()) != 4:
        raise NonstandardRecordError("record must contain exactly four slit-pair settings")
    counts = record.effective_counts()
    equal_time = counts * (record.time_base / record.times)
    total = float(equal_time[mask].sum())
    if total <= 0.0:
        raise NonstandardRecordError("slit-pair counts are all zero; cannot calibrate")
    return equal_time / total, total


def invert_exact(record, geom, settings=None, project=False):
    """Least-squares linear inversion of a complete record.

    Hermiticity is built into the parameterization and the unit trace is
    eliminated exactly (three free diagonal entries, the fourth is their
    complement), leaving an overdetermined 16x15 system solved by least
    squares.  ``project`` additionally clips the estimate to the physical
    cone and flags the result.
    """
    settings = tuple(settings) if settings is not None else record.settings
    mm = measurement_matrix(settings, geom)
    y, total = _normalized_rates(record)

    # p = p0 + N q with p0 the |--><--| corner; N spans the 15 free directions
    p0 = np.zeros(16)
    p0[3] = 1.0
    N = np.zeros((16, 15))
    N[0, 0] = N[1, 1] = N[2, 2] = 1.0
    N[3, 0] = N[3, 1] = N[3, 2] = -1.0
    for i in range(12):
        N[4 + i, 3 + i] = 1.0
    A = mm.matrix @ N
    q, *_ = np.linalg.lstsq(A, y - mm.matrix @ p0, rcond=None)
    p = p0 + N @ q
    rho = params_to_density(p)

    predicted_counts = (mm.matrix @ p) * total * (record.times / record.time_base)
    residual = float(np.linalg.norm(predicted_counts - record.effective_counts()))

    applied = False
    estimate = DensityMatrix(matrix=rho)
    if project and not estimate.is_physical:
        estimate = project_physical(estimate)
        applied = True
    return ReconstructionResult(
        rho_hat=estimate,
        method="exact-linear",
        residual=residual,
        physical_projection_applied=applied,
        condition_number=mm.condition_number,
    )


def _require_standard(record, geom):
    """Map setting id to normalized rate after checking the standard layout."""
    derived = derive_params(geom)
    reference = {s.id: s for s in standard_settings(geom)}
    tol = 1e-9 + 1e-6 * derived.x1

    def arms_match(arm, ref_arm):
        if isinstance(ref_arm, SlitArm):
            return isinstance(arm, SlitArm) and arm.slit == ref_arm.slit
        return isinstance(arm, DetectionArm) and abs(arm.x - ref_arm.x) <= tol

    for setting in record.settings:
        ref = reference[setting.id]
        if not (arms_match(setting.arm_s, ref.arm_s) and arms_match(setting.arm_i, ref.arm_i)):
            raise NonstandardRecordError(
                f"setting {setting.id} does not match the standard layout at positions 0 and x1"
            )
    y, total = _normalized_rates(record)
    by_id = {s.id: y[k] for k, s in enumerate(record.settings)}
    return by_id, total


def invert_paper(record, geom):
    """Closed-form inversion in the unit-modulus idealization.

    Under |r| = 1 every detection-plane operator is a scaled projector and
    each equal-time normalized count c (with one factor chi per detection
    arm restoring the diffraction loss) is an affine function of a single
    real degree of freedom of rho.  Writing n_lm for the slit-pair
    fractions and c_... for the compensated detection counts:

        diagonals            rho_ll,mm = n_lm
        slit x detection     rho(++,+-) = (c_{+,0} - D+/2) + i (c_{+,1} - D+/2),
                             D+ = n_pp + n_pm, and the three sign/arm mirrors
        both detection       the four counts at (0,0), (0,x1), (x1,0), (x1,x1)
                             determine the anti-diagonal elements after
                             subtracting the single-detection combinations
                             (S8, D8 below)

    The anti-diagonal combinations join the bracketed count groups
    additively; a multiplicative reading fails the forward model.  The
    constant offsets (the +1/2 terms) and which counts enter with a
    conjugated sign were fixed by symbolic re-derivation from Tr(rho E_k)
    and verified to be exact on idealized data.
    """
    by_id, total = _require_standard(record, geom)
    chi = derive_params(geom).chi

    n = {1: by_id[1], 2: by_id[2], 3: by_id[3], 4: by_id[4]}
    c1 = {k: chi * by_id[k] for k in (5, 6, 7, 8, 9, 10, 13, 14)}
    c2 = {k: chi**2 * by_id[k] for k in (11, 12, 15, 16)}

    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0], rho[1, 1], rho[2, 2], rho[3, 3] = n[1], n[2], n[3], n[4]

    d_plus = n[1] + n[2]
    d_minus = n[3] + n[4]
    g_plus = n[1] + n[3]
    g_minus = n[2] + n[4]
    rho[0, 1] = (c1[5] - d_plus / 2.0) + 1j * (c1[6] - d_plus / 2.0)
    rho[2, 3] = (c1[7] - d_minus / 2.0) + 1j * (c1[8] - d_minus / 2.0)
    rho[0, 2] = (c1[9] - g_plus / 2.0) + 1j * (c1[10] - g_plus / 2.0)
    rho[1, 3] = (c1[13] - g_minus / 2.0) + 1j * (c1[14] - g_minus / 2.0)

    s8 = sum(c1.values())
    d8 = (c1[5] - c1[6]) + (c1[7] - c1[8]) + (c1[9] - c1[10]) + (c1[13] - c1[14])
    re_14 = c2[11] - c2[16] - d8 / 2.0
    im_14 = c2[12] + c2[15] - s8 / 2.0 + 0.5
    re_23 = c2[11] + c2[16] - s8 / 2.0 + 0.5
    im_23 = (c2[15] - c2[12]) + 0.5 * (
        (c1[6] - c1[5]) + (c1[8] - c1[7]) + (c1[9] - c1[10]) + (c1[13] - c1[14])
    )
    rho[0, 3] = re_14 + 1j * im_14
    rho[1, 2] = re_23 + 1j * im_23
    for j in range(4):
        for k in range(j):
            rho[j, k] = rho[k, j].conjugate()

    mm = measurement_matrix(record.settings, geom)
    predicted_counts = (mm.matrix @ density_to_params(rho)) * total * (record.times / record.time_base)
    residual = float(np.linalg.norm(predicted_counts - record.effective_counts()))
    return ReconstructionResult(
        rho_hat=DensityMatrix(matrix=rho),
        method="paper-form",
        residual=residual,
        physical_projection_applied=False,
        condition_number=mm.condition_number,
    )


def _likelihood_pieces(record, geom, settings):
    settings = tuple(settings) if settings is not None else record.settings
    operators = [povm_element(s, geom).operator for s in settings]
    counts = record.effective_counts()
    mask = _slit_pair_mask(settings)
    equal_time = counts * (record.time_base / record.times)
    total = float(equal_time[mask].sum())
    if total <= 0.0:
        raise NonstandardRecordError("slit-pair counts are all zero; cannot calibrate")
    # K_k = R0_hat * t_k: expected counts are K_k Tr(rho E_k)
    K = total * record.times / record.time_base
    floor = 1e-12 * max(total, 1.0)
    return operators, counts, K, floor


def log_likelihood(rho, record, geom, settings=None, model="poisson"):
    """Log-likelihood of a state given a record.

    Poisson: sum_k n_k ln(lambda_k) - lambda_k, with lambda floored away
    from zero so settings with predicted rate zero but observed counts stay
    finite.  Gaussian approximation: -sum (lambda - n)^2 / (2 lambda).
    """
    if model not in ("poisson", "gaussian-approx"):
        raise ValueError(f"model must be 'poisson' or 'gaussian-approx', got {model!r}")
    operators, counts, K, floor = _likelihood_pieces(record, geom, settings)
    m = as_matrix(rho)
    lam = np.array([max(float(np.trace(m @ E).real), 0.0) for E in operators]) * K
    lam = np.maximum(lam, floor)
    if model == "poisson":
        return float(np.sum(counts * np.log(lam) - lam))
    return float(-np.sum((lam - counts) ** 2 / (2.0 * lam)))


_LOWER_DIAG = [(0, 0), (1, 1), (2, 2), (3, 3)]
_LOWER_OFF = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]


def _t_from_vector(t):
    T = np.zeros((4, 4), dtype=complex)
    for i, (j, k) in enumerate(_LOWER_DIAG):
        T[j, k] = t[i]
    for i, (j, k) in enumerate(_LOWER_OFF):
        T[j, k] = t[4 + 2 * i] + 1j * t[5 + 2 * i]
    return T


def _vector_from_t(T):
    t = np.zeros(16)
    for i, (j, k) in enumerate(_LOWER_DIAG):
        t[i] = T[j, k].real
    for i, (j, k) in enumerate(_LOWER_OFF):
        t[4 + 2 * i] = T[j, k].real
        t[5 + 2 * i] = T[j, k].imag
    return t


def _rho_from_vector(t):
    T = _t_from_vector(t)
    A = T.conj().T @ T
    return A / np.trace(A).real


def _lower_triangular_factor(rho):
    """Lower-triangular T with T^dag T = rho, via a flipped Cholesky."""
    P = np.eye(4)[::-1]
    L = np.linalg.cholesky(P @ rho @ P)
    return P @ L.conj().T @ P


def mle(record, geom, settings=None, config=None):
    """Maximum-likelihood reconstruction over physical states.

    Parameterizes rho = T^dag T / Tr(T^dag T) with lower-triangular T
    (16 real parameters) and maximizes :func:`log_likelihood` with an
    analytic gradient under L-BFGS-B.  The output is positive semidefinite
    with unit trace by construction; non-convergence is flagged, not
    raised, and the best iterate is returned.
    """
    config = config if config is not None else MleConfig()
    config.check()
    settings = tuple(settings) if settings is not None else record.settings
    operators, counts, K, floor = _likelihood_pieces(record, geom, settings)
    identity = np.eye(4, dtype=complex)
    poisson = config.model == "poisson"

    def objective(t):
        T = _t_from_vector(t)
        A = T.conj().T @ T
        tau = float(np.trace(A).real)
        traces = np.array([float(np.trace(A @ E).real) for E in operators])
        lam = K * traces / tau
        lam_floored = np.maximum(lam, floor)
        if poisson:
            value = float(np.sum(counts * np.log(lam_floored) - lam_floored))
            weights = np.where(lam > floor, counts / lam_floored - 1.0, 0.0)
        else:
            value = float(-np.sum((lam_floored - counts) ** 2 / (2.0 * lam_floored)))
            weights = np.where(lam > floor, (counts**2 / lam_floored**2 - 1.0) / 2.0, 0.0)
        # d lambda_k / d A = (K_k / tau) (E_k - (Tr(A E_k)/tau) I)
        grad_A = sum(
            (weights[k] * K[k]) * (operators[k] - (traces[k] / tau) * identity) for k in range(16)
        ) / tau
        TG = T @ grad_A
        grad = np.zeros(16)
        for i, (j, k) in enumerate(_LOWER_DIAG):
            grad[i] = 2.0 * TG[j, k].real
        for i, (j, k) in enumerate(_LOWER_OFF):
            grad[4 + 2 * i] = 2.0 * TG[j, k].real
            grad[5 + 2 * i] = 2.0 * TG[j, k].imag
        return -value, -grad

    if config.initializer == "linear-inversion":
        start = project_physical(invert_exact(record, geom, settings=settings).rho_hat.matrix).matrix
        # full rank keeps the Cholesky factor well defined at the start
        start = 0.9999 * start + 0.0001 * identity / 4.0
    else:
        start = identity / 4.0
    t0 = _vector_from_t(_lower_triangular_factor(start))

    result = minimize(
        objective,
        t0,
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": config.max_iterations,
            "ftol": 2.220446049250313e-16,
            "gtol": config.parameter_tolerance,
        },
    )
    rho = _rho_from_vector(result.x)
    rho = 0.5 * (rho + rho.conj().T)

    traces = np.array([float(np.trace(rho @ E).real) for E in operators])
    residual = float(np.linalg.norm(K * np.clip(traces, 0.0, None) - counts))
    mm = measurement_matrix(settings, geom)
    return ReconstructionResult(
        rho_hat=DensityMatrix(matrix=rho),
        method="mle",
        residual=residual,
        physical_projection_applied=False,
        condition_number=mm.condition_number,
        log_likelihood=float(-result.fun),
        converged=bool(result.success),
        iterations=int(result.nit),
    )


def reconstruct(record, geom, method, settings=None, config=None, project=False):
    """Dispatch to one of the three reconstructors by name."""
    if method in ("exact", "exact-linear"):
        return invert_exact(record, geom, settings=settings, project=project)
    if method in ("paper", "paper-form", "closed-form"):
        return invert_paper(record, geom)
    if method == "mle":
        return mle(record, geom, settings=settings, config=config)
    raise ValueError(f"unknown reconstruction method {method!r}")


def result_to_dict(result):
    rho = result.rho_hat.matrix
    out = {
        "method": result.method,
        "rho": [[[float(rho[j, k].real), float(rho[j, k].imag)] for k in range(4)] for j in range(4)],
        "residual": result.residual,
        "physical": bool(result.rho_hat.is_physical),
        "physical_projection_applied": bool(result.physical_projection_applied),
        "condition_number": result.condition_number,
    }
    if result.log_likelihood is not None:
        out["log_likelihood"] = result.log_likelihood
    if result.converged is not None:
        out["converged"] = bool(result.converged)
    if result.iterations is not None:
        out["iterations"] = int(result.iterations)
    return out


def rho_from_json(value):
    """Parse the 4x4 [re, im] nested-list encoding of a density matrix."""
    arr = np.array([[complex(cell[0], cell[1]) for cell in row] for row in value])
    if arr.shape != (4, 4):
        raise ValueError(f"rho must be a 4x4 array of [re, im] pairs, got shape {arr.shape}")
    return arr


def result_from_dict(data):
    rho = DensityMatrix(matrix=rho_from_json(data["rho"]))
    return ReconstructionResult(
        rho_hat=rho,
        method=data["method"],
        residual=float(data["residual"]),
        physical_projection_applied=bool(data.get("physical_projection_applied", False)),
        condition_number=float(data["condition_number"]),
        log_likelihood=data.get("log_likelihood"),
        converged=data.get("converged"),
        iterations=data.get("iterations"),
    )


def save_result(result, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result_to_dict(result), fh, indent=2)
        fh.write("\n")


def load_result(path):
    with open(path, encoding="utf-8") as fh:
        return result_from_dict(json.load(fh))
