"""Two-spatial-qubit state simulation and tomography for twin-photon double slits.

A pump profile illuminating a pair of double slits prepares a four-level
entangled state of two photons; sixteen coincidence measurements across
slit-plane and detection-plane arms determine its density matrix.  This
package builds the state, synthesizes the measurements with optional
Poisson noise, and reconstructs the state three ways (least-squares
inversion, closed-form inversion, maximum likelihood).
"""

from .geometry import (
    DerivedGeometry,
    Geometry,
    GeometryError,
    default_geometry,
    derive_params,
    validate,
)
from .states import (
    DensityMatrix,
    Gaussian,
    NullStateError,
    OddMode,
    PlaneWave,
    Tabulated,
    TwoQubitState,
    build_state,
    concurrence,
    eval_pump,
    fidelity,
    metrics,
    project_physical,
    purity,
    slit_basis_overlap,
    to_density,
    trace_distance,
)
from .propagation import (
    DetectionVector,
    QuadratureError,
    b_coeff,
    detection_vector,
    f_overlap,
    fresnel_factor,
    i_integral_closed,
    i_integral_quadrature,
    r_coeff,
)
from .measurement import (
    CountRecord,
    DetectionArm,
    MeasurementSetting,
    SlitArm,
    expected_rates,
    load_record,
    povm_element,
    record_to_csv,
    save_record,
    simulate_counts,
    standard_settings,
)
from .tomography import (
    DegenerateSettingsError,
    IncompleteRecordError,
    MleConfig,
    NonstandardRecordError,
    ReconstructionResult,
    invert_exact,
    invert_paper,
    load_result,
    log_likelihood,
    measurement_matrix,
    mle,
    reconstruct,
    result_from_dict,
    result_to_dict,
    rho_from_json,
    save_result,
)
from .config import ConfigError, RunConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CountRecord",
    "DegenerateSettingsError",
    "DensityMatrix",
    "DerivedGeometry",
    "DetectionArm",
    "DetectionVector",
    "Gaussian",
    "Geometry",
    "GeometryError",
    "IncompleteRecordError",
    "MeasurementSetting",
    "MleConfig",
    "NonstandardRecordError",
    "NullStateError",
    "OddMode",
    "PlaneWave",
    "QuadratureError",
    "ReconstructionResult",
    "RunConfig",
    "SlitArm",
    "Tabulated",
    "TwoQubitState",
    "b_coeff",
    "build_state",
    "concurrence",
    "default_geometry",
    "derive_params",
    "detection_vector",
    "eval_pump",
    "expected_rates",
    "f_overlap",
    "fidelity",
    "fresnel_factor",
    "i_integral_closed",
    "i_integral_quadrature",
    "invert_exact",
    "invert_paper",
    "load_config",
    "load_record",
    "load_result",
    "log_likelihood",
    "measurement_matrix",
    "metrics",
    "mle",
    "parse_config",
    "povm_element",
    "project_physical",
    "purity",
    "r_coeff",
    "reconstruct",
    "result_from_dict",
    "result_to_dict",
    "rho_from_json",
    "record_to_csv",
    "save_record",
    "save_result",
    "simulate_counts",
    "slit_basis_overlap",
    "standard_settings",
    "to_density",
    "trace_distance",
    "validate",
]
