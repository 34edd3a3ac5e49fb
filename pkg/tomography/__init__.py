"""Tomography module: settings, MLE reconstruction, fidelities and calibration."""

from functools import partial

from .settings import (
    HADAMARD,
    S_DAG,
    BASIS_ROTATIONS,
    PROBE_LETTERS,
    TomographySetting,
    TomographyRecord,
    ProbeState,
    all_settings,
    all_probes,
    born_probabilities,
    simulate_counts,
    simulate_records,
    resample_records,
)
from .mle import MleResult, PovmResult, POVM_TAGS, mle_state, mle_povm, simulate_povm_counts
from .fidelity import (
    pauli_fidelity,
    pauli_correlators,
    correlator_from_fractions,
    povm_overlap,
    povm_fidelity,
    operator_fidelity,
)
from .calibration import (
    CalibrationResult,
    fit_visibility,
    ghz4_state,
    ghz4_fidelity,
    fit_parameter,
    fit_white_noise,
    fit_final_pair_white_noise,
)
from .io import (
    matrix_to_dict,
    matrix_from_dict,
    state_to_dict,
    state_from_dict,
    povm_to_dict,
    povm_from_dict,
    records_to_csv,
    records_from_csv,
    save_records,
    load_records,
)


def create_state_estimator_from_config(config):
    """mle_state with iteration limits and debug checks taken from config."""
    return partial(
        mle_state,
        max_iter=config.MLE_MAX_ITERATIONS,
        tol=config.MLE_TOLERANCE,
        debug=config.MLE_DEBUG,
    )


def create_povm_estimator_from_config(config):
    return partial(mle_povm, max_iter=config.MLE_MAX_ITERATIONS, tol=config.MLE_TOLERANCE)


__all__ = [
    "HADAMARD",
    "S_DAG",
    "BASIS_ROTATIONS",
    "PROBE_LETTERS",
    "TomographySetting",
    "TomographyRecord",
    "ProbeState",
    "all_settings",
    "all_probes",
    "born_probabilities",
    "simulate_counts",
    "simulate_records",
    "resample_records",
    "MleResult",
    "PovmResult",
    "POVM_TAGS",
    "mle_state",
    "mle_povm",
    "simulate_povm_counts",
    "pauli_fidelity",
    "pauli_correlators",
    "correlator_from_fractions",
    "povm_overlap",
    "povm_fidelity",
    "operator_fidelity",
    "CalibrationResult",
    "fit_visibility",
    "ghz4_state",
    "ghz4_fidelity",
    "fit_parameter",
    "fit_white_noise",
    "fit_final_pair_white_noise",
    "matrix_to_dict",
    "matrix_from_dict",
    "state_to_dict",
    "state_from_dict",
    "povm_to_dict",
    "povm_from_dict",
    "records_to_csv",
    "records_from_csv",
    "save_records",
    "load_records",
    "create_state_estimator_from_config",
    "create_povm_estimator_from_config",
]
