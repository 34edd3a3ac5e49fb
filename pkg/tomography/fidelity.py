"""
Fidelity estimators for reconstructed states and measurement operators.
"""

import logging
from typing import Union

import numpy as np
from scipy.linalg import sqrtm

from core import ops
from core.errors import DomainError, ZeroTraceError
from core.states import DensityMatrix, PureState, expectation


logger = logging.getLogger(__name__)


def pauli_fidelity(xx: float, yy: float, zz: float) -> float:
    """Fidelity to |phi+> from the three correlators: (1 + XX - YY + ZZ) / 4."""
    for name, value in (("xx", xx), ("yy", yy), ("zz", zz)):
        if not -1.0 - 1e-12 <= value <= 1.0 + 1e-12:
            raise DomainError(f"{name}={value} outside [-1, 1]")
    return (1.0 + xx - yy + zz) / 4.0


def pauli_correlators(rho: DensityMatrix) -> tuple:
    return tuple(expectation(rho, p) for p in ("XX", "YY", "ZZ"))


def correlator_from_fractions(same: float, different: float) -> float:
    """<PP> from the fractions of equal and opposite outcomes in one basis."""
    total = same + different
    if total <= 0:
        raise ZeroTraceError("no coincidences in this basis")
    return (same - different) / total


def _target_kron(target: Union[PureState, np.ndarray]) -> np.ndarray:
    if isinstance(target, PureState):
        return ops.to_kron_order(target.amplitudes, target.num_qubits)
    return np.asarray(target, dtype=complex)


def povm_overlap(element: np.ndarray, target: Union[PureState, np.ndarray]) -> float:
    """<target| element |target> without normalisation."""
    t = _target_kron(target)
    return float(np.real(np.vdot(t, element @ t)))


def povm_fidelity(element: np.ndarray, target: Union[PureState, np.ndarray]) -> float:
    """<target| element / Tr(element) |target>; elements act in kron order."""
    tr = float(np.trace(element).real)
    if tr <= 0:
        raise ZeroTraceError("POVM element has zero trace")
    return float(np.clip(povm_overlap(element, target) / tr, 0.0, 1.0))


def operator_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity of two positive operators after trace normalisation."""
    ta, tb = float(np.trace(a).real), float(np.trace(b).real)
    if ta <= 0 or tb <= 0:
        raise ZeroTraceError("operator has zero trace")
    a, b = a / ta, b / tb
    root = sqrtm(a)
    inner = sqrtm(root @ b @ root)
    return float(np.clip(np.real(np.trace(inner)) ** 2, 0.0, 1.0))
