"""
Jones-calculus optical elements and the post-selected two-photon gates.

Phase convention (pinned by tests):
    HWP(t) = [[cos 2t,  sin 2t],
              [sin 2t, -cos 2t]]
    QWP(t) = R(-t) diag(1, i) R(t)
so HWP(22.5 deg)|H> = |D>, HWP(0)|V> = -|V>, QWP(45 deg)|H> ~ |L>.

CPBS port rule (input photons a, b):
    a in |D> exits right, a in |A> exits left
    b in |D> exits left,  b in |A> exits right
Each port ends in a HWP(22.5 deg) and an H/V detector pair.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core import ops
from core.states import KETS, PureState, ALGEBRA_TOL


logger = logging.getLogger(__name__)

_S = 1 / np.sqrt(2)


class PlateKind(Enum):
    HALF = "half"
    QUARTER = "quarter"


@dataclass(frozen=True)
class WavePlate:
    kind: PlateKind
    angle: float  # radians, fast axis from horizontal

    @classmethod
    def half(cls, degrees: float) -> "WavePlate":
        return cls(PlateKind.HALF, np.deg2rad(degrees))

    @classmethod
    def quarter(cls, degrees: float) -> "WavePlate":
        return cls(PlateKind.QUARTER, np.deg2rad(degrees))


def waveplate_matrix(wp: WavePlate) -> np.ndarray:
    t = wp.angle
    if wp.kind is PlateKind.HALF:
        c, s = np.cos(2 * t), np.sin(2 * t)
        return np.array([[c, s], [s, -c]], dtype=complex)
    c, s = np.cos(t), np.sin(t)
    return np.array(
        [
            [c * c + 1j * s * s, (1 - 1j) * s * c],
            [(1 - 1j) * s * c, s * s + 1j * c * c],
        ],
        dtype=complex,
    )


HWP_22_5 = waveplate_matrix(WavePlate.half(22.5))


@dataclass(frozen=True)
class PbsGate:
    qubit_a: int
    qubit_b: int


@dataclass(frozen=True)
class CpbsDevice:
    qubit_a: int
    qubit_b: int


class BranchLabel(Enum):
    """CPBS detection branches; coincidences name (left, right) detectors."""
    COINC_HH = "coinc_hh"
    COINC_HV = "coinc_hv"
    COINC_VH = "coinc_vh"
    COINC_VV = "coinc_vv"
    BOTH_LEFT = "both_left"
    BOTH_RIGHT = "both_right"

    @property
    def is_coincidence(self) -> bool:
        return self.value.startswith("coinc")


@dataclass(frozen=True)
class Branch:
    label: BranchLabel
    state: PureState
    probability: float


# (H,V) amplitudes of a D or A photon reaching the H/V detectors of its port
_PORT_AMPLITUDE = {"D": {"H": _S, "V": _S}, "A": {"H": _S, "V": -_S}}

PARITY_PROJECTOR = np.diag([1, 0, 0, 1]).astype(complex)


def _pair(a: str, b: str) -> np.ndarray:
    return np.kron(KETS[a].amplitudes, KETS[b].amplitudes)


def cpbs_bra(label: BranchLabel) -> np.ndarray:
    """Two-photon vector (kron order a, b) whose overlap gives the branch amplitude."""
    if label is BranchLabel.BOTH_LEFT:
        return _pair("A", "D")
    if label is BranchLabel.BOTH_RIGHT:
        return _pair("D", "A")
    left, right = label.value[-2].upper(), label.value[-1].upper()
    dd = _PORT_AMPLITUDE["D"][left] * _PORT_AMPLITUDE["D"][right]
    aa = _PORT_AMPLITUDE["A"][left] * _PORT_AMPLITUDE["A"][right]
    return dd * _pair("D", "D") + aa * _pair("A", "A")


def pbs_postselect(state: PureState, gate: PbsGate) -> tuple:
    """Keep the |HH>,|VV> part of (a, b); returns (state, probability)."""
    if gate.qubit_a == gate.qubit_b:
        raise ValueError("PBS inputs must be distinct qubits")
    n = state.num_qubits
    for q in (gate.qubit_a, gate.qubit_b):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range")
    kept = ops.apply_vec(state.amplitudes, n, PARITY_PROJECTOR, [gate.qubit_a, gate.qubit_b])
    prob = float(np.vdot(kept, kept).real)
    if prob <= ALGEBRA_TOL ** 2:
        return PureState.empty(n), 0.0
    return PureState(n, kept / np.sqrt(prob)), min(prob, 1.0)


def cpbs_apply(state: PureState, dev: CpbsDevice) -> list:
    """
    The six detection branches of a CPBS, each with the renormalised state of
    the remaining qubits (the two detected photons are removed).
    """
    n = state.num_qubits
    qubits = [dev.qubit_a, dev.qubit_b]
    branches = []
    for label in BranchLabel:
        rest = ops.contract_bra(state.amplitudes, n, cpbs_bra(label), qubits)
        prob = float(np.vdot(rest, rest).real)
        if prob <= ALGEBRA_TOL ** 2:
            branches.append(Branch(label, PureState.empty(n - 2), 0.0))
        else:
            branches.append(Branch(label, PureState(n - 2, rest / np.sqrt(prob)), prob))
    return branches
