"""
Noise Model - efficiency, distinguishability and white-noise knobs.

Distinguishability is a convex mix of two event classes at every two-photon
overlap point: with weight v the photons interfere, with weight 1 - v they
behave as distinguishable particles and only classical parity survives.
Efficiency is per photon; white noise is a depolarizing admixture per source.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from core import ops
from core.errors import ConfigError, DomainError
from core.states import KETS, DensityMatrix, PHI_PLUS, ALGEBRA_TOL
from optics.elements import (
    BranchLabel,
    CpbsDevice,
    PARITY_PROJECTOR,
    PbsGate,
    _PORT_AMPLITUDE,
    cpbs_bra,
)


logger = logging.getLogger(__name__)

PBS_POINT = "pbs"

_P_HH = np.diag([1, 0, 0, 0]).astype(complex)
_P_VV = np.diag([0, 0, 0, 1]).astype(complex)


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True)
class NoiseModel:
    """
    Imperfection knobs consumed by the network runners.

    ``photon_efficiency`` and ``visibilities`` override the scalar defaults
    for a given photon id or overlap point (``"pbs"`` or a station id).
    ``source_white_noise`` is keyed by source id.
    """
    efficiency: float = 0.38
    ghz_lossless: bool = False
    pcm_visibility: float = 1.0
    pbs_visibility: float = 1.0
    white_noise: float = 0.0
    include_multi_pair: bool = True
    photon_efficiency: Mapping[int, float] = field(default_factory=dict)
    visibilities: Mapping[str, float] = field(default_factory=dict)
    source_white_noise: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        _check_unit("efficiency", self.efficiency)
        _check_unit("pcm_visibility", self.pcm_visibility)
        _check_unit("pbs_visibility", self.pbs_visibility)
        _check_unit("white_noise", self.white_noise)
        for pid, eta in self.photon_efficiency.items():
            _check_unit(f"efficiency[{pid}]", eta)
        for point, v in self.visibilities.items():
            _check_unit(f"visibility[{point}]", v)
        for sid, lam in self.source_white_noise.items():
            _check_unit(f"white_noise[{sid}]", lam)

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(efficiency=1.0)

    def eta(self, photon: int, ghz_photons: Sequence[int] = ()) -> float:
        if photon in self.photon_efficiency:
            return self.photon_efficiency[photon]
        if self.ghz_lossless and photon in ghz_photons:
            return 1.0
        return self.efficiency

    def visibility(self, point: str) -> float:
        if point in self.visibilities:
            return self.visibilities[point]
        return self.pbs_visibility if point == PBS_POINT else self.pcm_visibility

    def lam(self, source_id: int) -> float:
        return self.source_white_noise.get(source_id, self.white_noise)

    def to_dict(self) -> dict:
        return {
            "efficiency": self.efficiency,
            "ghz_lossless": self.ghz_lossless,
            "pcm_visibility": self.pcm_visibility,
            "pbs_visibility": self.pbs_visibility,
            "white_noise": self.white_noise,
            "include_multi_pair": self.include_multi_pair,
            "photon_efficiency": {str(k): v for k, v in self.photon_efficiency.items()},
            "visibilities": dict(self.visibilities),
            "source_white_noise": {str(k): v for k, v in self.source_white_noise.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseModel":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown noise keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "photon_efficiency" in kwargs:
            kwargs["photon_efficiency"] = {int(k): float(v) for k, v in kwargs["photon_efficiency"].items()}
        if "source_white_noise" in kwargs:
            kwargs["source_white_noise"] = {int(k): float(v) for k, v in kwargs["source_white_noise"].items()}
        if "visibilities" in kwargs:
            kwargs["visibilities"] = {str(k): float(v) for k, v in kwargs["visibilities"].items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class MixedBranch:
    """One labelled outcome with its probability and (normalised) state."""
    label: object
    probability: float
    state: Optional[DensityMatrix]


def apply_visibility(ideal: Sequence[MixedBranch], classical: Sequence[MixedBranch], v: float) -> list:
    """
    Merge the interfering and distinguishable branch sets label by label:
    p = v p_ideal + (1 - v) p_classical, state weighted the same way.
    """
    _check_unit("visibility", v)
    by_label = {}
    order = []
    for weight, branches in ((v, ideal), (1.0 - v, classical)):
        for br in branches:
            if br.label not in by_label:
                by_label[br.label] = [0.0, None]
                order.append(br.label)
            slot = by_label[br.label]
            p = weight * br.probability
            if p <= 0.0 or br.state is None:
                continue
            slot[0] += p
            term = p * br.state.entries
            slot[1] = term if slot[1] is None else slot[1] + term
    merged = []
    for label in order:
        p, acc = by_label[label]
        if acc is None or p <= ALGEBRA_TOL ** 2:
            merged.append(MixedBranch(label, 0.0, None))
            continue
        n = int(np.log2(acc.shape[0]))
        merged.append(MixedBranch(label, p, DensityMatrix(n, acc / p)))
    return merged


def _branch(label, n: int, unnormalised: np.ndarray) -> MixedBranch:
    p = float(np.trace(unnormalised).real)
    if p <= ALGEBRA_TOL ** 2:
        return MixedBranch(label, 0.0, None)
    return MixedBranch(label, min(p, 1.0), DensityMatrix(n, unnormalised / p))


def pbs_channel(rho: DensityMatrix, gate: PbsGate, v: float = 1.0) -> tuple:
    """
    Post-selected PBS with visibility v; both photons stay in the register.
    Returns (state, probability), state ``None`` on a zero-probability pass.
    """
    n = rho.num_qubits
    qubits = [gate.qubit_a, gate.qubit_b]
    ideal = ops.apply_dm(rho.entries, n, PARITY_PROJECTOR, qubits)
    classical = ops.apply_dm(rho.entries, n, _P_HH, qubits) + ops.apply_dm(rho.entries, n, _P_VV, qubits)
    merged = apply_visibility([_branch("pass", n, ideal)], [_branch("pass", n, classical)], v)[0]
    return merged.state, merged.probability


def _ket2(a: str, b: str) -> np.ndarray:
    return np.kron(KETS[a].amplitudes, KETS[b].amplitudes)


def cpbs_branches(rho: DensityMatrix, dev: CpbsDevice, v: float = 1.0) -> list:
    """
    The six CPBS detection branches of a mixed register at visibility v.
    Distinguishable photons lose the DD/AA coherence of the coincidence
    branches; the bunched branches are unaffected.
    """
    n = rho.num_qubits
    qubits = [dev.qubit_a, dev.qubit_b]
    ideal, classical = [], []
    for label in BranchLabel:
        bra = cpbs_bra(label)
        ideal.append(_branch(label, n - 2, ops.reduce_element(rho.entries, n, np.outer(bra, bra.conj()), qubits)))
        if label.is_coincidence:
            left, right = label.value[-2].upper(), label.value[-1].upper()
            acc = np.zeros((2 ** (n - 2),) * 2, dtype=complex)
            for da in ("D", "A"):
                c = _PORT_AMPLITUDE[da][left] * _PORT_AMPLITUDE[da][right]
                ket = c * _ket2(da, da)
                acc = acc + ops.reduce_element(rho.entries, n, np.outer(ket, ket.conj()), qubits)
            classical.append(_branch(label, n - 2, acc))
        else:
            classical.append(ideal[-1])
    return apply_visibility(ideal, classical, v)


def depolarize(rho: DensityMatrix, lam: float) -> DensityMatrix:
    """(1 - lam) rho + lam I/d."""
    _check_unit("white_noise", lam)
    d = rho.entries.shape[0]
    return DensityMatrix(rho.num_qubits, (1.0 - lam) * rho.entries + lam * np.eye(d) / d)


def werner_pair(lam: float) -> DensityMatrix:
    """(1 - lam) |phi+><phi+| + lam I/4."""
    return depolarize(PHI_PLUS.to_density(), lam)
