"""
Tomography settings, records and synthetic data.

A setting picks X, Y or Z per qubit; all 2^n orthogonal outcomes of a
setting are recorded together. Outcome index o is little-endian: bit q is
the result of qubit q, 0 for the +1 eigenstate.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from core import ops
from core.errors import DimensionError, DomainError
from core.states import KETS, DensityMatrix, PureState


logger = logging.getLogger(__name__)

_S = 1 / np.sqrt(2)
HADAMARD = np.array([[_S, _S], [_S, -_S]], dtype=complex)
S_DAG = np.diag([1, -1j])

# rotations taking each basis onto Z before detection
BASIS_ROTATIONS = {
    "Z": np.eye(2, dtype=complex),
    "X": HADAMARD,
    "Y": HADAMARD @ S_DAG,
}

PROBE_LETTERS = ("H", "V", "D", "R")


@dataclass(frozen=True)
class TomographySetting:
    bases: tuple

    def __post_init__(self):
        bases = tuple(b.upper() for b in self.bases)
        if not bases or any(b not in BASIS_ROTATIONS for b in bases):
            raise DomainError(f"bases must be X, Y or Z (got {self.bases})")
        object.__setattr__(self, "bases", bases)

    @classmethod
    def of(cls, label: str) -> "TomographySetting":
        return cls(tuple(label))

    @property
    def label(self) -> str:
        return "".join(self.bases)

    @property
    def num_qubits(self) -> int:
        return len(self.bases)

    def rotation(self) -> np.ndarray:
        """Little-endian unitary on the full register."""
        return ops.kron_all([BASIS_ROTATIONS[b] for b in reversed(self.bases)])

    def projectors(self) -> np.ndarray:
        """(2^n, d, d) stack of outcome projectors."""
        u = self.rotation()
        d = u.shape[0]
        cols = u.conj().T  # column o is U^dagger |o>
        return np.einsum("ao,bo->oab", cols, cols.conj()).reshape(d, d, d)


def all_settings(num_qubits: int) -> list:
    return [TomographySetting(b) for b in itertools.product("XYZ", repeat=num_qubits)]


@dataclass(frozen=True)
class TomographyRecord:
    setting: TomographySetting
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (2 ** self.setting.num_qubits,):
            raise DimensionError(f"{counts.shape[0]} counts for setting {self.setting.label}")
        if np.any(counts < 0):
            raise DomainError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ProbeState:
    labels: str

    def __post_init__(self):
        if any(c not in PROBE_LETTERS for c in self.labels):
            raise DomainError(f"probe letters must be in {PROBE_LETTERS} (got {self.labels})")

    @property
    def state(self) -> PureState:
        return PureState.basis(self.labels)

    def kron_vector(self) -> np.ndarray:
        """Probe ket in kron order (first letter most significant)."""
        return ops.kron_all([KETS[c].amplitudes.reshape(-1, 1) for c in self.labels]).reshape(-1)


def all_probes(num_qubits: int) -> list:
    return [ProbeState("".join(p)) for p in itertools.product(PROBE_LETTERS, repeat=num_qubits)]


def born_probabilities(rho: DensityMatrix, setting: TomographySetting) -> np.ndarray:
    if rho.num_qubits != setting.num_qubits:
        raise DimensionError(f"{setting.num_qubits}-qubit setting on a {rho.num_qubits}-qubit state")
    u = setting.rotation()
    probs = np.clip(np.real(np.diag(u @ rho.entries @ u.conj().T)), 0.0, None)
    return probs / probs.sum()


def simulate_counts(rho: DensityMatrix, setting: TomographySetting, shots: int,
                    seed: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> TomographyRecord:
    if shots < 1:
        raise DomainError("shots must be >= 1")
    rng = np.random.default_rng(seed) if rng is None else rng
    return TomographyRecord(setting, rng.multinomial(shots, born_probabilities(rho, setting)))


def simulate_records(rho: DensityMatrix, shots: int, seed: int,
                     settings: Optional[Sequence[TomographySetting]] = None) -> list:
    """One record per setting, each from its own seeded stream."""
    settings = all_settings(rho.num_qubits) if settings is None else settings
    return [
        simulate_counts(rho, s, shots, rng=np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,))))
        for i, s in enumerate(settings)
    ]


def resample_records(records: Sequence[TomographyRecord], seed: int) -> list:
    """Multinomial resample of every record at its own total."""
    rng = np.random.default_rng(seed)
    out = []
    for rec in records:
        if rec.total == 0:
            out.append(rec)
            continue
        out.append(TomographyRecord(rec.setting, rng.multinomial(rec.total, rec.counts / rec.total)))
    return out
