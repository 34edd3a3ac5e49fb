"""
Polarization-qubit registers: pure states, density matrices, Pauli strings
and projectors, plus the pure operations the rest of the simulator is built
from.

Conventions:
- bit 0 is |H>, bit 1 is |V>
- little-endian: qubit q is bit q of the amplitude index
- every value is immutable once built (arrays are flagged read-only)
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import ops
from .errors import CapacityError, DimensionError, NonUnitaryError, QubitIndexError

logger = logging.getLogger(__name__)


MAX_QUBITS = 14
ALGEBRA_TOL = 1e-12
PIPELINE_TOL = 1e-10


def configure(max_qubits: int = 14, algebra_tol: float = 1e-12, pipeline_tol: float = 1e-10) -> None:
    """Install process-wide limits (called once from the entry point)."""
    global MAX_QUBITS, ALGEBRA_TOL, PIPELINE_TOL
    MAX_QUBITS = int(max_qubits)
    ALGEBRA_TOL = float(algebra_tol)
    PIPELINE_TOL = float(pipeline_tol)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


def _check_capacity(n: int) -> None:
    if n > MAX_QUBITS:
        raise CapacityError(f"register of {n} qubits exceeds the cap of {MAX_QUBITS}")


def _check_qubit(n: int, q: int) -> None:
    if not 0 <= q < n:
        raise QubitIndexError(f"qubit {q} out of range for a {n}-qubit register")


@dataclass(frozen=True)
class PureState:
    """Amplitude vector over ``num_qubits`` polarization qubits."""
    num_qubits: int
    amplitudes: np.ndarray
    is_empty: bool = False

    def __post_init__(self):
        _check_capacity(self.num_qubits)
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != 2 ** self.num_qubits:
            raise DimensionError(
                f"{amps.shape[0]} amplitudes for {self.num_qubits} qubits"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def empty(cls, num_qubits: int) -> "PureState":
        """Marker for a post-selection branch that annihilated the state."""
        return cls(num_qubits, np.zeros(2 ** num_qubits, dtype=complex), is_empty=True)

    @classmethod
    def basis(cls, labels: str) -> "PureState":
        """Product state from letters in {H,V,D,A,R,L}; letter i is qubit i."""
        state = cls(0, np.ones(1))
        for letter in labels:
            state = tensor(state, KETS[letter.upper()])
        return state

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalize(self) -> "PureState":
        nrm = np.sqrt(self.norm())
        if nrm == 0:
            return PureState.empty(self.num_qubits)
        return PureState(self.num_qubits, self.amplitudes / nrm)

    def amplitude(self, labels: str) -> complex:
        """Amplitude of an H/V product label (qubit 0 first)."""
        index = sum((1 << q) for q, c in enumerate(labels.upper()) if c == "V")
        return complex(self.amplitudes[index])

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix.from_pure(self)


@dataclass(frozen=True)
class DensityMatrix:
    """Density operator over ``num_qubits`` qubits (little-endian)."""
    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        _check_capacity(self.num_qubits)
        ent = _frozen(self.entries)
        dim = 2 ** self.num_qubits
        if ent.shape != (dim, dim):
            raise DimensionError(f"matrix shape {ent.shape} for {self.num_qubits} qubits")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        a = state.amplitudes
        return cls(state.num_qubits, np.outer(a, a.conj()))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        dim = 2 ** num_qubits
        return cls(num_qubits, np.eye(dim) / dim)

    @classmethod
    def from_unnormalized(cls, num_qubits: int, entries: np.ndarray) -> "DensityMatrix":
        """Hermitize and trace-normalise a raw operator."""
        ent = np.asarray(entries, dtype=complex)
        ent = 0.5 * (ent + ent.conj().T)
        tr = np.trace(ent).real
        if tr <= 0:
            raise DimensionError("operator has non-positive trace")
        return cls(num_qubits, ent / tr)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def is_valid(self, tol: Optional[float] = None) -> bool:
        tol = PIPELINE_TOL if tol is None else tol
        hermitian = np.allclose(self.entries, self.entries.conj().T, atol=tol)
        return bool(
            hermitian
            and abs(self.trace() - 1.0) <= tol
            and self.eigenvalues().min() >= -tol
        )

    def partial_trace(self, qubits: Sequence[int]) -> "DensityMatrix":
        for q in qubits:
            _check_qubit(self.num_qubits, q)
        keep = self.num_qubits - len(set(qubits))
        return DensityMatrix(keep, ops.partial_trace(self.entries, self.num_qubits, qubits))

    def reorder(self, order: Sequence[int]) -> "DensityMatrix":
        """New register whose qubit i is old qubit ``order[i]``."""
        n = self.num_qubits
        t = ops.dm_to_tensor(self.entries, n)
        t = t.transpose(list(order) + [n + q for q in order])
        return DensityMatrix(n, ops.tensor_to_dm(t, n))

    def z_probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)


@dataclass(frozen=True)
class PauliString:
    """One letter from {I, X, Y, Z} per qubit, qubit 0 first."""
    letters: str

    def __post_init__(self):
        letters = self.letters.upper()
        if any(c not in PAULIS for c in letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    def matrix(self) -> np.ndarray:
        """Little-endian matrix of the string."""
        # kron order puts the first factor on the most significant bit
        return ops.kron_all([PAULIS[c] for c in reversed(self.letters)])


@dataclass(frozen=True)
class Projector:
    """
    Local projector: (qubit, single-qubit ket) pairs, or an explicit
    operator on ``qubits`` in kron order. ``discard`` removes the projected
    qubits from the register (measure and drop).
    """
    factors: tuple = ()
    operator: Optional[np.ndarray] = None
    qubits: tuple = ()
    discard: bool = False

    @classmethod
    def on(cls, *pairs, discard: bool = False) -> "Projector":
        return cls(factors=tuple(pairs), discard=discard)

    def targets(self) -> tuple:
        return tuple(q for q, _ in self.factors) if self.operator is None else tuple(self.qubits)

    def materialize(self) -> np.ndarray:
        if self.operator is not None:
            return np.asarray(self.operator, dtype=complex)
        mats = []
        for _, ket in self.factors:
            k = _as_ket(ket)
            mats.append(np.outer(k, k.conj()))
        return ops.kron_all(mats)


def _as_ket(ket: Union[PureState, np.ndarray, str]) -> np.ndarray:
    if isinstance(ket, str):
        return KETS[ket.upper()].amplitudes
    if isinstance(ket, PureState):
        return ops.to_kron_order(ket.amplitudes, ket.num_qubits)
    return np.asarray(ket, dtype=complex)


# =========================
# Named states and matrices
# =========================

_S = 1 / np.sqrt(2)

KETS = {
    "H": PureState(1, np.array([1, 0])),
    "V": PureState(1, np.array([0, 1])),
    "D": PureState(1, np.array([_S, _S])),
    "A": PureState(1, np.array([_S, -_S])),
    "R": PureState(1, np.array([_S, 1j * _S])),
    "L": PureState(1, np.array([_S, -1j * _S])),
}


PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def ghz(n: int, sign: int = +1) -> PureState:
    """(|H..H> + sign |V..V>)/sqrt(2)."""
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = _S
    amps[-1] += sign * _S
    return PureState(n, amps)


def bell(name: str) -> PureState:
    """phi_plus, phi_minus, psi_plus or psi_minus on two qubits."""
    amps = np.zeros(4, dtype=complex)
    if name.startswith("phi"):
        amps[0b00], amps[0b11] = _S, (_S if name.endswith("plus") else -_S)
    elif name.startswith("psi"):
        amps[0b10], amps[0b01] = _S, (_S if name.endswith("plus") else -_S)
    else:
        raise ValueError(f"unknown Bell state {name!r}")
    return PureState(2, amps)


PHI_PLUS = bell("phi_plus")
PSI_PLUS = bell("psi_plus")


# =========================
# Operations
# =========================

def tensor(a: PureState, b: PureState) -> PureState:
    """a (x) b; a keeps qubits 0..na-1, b follows."""
    _check_capacity(a.num_qubits + b.num_qubits)
    return PureState(a.num_qubits + b.num_qubits, np.kron(b.amplitudes, a.amplitudes))


def is_unitary(u: np.ndarray, tol: Optional[float] = None) -> bool:
    tol = ALGEBRA_TOL if tol is None else tol
    u = np.asarray(u, dtype=complex)
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol))


def apply_single(state: PureState, q: int, u: np.ndarray) -> PureState:
    _check_qubit(state.num_qubits, q)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise NonUnitaryError("single-qubit gate must be a 2x2 unitary")
    return PureState(state.num_qubits, ops.apply_vec(state.amplitudes, state.num_qubits, u, [q]))


def project(state: PureState, proj: Projector) -> tuple:
    """
    Returns (renormalised projected state, probability). A branch with zero
    weight comes back as ``PureState.empty`` with probability 0.
    """
    qubits = proj.targets()
    for q in qubits:
        _check_qubit(state.num_qubits, q)
    n = state.num_qubits
    p_op = proj.materialize()
    projected = ops.apply_vec(state.amplitudes, n, p_op, qubits)
    prob = float(np.vdot(projected, projected).real)
    remaining = n - len(qubits) if proj.discard else n
    if prob <= ALGEBRA_TOL ** 2:
        return PureState.empty(remaining), 0.0
    if proj.discard:
        # contract with the (rank-one) factors to drop the measured qubits
        if proj.operator is not None:
            raise ValueError("discard requires a product projector")
        bra = ops.kron_all([_as_ket(k).reshape(-1, 1) for _, k in proj.factors]).reshape(-1)
        projected = ops.contract_bra(state.amplitudes, n, bra, qubits)
    return PureState(remaining, projected / np.sqrt(prob)), min(prob, 1.0)


def fidelity(rho: DensityMatrix, target: PureState) -> float:
    """<target| rho |target>, clamped to [0, 1]."""
    if rho.num_qubits != target.num_qubits:
        raise DimensionError(
            f"state on {rho.num_qubits} qubits vs target on {target.num_qubits}"
        )
    t = target.amplitudes
    value = np.vdot(t, rho.entries @ t)
    return float(np.clip(value.real, 0.0, 1.0))


def expectation(rho: DensityMatrix, pauli: Union[PauliString, str]) -> float:
    """Tr(rho P) for a Pauli string, real part."""
    if isinstance(pauli, str):
        pauli = PauliString(pauli)
    if pauli.num_qubits != rho.num_qubits:
        raise DimensionError(
            f"Pauli string of length {pauli.num_qubits} on a {rho.num_qubits}-qubit state"
        )
    return float(np.real(np.trace(rho.entries @ pauli.matrix())))


def random_density(num_qubits: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre-ensemble random state (used for property checks and fuzzing)."""
    dim = 2 ** num_qubits
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(num_qubits, rho / np.trace(rho).real)


def random_pure(num_qubits: int, rng: np.random.Generator) -> PureState:
    amps = rng.normal(size=2 ** num_qubits) + 1j * rng.normal(size=2 ** num_qubits)
    return PureState(num_qubits, amps / np.linalg.norm(amps))
