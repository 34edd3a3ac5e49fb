"""
Raw tensor kernels behind the state types.

Registers are little-endian: qubit q is bit q of the flat index. The
kernels work on "tensor views" where axis q is qubit q (and, for density
matrices, axis n + q is the column index of qubit q). Operators handed to
the kernels are in kron order over the listed qubits: the first listed
qubit is the most significant factor, exactly as ``np.kron(a, b)`` builds it.
"""

from typing import Sequence

import numpy as np


def vec_to_tensor(vec: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return vec.reshape(())
    return vec.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1)))


def tensor_to_vec(t: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return t.reshape(1)
    return t.transpose(tuple(range(n - 1, -1, -1))).reshape(-1)


def _dm_perm(n: int) -> tuple:
    return tuple(range(n - 1, -1, -1)) + tuple(range(2 * n - 1, n - 1, -1))


def dm_to_tensor(rho: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return rho.reshape(())
    return rho.reshape((2,) * (2 * n)).transpose(_dm_perm(n))


def tensor_to_dm(t: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return t.reshape(1, 1)
    return t.transpose(_dm_perm(n)).reshape(2 ** n, 2 ** n)


def apply_to_axes(t: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a kron-order operator into the given tensor axes."""
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def apply_vec(vec: np.ndarray, n: int, op: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    t = apply_to_axes(vec_to_tensor(vec, n), op, qubits)
    return tensor_to_vec(t, n)


def apply_dm(rho: np.ndarray, n: int, op: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """K rho K^dagger for a (not necessarily unitary) K on ``qubits``."""
    t = dm_to_tensor(rho, n)
    t = apply_to_axes(t, op, list(qubits))
    t = apply_to_axes(t, op.conj(), [n + q for q in qubits])
    return tensor_to_dm(t, n)


def left_multiply_dm(rho: np.ndarray, n: int, op: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """(E (x) I) rho, acting on rows only."""
    t = apply_to_axes(dm_to_tensor(rho, n), op, list(qubits))
    return tensor_to_dm(t, n)


def partial_trace(rho: np.ndarray, n: int, qubits: Sequence[int]) -> np.ndarray:
    """Trace out ``qubits``; surviving qubits keep their relative order."""
    t = dm_to_tensor(rho, n)
    cur = n
    for q in sorted(set(qubits), reverse=True):
        t = np.trace(t, axis1=q, axis2=cur + q)
        cur -= 1
    return tensor_to_dm(t, cur)


def reduce_element(rho: np.ndarray, n: int, element: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Tr_S[(E_S (x) I) rho]: unnormalised state left after outcome E on S."""
    return partial_trace(left_multiply_dm(rho, n, element, qubits), n, qubits)


def contract_bra(vec: np.ndarray, n: int, bra_kron: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """<phi|_S psi with phi given in kron order over ``qubits``."""
    k = len(qubits)
    phi_t = bra_kron.conj().reshape((2,) * k) if k else bra_kron.conj().reshape(())
    out = np.tensordot(phi_t, vec_to_tensor(vec, n), axes=(list(range(k)), list(qubits)))
    return tensor_to_vec(out, n - k)


def embed_little_endian(ket_kron: np.ndarray, k: int) -> np.ndarray:
    """Kron-order ket over qubits (0..k-1) -> little-endian amplitude vector."""
    return tensor_to_vec(ket_kron.reshape((2,) * k) if k else ket_kron.reshape(()), k)


def to_kron_order(amplitudes: np.ndarray, k: int) -> np.ndarray:
    """Little-endian amplitude vector -> kron order over qubits (0..k-1)."""
    return np.ascontiguousarray(vec_to_tensor(amplitudes, k)).reshape(-1)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def dm_kron_little_endian(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Density matrix of first (x) second with ``first`` on the low qubits."""
    return np.kron(second, first)
