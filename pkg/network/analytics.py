"""
Closed-form rate laws and the twelve-photon Z-basis check.
"""

import logging
from enum import Enum

import numpy as np

from core.errors import DomainError
from core.states import PHI_PLUS, PureState, tensor
from optics.elements import PbsGate, pbs_postselect


logger = logging.getLogger(__name__)


class Scheme(Enum):
    CONVENTIONAL = "conventional"
    ALL_PHOTONIC = "all_photonic"


def rate_formula(M: int, N: int, eta: float, scheme: Scheme) -> float:
    """
    Closed-form end-to-end success rate over N repeater nodes.

    Args:
        M: parallel channels per link (>= 1)
        N: repeater nodes (>= 1)
        eta: single-photon transmission efficiency in (0, 1]
        scheme: conventional parallel swapping or all-photonic nodes

    Returns:
        M eta^(N+1) for conventional swapping, (M eta)^(N+1) otherwise.

    Raises:
        DomainError: M or N below 1, or eta outside (0, 1].
    """
    if M < 1 or N < 1:
        raise DomainError(f"need M >= 1 and N >= 1 (got M={M}, N={N})")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"efficiency {eta} outside (0, 1]")
    scheme = Scheme(scheme)
    if scheme is Scheme.CONVENTIONAL:
        return M * eta ** (N + 1)
    return float(M) ** (N + 1) * eta ** (N + 1)


def ratio_theory(p: float) -> float:
    """All-photonic over conventional counting ratio, 2 - 4p + 2p^2."""
    return 2.0 - 4.0 * p + 2.0 * p * p


# PBS fusions turning six EPR pairs into a twelve-photon GHZ state
TWELVE_FOLD_FUSIONS = ((5, 7), (2, 6), (3, 7), (5, 9), (8, 12))


def twelve_fold_state() -> PureState:
    """GHZ12 with photon p on qubit p - 1."""
    state = PureState(0, np.ones(1))
    for _ in range(6):
        state = tensor(state, PHI_PLUS)
    for a, b in TWELVE_FOLD_FUSIONS:
        state, prob = pbs_postselect(state, PbsGate(a - 1, b - 1))
        logger.debug(f"PBS {a}&{b}: pass probability {prob:.4f}")
    return state


def twelve_fold_zbasis(v: float = 1.0) -> np.ndarray:
    """
    Z-basis outcome probabilities (2^12, little-endian) of the state
    v |GHZ12><GHZ12| + (1 - v) (|H..H><H..H| + |V..V><V..V|) / 2.
    """
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"v={v} outside [0, 1]")
    amps = twelve_fold_state().amplitudes
    coherent = np.abs(amps) ** 2
    dephased = np.zeros_like(coherent)
    dephased[0] = dephased[-1] = 0.5
    return v * coherent + (1.0 - v) * dephased


def zbasis_support(probs: np.ndarray, tol: float = 1e-12) -> dict:
    """Nonzero outcomes as {'HHHH...': p}; photon 1 is the first letter."""
    n = int(np.log2(probs.shape[0]))
    out = {}
    for index in np.nonzero(probs > tol)[0]:
        label = "".join("V" if index >> q & 1 else "H" for q in range(n))
        out[label] = float(probs[index])
    return out


def signal_to_noise(probs: np.ndarray) -> float:
    signal = probs[0] + probs[-1]
    noise = float(probs.sum() - signal)
    return float("inf") if noise <= 0 else float(signal / noise)
