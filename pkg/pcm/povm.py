"""
PCM measurement operators and the multi-pair false-BSM estimate.

Elements act on the two PCM input photons in kron order (a, b). With
distinguishability parameter v a Bell element mixes the ideal projector with
the classical click statistics of distinguishable photons, which can only
hit the same D/A value in both inputs:

    M_phi(v) = v |phi+><phi+| + (1 - v) (|DD><DD| + |AA><AA|) / 2
    M_psi(v) = v |psi+><psi+| + (1 - v) (|DD><DD| + |AA><AA|) / 2
    M_nd     = |DA><DA| + |AD><AD|
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import binom

from core.errors import DomainError
from core.states import KETS, PHI_PLUS, PSI_PLUS, PIPELINE_TOL
from sources.spdc import SourceModel, emission_weights

from .device import BELL_TAGS, PcmTag, click_probabilities


logger = logging.getLogger(__name__)


def _proj(a: str, b: str) -> np.ndarray:
    ket = np.kron(KETS[a].amplitudes, KETS[b].amplitudes)
    return np.outer(ket, ket.conj())


SAME_DA = _proj("D", "D") + _proj("A", "A")
OPPOSITE_DA = _proj("D", "A") + _proj("A", "D")


@dataclass(frozen=True)
class PcmPovm:
    """Outcome tag -> 4x4 positive operator on the (a, b) inputs."""
    elements: dict

    def __getitem__(self, tag: PcmTag) -> np.ndarray:
        return self.elements[tag]

    def total(self) -> np.ndarray:
        return sum(self.elements.values())

    def completeness_error(self) -> float:
        return float(np.max(np.abs(self.total() - np.eye(4))))

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(m).min() for m in self.elements.values()))

    def is_valid(self, tol: Optional[float] = None) -> bool:
        tol = PIPELINE_TOL if tol is None else tol
        return self.completeness_error() <= tol and self.min_eigenvalue() >= -tol

    def to_dict(self) -> dict:
        return {tag.value: m for tag, m in self.elements.items()}


def bell_element(tag: PcmTag, v: float) -> np.ndarray:
    ideal = PHI_PLUS if tag is PcmTag.PHI_PLUS else PSI_PLUS
    proj = np.outer(ideal.amplitudes, ideal.amplitudes.conj())
    return v * proj + (1.0 - v) * SAME_DA / 2.0


def ideal_povm(v: float = 1.0) -> PcmPovm:
    """
    Coincidence POVM of one PCM. Tomography keeps two-click records only, so
    the no_decision element also holds the bunched single-click events of
    opposite D/A inputs.
    """
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"distinguishability v={v} outside [0, 1]")
    elements = {tag: bell_element(tag, v) for tag in BELL_TAGS}
    elements[PcmTag.NO_DECISION] = OPPOSITE_DA.copy()
    return PcmPovm(elements)


def false_bsm_rate(model: SourceModel, eta: Optional[float] = None, v: float = 1.0) -> float:
    """
    Share of Bell tags at a GHZ-EPR PCM that carry two or more EPR-side
    photons. The GHZ side delivers one photon; the EPR side delivers n_e
    photons with n_e ~ sum_k w(k) Bin(k, eta). Exact sum over all k and n_e,
    using the same port and bunching rule as the network rates.

    Args:
        model: source model; its efficiency is used when eta is None
        eta: per-photon detection efficiency override
        v: two-photon visibility at the CPBS

    Returns:
        False Bell readings over all Bell readings, 0.0 when none occur.
    """
    eta = model.efficiency if eta is None else eta
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"efficiency {eta} outside [0, 1]")
    w = emission_weights(model)
    kmax = len(w) - 1
    n_e = np.arange(kmax + 1)
    dist = sum(w[k] * binom.pmf(n_e, k, eta) for k in range(kmax + 1))
    probs = click_probabilities(np.ones_like(n_e), n_e, v)
    bell = probs[PcmTag.PHI_PLUS] + probs[PcmTag.PSI_PLUS]
    total = float(np.sum(dist[1:] * bell[1:]))
    if total <= 0.0:
        return 0.0
    false = float(np.sum(dist[2:] * bell[2:]))
    rate = false / total
    logger.debug(f"false BSM rate p={model.p} eta={eta}: {rate:.5f}")
    return rate
