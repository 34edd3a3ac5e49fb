"""
Maximum-likelihood reconstruction of states and detectors.

States: fixed-point iteration rho <- R rho R / Tr(R rho R) with
R = sum_j n_j / (N p_j) E_j, which is the identity at the optimum. A step
that would lower the likelihood is retried with the diluted operator
(I + eps R) / (1 + eps) for shrinking eps.

Detectors: the analogous iteration on the POVM elements,
Pi_k <- G^-1/2 R_k Pi_k R_k G^-1/2 with G = sum_k R_k Pi_k R_k, which keeps
every element positive and their sum the identity.
"""

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from core.errors import RankDeficiencyError
from core.states import DensityMatrix
from pcm.device import PcmTag
from pcm.povm import PcmPovm

from .settings import ProbeState, TomographyRecord, all_probes


logger = logging.getLogger(__name__)

_P_FLOOR = 1e-300


@dataclass(frozen=True)
class MleResult:
    state: DensityMatrix
    converged: bool
    iterations: int
    log_likelihood: float


@dataclass(frozen=True)
class PovmResult:
    povm: PcmPovm
    converged: bool
    iterations: int
    log_likelihood: float


def _operator_rank(ops_stack: np.ndarray) -> int:
    m = ops_stack.shape[0]
    return int(np.linalg.matrix_rank(ops_stack.reshape(m, -1)))


def _stack(records: Sequence[TomographyRecord]) -> tuple:
    used = [r for r in records if r.total > 0]
    if not used:
        raise RankDeficiencyError("no counts recorded in any setting")
    n = used[0].setting.num_qubits
    elements = np.concatenate([r.setting.projectors() for r in used])
    counts = np.concatenate([r.counts for r in used]).astype(float)
    return n, elements, counts


def _log_likelihood(counts: np.ndarray, probs: np.ndarray, total: float) -> float:
    mask = counts > 0
    return float(np.sum(counts[mask] * np.log(np.maximum(probs[mask], _P_FLOOR))) / total)


def mle_state(
    records: Sequence[TomographyRecord],
    max_iter: int = 10000,
    tol: float = 1e-10,
    debug: bool = False,
    initial: Optional[DensityMatrix] = None,
) -> MleResult:
    n, elements, counts = _stack(records)
    d = 2 ** n
    if _operator_rank(elements) < d * d:
        raise RankDeficiencyError(
            f"measured operators span {_operator_rank(elements)} of {d * d} dimensions"
        )
    total = counts.sum()
    rho = np.eye(d, dtype=complex) / d if initial is None else initial.entries.copy()

    def probs_of(r: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("jab,ba->j", elements, r))

    probs = probs_of(rho)
    loglik = _log_likelihood(counts, probs, total)
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        weights = np.where(counts > 0, counts / (total * np.maximum(probs, _P_FLOOR)), 0.0)
        R = np.tensordot(weights, elements, axes=1)
        eps = np.inf
        while True:
            step = R if np.isinf(eps) else (np.eye(d) + eps * R) / (1.0 + eps)
            candidate = step @ rho @ step.conj().T
            candidate = candidate / np.trace(candidate).real
            cand_probs = probs_of(candidate)
            cand_ll = _log_likelihood(counts, cand_probs, total)
            if cand_ll >= loglik - 1e-15 or eps < 1e-6:
                break
            eps = 1.0 if np.isinf(eps) else eps / 2.0
        if debug:
            assert cand_ll >= loglik - 1e-12, f"log-likelihood fell at iteration {iteration}"
        gain = cand_ll - loglik
        rho, probs, loglik = candidate, cand_probs, cand_ll
        logger.debug(f"MLE iteration {iteration}: loglik {loglik:.12f}")
        if abs(gain) < tol:
            converged = True
            break

    if converged:
        logger.info(f"MLE converged after {iteration} iterations")
    else:
        logger.warning(f"MLE did not converge in {max_iter} iterations")
    return MleResult(DensityMatrix.from_unnormalized(n, rho), converged, iteration, loglik)


POVM_TAGS = (PcmTag.PHI_PLUS, PcmTag.PSI_PLUS, PcmTag.NO_DECISION)


def _inv_sqrt(g: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(g)
    vals = np.maximum(vals, 1e-300)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def mle_povm(
    probe_counts: Mapping,
    tags: Sequence[PcmTag] = POVM_TAGS,
    max_iter: int = 10000,
    tol: float = 1e-10,
) -> PovmResult:
    """
    ``probe_counts`` maps ProbeState (or its label) to counts per tag, either
    a mapping keyed by tag or a sequence ordered as ``tags``.
    """
    probes, rows = [], []
    for probe, counts in probe_counts.items():
        probe = probe if isinstance(probe, ProbeState) else ProbeState(probe)
        if isinstance(counts, Mapping):
            row = [counts.get(t, counts.get(t.value, 0)) for t in tags]
        else:
            row = list(counts)
        vec = probe.kron_vector()
        probes.append(np.outer(vec, vec.conj()))
        rows.append(row)
    probes = np.array(probes)
    f = np.array(rows, dtype=float)
    d = probes.shape[1]
    if _operator_rank(probes) < d * d:
        raise RankDeficiencyError(f"probe states span {_operator_rank(probes)} of {d * d} dimensions")
    if f.sum() <= 0:
        raise RankDeficiencyError("no counts recorded for any probe")
    total = f.sum()

    pis = np.array([np.eye(d, dtype=complex) / len(tags) for _ in tags])

    def probs_of(elems: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("iab,kba->ik", probes, elems))

    probs = probs_of(pis)
    loglik = _log_likelihood(f.ravel(), probs.ravel(), total)
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        ratio = np.where(f > 0, f / np.maximum(probs, _P_FLOOR), 0.0)
        R = np.einsum("ik,iab->kab", ratio, probes)
        grown = np.einsum("kab,kbc,kcd->kad", R, pis, R)
        g_inv = _inv_sqrt(grown.sum(axis=0))
        pis = np.einsum("ab,kbc,cd->kad", g_inv, grown, g_inv)
        pis = 0.5 * (pis + np.conj(np.transpose(pis, (0, 2, 1))))
        probs = probs_of(pis)
        new_ll = _log_likelihood(f.ravel(), probs.ravel(), total)
        gain = new_ll - loglik
        loglik = new_ll
        if abs(gain) < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"Detector MLE did not converge in {max_iter} iterations")
    return PovmResult(PcmPovm({t: pis[k] for k, t in enumerate(tags)}), converged, iteration, loglik)


def simulate_povm_counts(povm: PcmPovm, shots: int, seed: int,
                         tags: Sequence[PcmTag] = POVM_TAGS) -> dict:
    """Probe label -> counts per tag from multinomial draws on 16 probes."""
    rng = np.random.default_rng(seed)
    out = {}
    for probe in all_probes(2):
        vec = probe.kron_vector()
        probs = np.array([np.real(np.vdot(vec, povm[t] @ vec)) for t in tags])
        probs = np.clip(probs, 0.0, None)
        out[probe.labels] = rng.multinomial(shots, probs / probs.sum())
    return out
