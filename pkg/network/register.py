"""
Density-matrix chain for the post-selected final-pair states.

Only pulses where every source emitted at most one pair have a tracked
polarization state. For one outcome combination the chain walks the
condition's operations (PBS gates first, then stations in order, then the
analyzers) depth first, adding a source to the register only when an
operation needs one of its photons. Each source branches on which of its
photons survived; measured photons leave the register at once, so the
register stays a handful of qubits wide.

When both photons of a PBS leave through the same output they are traced
out and kept only as a photon count (a load) on that mode. A station fed
by a load uses the same port and bunching statistics as the rate grid, so
the tracked weight never exceeds the exact rate.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from core import ops
from core.states import KETS, PAULIS, DensityMatrix, ALGEBRA_TOL
from noise.model import NoiseModel, cpbs_branches, pbs_channel, werner_pair
from optics.elements import BranchLabel, CpbsDevice, PbsGate
from pcm.device import PcmTag, Port, Side, bunched_single_click, click_probabilities, single_basis
from sources.spdc import SourceModel, emission_weights

from .events import Combination, expected_basis
from .layout import CoincidenceCondition, ExperimentLayout


logger = logging.getLogger(__name__)

_H = np.diag([1, 0]).astype(complex)
_V = np.diag([0, 1]).astype(complex)
# both photons leave through the output of the first (HV) or second (VH) mode
_BUNCH_FIRST = np.diag([0, 1, 0, 0]).astype(complex)
_BUNCH_SECOND = np.diag([0, 0, 1, 0]).astype(complex)

_TAG_BRANCHES = {
    PcmTag.PHI_PLUS: (BranchLabel.COINC_HH, BranchLabel.COINC_VV),
    PcmTag.PSI_PLUS: (BranchLabel.COINC_HV, BranchLabel.COINC_VH),
    PcmTag.SINGLE_LEFT: (BranchLabel.BOTH_LEFT,),
    PcmTag.SINGLE_RIGHT: (BranchLabel.BOTH_RIGHT,),
}


@dataclass(frozen=True)
class Register:
    modes: tuple  # qubit q carries photon modes[q]
    rho: np.ndarray
    weight: float
    added: frozenset = frozenset()
    parity: int = 0
    loads: tuple = ()  # (mode, untracked photon count)

    @property
    def n(self) -> int:
        return len(self.modes)

    def qubit(self, mode: int) -> int:
        return self.modes.index(mode)

    def load(self, mode: int) -> int:
        return dict(self.loads).get(mode, 0)

    def occupied(self, mode: int) -> bool:
        return mode in self.modes or self.load(mode) > 0

    def photons_at(self, mode: int) -> int:
        return int(mode in self.modes) + self.load(mode)


@dataclass(frozen=True)
class ChainResult:
    """Accumulated sum of weight x state over the tracked pulses."""
    weight: float
    rho: Optional[np.ndarray]  # unnormalised, qubit i = pair[i]

    def state(self) -> Optional[DensityMatrix]:
        if self.rho is None or self.weight <= 0:
            return None
        return DensityMatrix(2, self.rho / self.weight)


def presence_options(w0: float, w1: float, eta_a: float, eta_b: float) -> list:
    """(a survives, b survives, weight) for a source with at most one pair."""
    opts = [
        (False, False, w0 + w1 * (1 - eta_a) * (1 - eta_b)),
        (True, False, w1 * eta_a * (1 - eta_b)),
        (False, True, w1 * (1 - eta_a) * eta_b),
        (True, True, w1 * eta_a * eta_b),
    ]
    return [o for o in opts if o[2] > 0]


class ChainWalker:
    """Walks one condition of a layout; reusable across its combinations."""

    def __init__(self, layout: ExperimentLayout, condition: CoincidenceCondition,
                 model: SourceModel, noise: NoiseModel):
        self.layout = layout
        self.condition = condition
        self.noise = noise
        w = emission_weights(model)
        self.w0 = float(w[0])
        self.w1 = float(w[1]) if len(w) > 1 else 0.0
        self.ghz = layout.ghz_photons()
        in_condition = set(condition.sources)
        self.gates = [
            g for g in layout.elements
            if all(layout.source_of(p).source_id in in_condition for p in g.photons)
        ]
        self.routed = {p for g in self.gates for p in g.photons}

    # ---- source handling -------------------------------------------------

    def _eta(self, photon: int) -> float:
        return self.noise.eta(photon, self.ghz)

    def _consistent(self, photon: int, present: bool, combo: Combination) -> bool:
        if photon in self.routed:
            return True
        if present and photon in combo.silent:
            return False
        if not present and photon in combo.clicking:
            return False
        return True

    def _add_source(self, reg: Register, source_id: int, combo: Combination) -> list:
        spec = self.layout.source(source_id)
        a, b = spec.photons
        children = []
        for has_a, has_b, w in presence_options(self.w0, self.w1, self._eta(a), self._eta(b)):
            if not (self._consistent(a, has_a, combo) and self._consistent(b, has_b, combo)):
                continue
            modes, rho = reg.modes, reg.rho
            if has_a and has_b:
                pair = werner_pair(self.noise.lam(source_id)).entries
                rho, modes = ops.dm_kron_little_endian(rho, pair), modes + (a, b)
            elif has_a or has_b:
                rho = ops.dm_kron_little_endian(rho, np.eye(2) / 2)
                modes = modes + ((a,) if has_a else (b,))
            children.append(
                replace(reg, modes=modes, rho=rho, weight=reg.weight * w, added=reg.added | {source_id})
            )
        return children

    def _missing_source(self, reg: Register, photons) -> Optional[int]:
        for p in photons:
            sid = self.layout.source_of(p).source_id
            if sid in self.condition.sources and sid not in reg.added:
                return sid
        return None

    # ---- operations ------------------------------------------------------

    def _route(self, reg: Register, gate, combo: Combination) -> list:
        p, q = gate.photons
        has_p, has_q = p in reg.modes, q in reg.modes
        out = []
        if has_p and has_q:
            qubits = [reg.qubit(p), reg.qubit(q)]
            state, prob = pbs_channel(
                DensityMatrix(reg.n, reg.rho),
                PbsGate(*qubits),
                self.noise.visibility(gate.point),
            )
            if state is not None:
                out.append(replace(reg, rho=state.entries, weight=reg.weight * prob))
            modes = tuple(m for m in reg.modes if m not in (p, q))
            for proj, label in ((_BUNCH_FIRST, p), (_BUNCH_SECOND, q)):
                rest = ops.reduce_element(reg.rho, reg.n, proj, qubits)
                prob = float(np.trace(rest).real)
                if prob <= ALGEBRA_TOL ** 2:
                    continue
                loads = tuple(sorted({**dict(reg.loads), label: 2}.items()))
                out.append(replace(reg, modes=modes, rho=rest / prob, weight=reg.weight * prob, loads=loads))
        elif has_p or has_q:
            here, there = (p, q) if has_p else (q, p)
            k = reg.qubit(here)
            for proj, label in ((_H, here), (_V, there)):
                kept = ops.apply_dm(reg.rho, reg.n, proj, [k])
                prob = float(np.trace(kept).real)
                if prob <= ALGEBRA_TOL ** 2:
                    continue
                modes = tuple(label if m == here else m for m in reg.modes)
                out.append(replace(reg, modes=modes, rho=kept / prob, weight=reg.weight * prob))
        else:
            out.append(reg)
        return [
            r for r in out
            if all(r.occupied(m) or m not in combo.clicking for m in (p, q))
            and not any(r.occupied(m) and m in combo.silent for m in (p, q))
        ]

    def _corrected(self, reg: Register, st, tag: PcmTag, modes: tuple, rest: np.ndarray,
                   prob: float, loads: tuple) -> Register:
        """Register after a station reading, with its Pauli corrections booked."""
        rho = rest / prob
        parity = reg.parity
        if tag is PcmTag.PSI_PLUS and st.x_target in modes:
            rho = ops.apply_dm(rho, len(modes), PAULIS["X"], [modes.index(st.x_target)])
        if tag.is_single and expected_basis(self.layout, st.station_id, tag) == "A":
            parity ^= 1
        return replace(reg, modes=modes, rho=rho, weight=reg.weight * prob, parity=parity, loads=loads)

    def _measure_pair(self, reg: Register, st, tag: PcmTag, v: float) -> list:
        a, b = st.photons
        branches = cpbs_branches(DensityMatrix(reg.n, reg.rho), CpbsDevice(reg.qubit(a), reg.qubit(b)), v)
        wanted = _TAG_BRANCHES[tag]
        scale = bunched_single_click(v) if tag.is_single else 1.0
        prob = 0.0
        rest = None
        for br in branches:
            if br.label not in wanted or br.state is None:
                continue
            term = scale * br.probability * br.state.entries
            prob += scale * br.probability
            rest = term if rest is None else rest + term
        if rest is None or prob <= ALGEBRA_TOL ** 2:
            return []
        modes = tuple(m for m in reg.modes if m not in (a, b))
        return [self._corrected(reg, st, tag, modes, rest, prob, reg.loads)]

    def _measure_loaded(self, reg: Register, st, tag: PcmTag, v: float) -> list:
        """A station holding untracked photons; at most one tracked photon."""
        if len(st.photons) == 1:
            n_a, n_b = 0, reg.photons_at(st.photons[0])
        else:
            n_a, n_b = (reg.photons_at(m) for m in st.photons)
        loads = tuple(item for item in reg.loads if item[0] not in st.photons)
        tracked = [m for m in st.photons if m in reg.modes]
        if not tracked:
            prob = float(click_probabilities(n_a, n_b, v)[tag])
            if prob <= 0.0:
                return []
            return [self._corrected(reg, st, tag, reg.modes, reg.rho * prob, prob, loads)]
        photon = tracked[0]
        side = Side(st.side_of(photon))
        modes = tuple(m for m in reg.modes if m != photon)
        out = []
        for port, single in ((Port.LEFT, PcmTag.SINGLE_LEFT), (Port.RIGHT, PcmTag.SINGLE_RIGHT)):
            ket = KETS[single_basis(single, side)].amplitudes
            rest = ops.reduce_element(reg.rho, reg.n, np.outer(ket, ket.conj()), [reg.qubit(photon)])
            prob = float(np.trace(rest).real) * float(click_probabilities(n_a, n_b, v, (side, port))[tag])
            if prob <= ALGEBRA_TOL ** 2:
                continue
            rest = rest / float(np.trace(rest).real) * prob
            out.append(self._corrected(reg, st, tag, modes, rest, prob, loads))
        return out

    def _measure(self, reg: Register, station_id: str, combo: Combination) -> list:
        st = self.layout.station(station_id)
        tag = combo.tag(station_id)
        v = self.noise.visibility(station_id)
        if any(reg.load(m) for m in st.photons):
            return self._measure_loaded(reg, st, tag, v)
        present = [m for m in st.photons if m in reg.modes]
        if len(present) == 2:
            return self._measure_pair(reg, st, tag, v)
        if tag.is_bell or len(present) != 1:
            return []
        photon = present[0]
        ket = KETS[single_basis(tag, Side(st.side_of(photon)))].amplitudes
        rest = ops.reduce_element(reg.rho, reg.n, np.outer(ket, ket.conj()), [reg.qubit(photon)])
        prob = float(np.trace(rest).real)
        if prob <= ALGEBRA_TOL ** 2:
            return []
        modes = tuple(m for m in reg.modes if m != photon)
        return [self._corrected(reg, st, tag, modes, rest, prob, reg.loads)]

    def _finish(self, reg: Register, combo: Combination) -> Optional[tuple]:
        for m in combo.clicking:
            if m not in reg.modes:
                return None
        for m in combo.silent:
            if reg.occupied(m):
                return None
        rho = reg.rho
        target = combo.correction_target(self.condition)
        if reg.parity and target in reg.modes:
            rho = ops.apply_dm(rho, reg.n, PAULIS["Z"], [reg.qubit(target)])
        drop = [q for q, m in enumerate(reg.modes) if m not in combo.pair]
        kept_modes = [m for m in reg.modes if m in combo.pair]
        pair_state = DensityMatrix(2, ops.partial_trace(rho, reg.n, drop))
        order = [kept_modes.index(m) for m in combo.pair]
        return reg.weight, pair_state.reorder(order).entries

    # ---- walk ------------------------------------------------------------

    def _steps(self) -> list:
        steps = [("pbs", g) for g in self.gates]
        steps += [("station", s) for s in self.condition.stations()]
        steps.append(("final", None))
        return steps

    def _needs(self, kind: str, item, combo: Combination) -> tuple:
        if kind == "pbs":
            return tuple(item.photons)
        if kind == "station":
            return tuple(self.layout.station(item).photons)
        photons = []
        for sid in self.condition.sources:
            photons.extend(self.layout.source(sid).photons)
        return tuple(photons)

    def walk(self, combo: Combination) -> ChainResult:
        steps = self._steps()
        total_w = 0.0
        total_rho = None
        stack = [(0, Register((), np.ones((1, 1), dtype=complex), 1.0))]
        while stack:
            i, reg = stack.pop()
            if reg.weight <= 0:
                continue
            kind, item = steps[i]
            missing = self._missing_source(reg, self._needs(kind, item, combo))
            if missing is not None:
                stack.extend((i, child) for child in self._add_source(reg, missing, combo))
                continue
            if kind == "pbs":
                stack.extend((i + 1, r) for r in self._route(reg, item, combo))
            elif kind == "station":
                stack.extend((i + 1, r) for r in self._measure(reg, item, combo))
            else:
                done = self._finish(reg, combo)
                if done is None:
                    continue
                w, rho = done
                total_w += w
                total_rho = w * rho if total_rho is None else total_rho + w * rho
        return ChainResult(total_w, total_rho)
