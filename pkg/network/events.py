"""
Outcome combinations and the photon-number grid behind exact rates.

A ``Combination`` fixes the reading of every station a condition uses plus
which analyzers must click or stay silent. The rate of a combination is a
weighted sum over the joint photon-number grid of the condition's sources,
each station contributing the closed-form tag probability for the photons
that reached each of its two inputs.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import binom

from core.errors import BudgetExceededError
from pcm.device import BELL_TAGS, SINGLE_TAGS, PcmTag, Side, click_probabilities, outcome_for, single_basis
from sources.spdc import SourceModel, source_outcomes

from .layout import CoincidenceCondition, ExperimentLayout


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Combination:
    condition: str
    tags: tuple  # ((station_id, PcmTag), ...)
    pair: tuple
    clicking: tuple
    silent: tuple = ()

    @property
    def key(self) -> str:
        return ",".join(f"{st}={tag.value}" for st, tag in self.tags)

    def tag(self, station_id: str) -> PcmTag:
        return dict(self.tags)[station_id]

    def outcomes(self, layout: ExperimentLayout) -> dict:
        """Station id -> PcmOutcome with the expected single-photon side."""
        out = {}
        for st_id, tag in self.tags:
            st = layout.station(st_id)
            photon = st.single_photon if st.single_photon is not None else st.photons[-1]
            out[st_id] = outcome_for(tag, Side(st.side_of(photon)))
        return out

    def correction_target(self, condition: CoincidenceCondition) -> int:
        return self.pair[0] if condition.correction_target is None else condition.correction_target

    def corrections(self, layout: ExperimentLayout, condition: CoincidenceCondition) -> tuple:
        """Pauli corrections on final photons, e.g. ('X1', 'Z1')."""
        fixes = []
        parity = 0
        for st_id, outcome in self.outcomes(layout).items():
            st = layout.station(st_id)
            if outcome.correction == "X" and st.x_target is not None:
                fixes.append(f"X{st.x_target}")
            elif outcome.correction == "Z":
                parity ^= 1
        if parity:
            fixes.append(f"Z{self.correction_target(condition)}")
        return tuple(fixes)


def _node_choices(node) -> list:
    choices = []
    for i, bell_arm in enumerate(node.arms):
        others = [a for j, a in enumerate(node.arms) if j != i]
        for bell_tag in BELL_TAGS:
            for singles in itertools.product(SINGLE_TAGS, repeat=len(others)):
                tags = {bell_arm.station: bell_tag}
                tags.update({a.station: t for a, t in zip(others, singles)})
                choices.append((tags, bell_arm.herald, tuple(a.herald for a in others)))
    return choices


def combinations(condition: CoincidenceCondition) -> list:
    """Every station reading that satisfies the coincidence condition."""
    order = condition.stations()
    per_node = [_node_choices(node) for node in condition.nodes]
    bell_options = [list(BELL_TAGS) for _ in condition.bell_stations]
    single_options = [list(SINGLE_TAGS) for _ in condition.single_stations]
    combos = []
    for node_pick in itertools.product(*per_node):
        for bells in itertools.product(*bell_options):
            for singles in itertools.product(*single_options):
                tags = {}
                pair, silent = [], []
                for node_tags, herald, quiet in node_pick:
                    tags.update(node_tags)
                    pair.append(herald)
                    silent.extend(quiet)
                tags.update(zip(condition.bell_stations, bells))
                tags.update(zip(condition.single_stations, singles))
                final = tuple(pair) + tuple(condition.analyzers)
                combos.append(
                    Combination(
                        condition=condition.name,
                        tags=tuple((st, tags[st]) for st in order),
                        pair=final,
                        clicking=final,
                        silent=tuple(silent),
                    )
                )
    return combos


def expected_basis(layout: ExperimentLayout, station_id: str, tag: PcmTag) -> str:
    st = layout.station(station_id)
    photon = st.single_photon if st.single_photon is not None else st.photons[-1]
    return single_basis(tag, Side(st.side_of(photon)))


# =========================
# Photon-number grid
# =========================

@dataclass
class PhotonGrid:
    """Joint surviving-photon numbers per mode with their weights."""
    counts: dict  # photon id -> int array
    weight: np.ndarray

    def __len__(self) -> int:
        return int(self.weight.shape[0])

    def station_count(self, photons) -> np.ndarray:
        return sum(self.counts[p] for p in photons)


def grid_size(layout: ExperimentLayout, condition: CoincidenceCondition, max_pairs: int) -> int:
    per_source = (max_pairs + 1) ** 2
    size = per_source ** len(condition.sources)
    for gate in layout.elements:
        size *= 2 * max_pairs + 1
    return size


def build_grid(
    layout: ExperimentLayout,
    condition: CoincidenceCondition,
    model: SourceModel,
    eta_of,
    budget: float = 1e8,
) -> PhotonGrid:
    """
    Cartesian product of every source's (n_a, n_b) outcomes, expanded by
    the binomial routing of every PBS gate. ``eta_of(photon)`` gives the
    efficiency of each mode.
    """
    size = grid_size(layout, condition, model.max_pairs)
    if size > budget:
        raise BudgetExceededError(size, int(budget))
    outcomes = []
    for sid in condition.sources:
        spec = layout.source(sid)
        a, b = spec.photons
        outcomes.append((spec, source_outcomes(model, eta_of(a), eta_of(b))))

    index = np.indices([len(o.weight) for _, o in outcomes]).reshape(len(outcomes), -1)
    counts = {}
    weight = np.ones(index.shape[1])
    for (spec, out), idx in zip(outcomes, index):
        a, b = spec.photons
        counts[a] = out.n_a[idx].astype(np.int8)
        counts[b] = out.n_b[idx].astype(np.int8)
        weight = weight * out.weight[idx]

    for gate in layout.elements:
        p, q = gate.photons
        if p not in counts or q not in counts:
            continue
        total = counts[p] + counts[q]
        tmax = int(total.max()) if total.size else 0
        js = np.arange(tmax + 1)
        pmf = binom.pmf(js[None, :], total[:, None], 0.5)
        rows, cols = np.nonzero(pmf > 0)
        counts = {k: v[rows] for k, v in counts.items()}
        counts[p] = cols.astype(np.int8)
        counts[q] = total[rows] - cols
        weight = weight[rows] * pmf[rows, cols]

    logger.info(f"Grid for {condition.name}: {weight.shape[0]} branches")
    return PhotonGrid(counts=counts, weight=weight)


def station_probabilities(grid: PhotonGrid, layout: ExperimentLayout, station_id: str, v: float = 1.0) -> dict:
    """Tag distribution of one station over the grid, by CPBS input."""
    st = layout.station(station_id)
    if len(st.photons) == 1:
        n_b = grid.counts[st.photons[0]]
        return click_probabilities(np.zeros_like(n_b), n_b, v)
    a, b = st.photons
    return click_probabilities(grid.counts[a], grid.counts[b], v)


def combination_rate(
    grid: PhotonGrid,
    combo: Combination,
    layout: ExperimentLayout,
    tag_cache: Optional[dict] = None,
    visibility: Optional[Callable[[str], float]] = None,
) -> float:
    """
    Exact per-pulse probability of one combination. ``visibility(station)``
    gives each PCM's overlap visibility; perfect overlap when omitted.
    """
    factor = grid.weight.copy()
    for st_id, tag in combo.tags:
        if tag_cache is not None and st_id in tag_cache:
            probs = tag_cache[st_id]
        else:
            v = 1.0 if visibility is None else visibility(st_id)
            probs = station_probabilities(grid, layout, st_id, v)
            if tag_cache is not None:
                tag_cache[st_id] = probs
        factor = factor * probs[tag]
    for photon in combo.clicking:
        factor = factor * (grid.counts[photon] >= 1)
    for photon in combo.silent:
        factor = factor * (grid.counts[photon] == 0)
    return float(np.sum(factor))
