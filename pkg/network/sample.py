"""
Monte Carlo estimate of the same quantities run_enumerate computes exactly.

Each trial draws the pair number of every source from a uniform proposal
over 0..max_pairs and carries the importance weight w(k)/q(k), so rare
all-sources-fire pulses are sampled often. Survivors are binomial per mode,
PBS routing is binomial, and every photon at a station takes either CPBS
port at random, bunching onto one detector as in pcm.device; the click
mask is read through the same classifier that handles real click patterns.
"""

import logging

import numpy as np

from noise.model import NoiseModel
from pcm.device import PcmTag, mask_tag_table, sample_clicks
from sources.spdc import SourceModel, emission_weights
from threads.blocks import block_rng, block_sizes, map_blocks

from .enumerate import condition_states, effective_model, make_record
from .events import combinations
from .layout import CoincidenceCondition, ExperimentLayout
from .results import Method, NetworkRun, RateEstimate


logger = logging.getLogger(__name__)

_TAGS = list(PcmTag)


def _estimate(s1: float, s2: float, n: int) -> RateEstimate:
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
    return RateEstimate(max(mean, 0.0), float(np.sqrt(var / n)), float(n), Method.SAMPLE)


def draw_pairs(w: np.ndarray, size: int, n_sources: int, rng: np.random.Generator) -> tuple:
    """
    Pair numbers drawn from the uniform proposal over 0..len(w)-1, with the
    importance weight of each trial. Weighted frequencies converge to w.
    """
    kdim = len(w)
    k = rng.integers(0, kdim, size=(size, n_sources))
    return k, np.prod(w[k] * kdim, axis=1)


class BlockSampler:
    """Draws one block of trials for one coincidence condition."""

    def __init__(self, layout: ExperimentLayout, condition: CoincidenceCondition,
                 model: SourceModel, noise: NoiseModel):
        self.layout = layout
        self.condition = condition
        self.combos = combinations(condition)
        self.w = emission_weights(model)
        ghz = layout.ghz_photons()
        self.sources = [layout.source(sid) for sid in condition.sources]
        self.eta = {p: noise.eta(p, ghz) for s in self.sources for p in s.photons}
        self.stations = list(condition.stations())
        self.visibility = {st: noise.visibility(st) for st in self.stations}
        self.table = mask_tag_table()
        present = {p for s in self.sources for p in s.photons}
        self.gates = [g for g in layout.elements if set(g.photons) <= present]

    def _inputs(self, st_id: str, counts: dict) -> tuple:
        photons = self.layout.station(st_id).photons
        if len(photons) == 1:
            n_b = counts[photons[0]]
            return np.zeros_like(n_b), n_b
        return counts[photons[0]], counts[photons[1]]

    def run(self, size: int, rng: np.random.Generator) -> tuple:
        k, weight = draw_pairs(self.w, size, len(self.sources), rng)
        counts = {}
        for j, spec in enumerate(self.sources):
            a, b = spec.photons
            counts[a] = rng.binomial(k[:, j], self.eta[a])
            counts[b] = rng.binomial(k[:, j], self.eta[b])
        for gate in self.gates:
            p, q = gate.photons
            total = counts[p] + counts[q]
            counts[p] = rng.binomial(total, 0.5)
            counts[q] = total - counts[p]
        tags = {}
        for st_id in self.stations:
            n_a, n_b = self._inputs(st_id, counts)
            tags[st_id] = self.table[sample_clicks(n_a, n_b, self.visibility[st_id], rng)]

        s1 = np.zeros(len(self.combos))
        s2 = np.zeros(len(self.combos))
        for c, combo in enumerate(self.combos):
            ok = np.ones(size, dtype=bool)
            for st_id, tag in combo.tags:
                ok &= tags[st_id] == _TAGS.index(tag)
            for p in combo.clicking:
                ok &= counts[p] >= 1
            for p in combo.silent:
                ok &= counts[p] == 0
            x = np.where(ok, weight, 0.0)
            s1[c] = x.sum()
            s2[c] = np.dot(x, x)
        return s1, s2


def run_sample(
    layout: ExperimentLayout,
    model: SourceModel,
    noise: NoiseModel,
    trials: int,
    seed: int,
    workers: int = 1,
    block_size: int = 65536,
    progress: bool = False,
    with_states: bool = True,
) -> NetworkRun:
    """
    Monte Carlo rates (and optionally records) for every condition.

    Args:
        trials: trials per condition.
        seed: root seed; block b of condition c draws from block_rng(seed, c, b).
        workers: thread count; results do not depend on it.
        block_size: trials per block.
        progress: show a progress bar per condition.
        with_states: attach final-pair records built from the chain.

    Returns:
        NetworkRun with SAMPLE estimates and their standard errors.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    model = effective_model(model, noise)
    sizes = block_sizes(trials, block_size)
    condition_rates, combo_rates, records = {}, {}, []
    for stream, cond in enumerate(layout.conditions):
        sampler = BlockSampler(layout, cond, model, noise)
        logger.info(f"Sampling {cond.name}: {trials} trials in {len(sizes)} blocks")
        parts = map_blocks(
            lambda b: sampler.run(sizes[b], block_rng(seed, stream, b)),
            len(sizes),
            workers=workers,
            progress=progress,
            desc=cond.name,
        )
        s1 = np.zeros(len(sampler.combos))
        s2 = np.zeros(len(sampler.combos))
        for a, b in parts:
            s1 += a
            s2 += b
        chains = condition_states(layout, cond, model, noise) if with_states else {}
        for c, combo in enumerate(sampler.combos):
            rate = _estimate(float(s1[c]), float(s2[c]), trials)
            combo_rates[f"{cond.name}:{combo.key}"] = rate
            if with_states and rate.value > 0:
                records.append(make_record(layout, cond, combo, rate, chains[combo.key]))
        # combinations are disjoint events, so second moments add
        condition_rates[cond.name] = _estimate(float(s1.sum()), float(s2.sum()), trials)
    return NetworkRun(
        layout=layout.name,
        method=Method.SAMPLE,
        condition_rates=condition_rates,
        combo_rates=combo_rates,
        records=records,
        diagnostics={"seed": seed, "trials": trials, "blocks": len(sizes), "max_pairs": model.max_pairs},
    )
