"""
Exact enumeration of a layout's coincidence rates and final-pair states.

Rates come from the vectorized photon-number grid (every emission pattern,
survival outcome and PBS routing, weighted exactly). States come from the
density-matrix chain over the pulses with at most one pair per source; the
remaining multi-pair weight of a combination is folded in as white noise.
"""

import logging
import time
from dataclasses import replace

import numpy as np

from core.states import DensityMatrix
from noise.model import NoiseModel
from pcm.device import PcmTag
from sources.spdc import SourceModel

from .events import Combination, build_grid, combination_rate, combinations, station_probabilities
from .layout import CoincidenceCondition, ExperimentLayout
from .register import ChainResult, ChainWalker
from .results import FinalPairRecord, Method, NetworkRun, RateEstimate


logger = logging.getLogger(__name__)

# relative slack before a tracked weight above the rate is reported
_CLIP_SLACK = 1e-9


def effective_model(model: SourceModel, noise: NoiseModel) -> SourceModel:
    return model if noise.include_multi_pair else model.truncated(1)


def make_record(
    layout: ExperimentLayout,
    condition: CoincidenceCondition,
    combo: Combination,
    rate: RateEstimate,
    chain: ChainResult,
) -> FinalPairRecord:
    contamination = rate.value - chain.weight
    if contamination < -_CLIP_SLACK * max(rate.value, 1e-300) and rate.method is Method.ENUMERATE:
        logger.warning(
            f"{combo.key}: tracked weight {chain.weight:.3e} exceeds rate {rate.value:.3e}; clipping"
        )
    contamination = max(contamination, 0.0)
    state = None
    total = chain.weight + contamination
    if total > 0 and chain.rho is not None:
        rho = chain.rho + contamination * np.eye(4) / 4.0
        state = DensityMatrix.from_unnormalized(2, rho / total)
    elif total > 0:
        state = DensityMatrix.maximally_mixed(2)
    return FinalPairRecord(
        condition=condition.name,
        key=combo.key,
        outcomes=combo.outcomes(layout),
        pair=combo.pair,
        state=state,
        rate=rate,
        tracked_weight=chain.weight,
        contamination=contamination,
        corrections=combo.corrections(layout, condition),
    )


def condition_states(layout: ExperimentLayout, condition: CoincidenceCondition,
                     model: SourceModel, noise: NoiseModel) -> dict:
    """Combination key -> ChainResult for every combination of a condition."""
    walker = ChainWalker(layout, condition, model, noise)
    return {combo.key: walker.walk(combo) for combo in combinations(condition)}


def attach_states(run: NetworkRun, layout: ExperimentLayout, model: SourceModel, noise: NoiseModel) -> NetworkRun:
    """
    Rebuild the final-pair records of ``run`` from its combination rates.

    Rates do not depend on white noise, so a calibration can reuse one
    enumeration and only redo the chains.
    """
    model = effective_model(model, noise)
    records = []
    for cond in layout.conditions:
        chains = condition_states(layout, cond, model, noise)
        for combo in combinations(cond):
            rate = run.combo_rates.get(f"{cond.name}:{combo.key}")
            if rate is not None and rate.value > 0:
                records.append(make_record(layout, cond, combo, rate, chains[combo.key]))
    diagnostics = dict(run.diagnostics)
    diagnostics["contamination"] = {f"{r.condition}:{r.key}": r.contamination for r in records}
    return replace(run, records=records, diagnostics=diagnostics)


def run_enumerate(
    layout: ExperimentLayout,
    model: SourceModel,
    noise: NoiseModel,
    budget: float = 1e8,
    with_states: bool = True,
) -> NetworkRun:
    """
    Exact rates of every condition and combination of ``layout``.

    Args:
        layout: the experiment to evaluate.
        model: source statistics; truncated to one pair per source when the
            noise model leaves multi-pair emission out.
        noise: efficiencies, visibilities and white noise.
        budget: largest photon-number grid allowed per condition.
        with_states: also build the final-pair records.

    Returns:
        NetworkRun with exact RateEstimates and, when asked, the records.

    Raises:
        BudgetExceededError: when a condition's grid exceeds ``budget``.
    """
    start = time.time()
    model = effective_model(model, noise)
    ghz = layout.ghz_photons()

    def eta_of(photon: int) -> float:
        return noise.eta(photon, ghz)

    condition_rates, combo_rates = {}, {}
    no_decision = {}
    for cond in layout.conditions:
        grid = build_grid(layout, cond, model, eta_of, budget)
        cache = {}
        total = 0.0
        for combo in combinations(cond):
            value = combination_rate(grid, combo, layout, cache, noise.visibility)
            combo_rates[f"{cond.name}:{combo.key}"] = RateEstimate(value, 0.0, float(len(grid)), Method.ENUMERATE)
            total += value
        condition_rates[cond.name] = RateEstimate(total, 0.0, float(len(grid)), Method.ENUMERATE)
        for st_id in cond.stations():
            probs = cache.get(st_id) or station_probabilities(grid, layout, st_id, noise.visibility(st_id))
            no_decision[f"{cond.name}:{st_id}"] = float(np.sum(grid.weight * probs[PcmTag.NO_DECISION]))
        logger.info(f"Condition {cond.name}: rate {total:.6e} per pulse")

    logger.info(f"Enumerated {layout.name} in {time.time() - start:.2f}s")
    run = NetworkRun(
        layout=layout.name,
        method=Method.ENUMERATE,
        condition_rates=condition_rates,
        combo_rates=combo_rates,
        diagnostics={"no_decision": no_decision, "contamination": {}, "max_pairs": model.max_pairs},
    )
    return attach_states(run, layout, model, noise) if with_states else run
