"""
Calibration helpers: pick noise knobs that land on a measured fidelity.

Fitted values are reported to the caller; nothing here is hard-wired to the
experimental numbers.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from core.errors import DomainError
from core.states import DensityMatrix, ghz, fidelity
from network.enumerate import attach_states, run_enumerate
from network.layout import ExperimentLayout
from network.results import NetworkRun
from noise.model import NoiseModel, pbs_channel, werner_pair
from optics.elements import PbsGate
from sources.spdc import SourceModel


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrationResult:
    parameter: str
    value: float
    target: float
    achieved: float
    reached: bool

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "value": self.value,
            "target": self.target,
            "achieved": self.achieved,
            "reached": self.reached,
        }


def fit_visibility(bell_fidelity: float) -> float:
    """Visibility whose Bell element has normalised fidelity F, v = 2F - 1."""
    if not 0.5 <= bell_fidelity <= 1.0:
        raise DomainError(f"Bell-element fidelity {bell_fidelity} outside [0.5, 1]")
    return 2.0 * bell_fidelity - 1.0


def ghz4_state(lam: float = 0.0, v_pbs: float = 1.0) -> DensityMatrix:
    """Two Werner pairs fused on a PBS; photons 5,6,7,8 on qubits 0..3."""
    pair = werner_pair(lam).entries
    rho = DensityMatrix(4, np.kron(pair, pair))
    state, _ = pbs_channel(rho, PbsGate(0, 2), v_pbs)
    return state


def ghz4_fidelity(lam: float = 0.0, v_pbs: float = 1.0) -> float:
    return fidelity(ghz4_state(lam, v_pbs), ghz(4))


def fit_parameter(
    name: str,
    fn: Callable[[float], float],
    target: float,
    lo: float = 0.0,
    hi: float = 1.0,
    xtol: float = 1e-6,
) -> CalibrationResult:
    """Root of fn(x) = target on [lo, hi]; falls back to the closer end."""
    f_lo, f_hi = fn(lo) - target, fn(hi) - target
    if f_lo == 0.0:
        return CalibrationResult(name, lo, target, target, True)
    if f_hi == 0.0:
        return CalibrationResult(name, hi, target, target, True)
    if np.sign(f_lo) == np.sign(f_hi):
        best = lo if abs(f_lo) <= abs(f_hi) else hi
        achieved = fn(best)
        logger.warning(f"{name}: target {target} not reachable in [{lo}, {hi}], best {achieved:.4f}")
        return CalibrationResult(name, best, target, achieved, False)
    x = brentq(lambda t: fn(t) - target, lo, hi, xtol=xtol)
    achieved = fn(x)
    logger.info(f"Calibrated {name}={x:.6f} (target {target}, achieved {achieved:.6f})")
    return CalibrationResult(name, float(x), target, float(achieved), True)


def fit_white_noise(target: float, v_pbs: float = 1.0) -> CalibrationResult:
    """White-noise level per source giving a GHZ4 fidelity of ``target``."""
    return fit_parameter("white_noise", lambda lam: ghz4_fidelity(lam, v_pbs), target)


def fit_final_pair_white_noise(
    target: float,
    layout: ExperimentLayout,
    model: SourceModel,
    noise: NoiseModel,
    budget: float = 1e8,
    xtol: float = 1e-6,
) -> tuple:
    """
    White-noise level per source at which the rate-weighted final-pair
    fidelity of ``layout`` equals ``target``.

    White noise leaves every rate unchanged, so the layout is enumerated
    once and only the density-matrix chain is rerun per trial value.

    Args:
        target: fidelity to reach, e.g. a measured final-pair fidelity.
        layout, model, noise: the setting to calibrate; ``noise.white_noise``
            is the knob being fitted.
        budget: grid budget handed to run_enumerate.

    Returns:
        (CalibrationResult, NetworkRun) with the run rebuilt at the fitted value.
    """
    if not 0.0 < target <= 1.0:
        raise DomainError(f"target fidelity {target} outside (0, 1]")
    rates = run_enumerate(layout, model, noise, budget=budget, with_states=False)

    def run_at(lam: float) -> NetworkRun:
        return attach_states(rates, layout, model, replace(noise, white_noise=lam))

    result = fit_parameter("white_noise", lambda lam: run_at(lam).average_fidelity(), target, xtol=xtol)
    return result, run_at(result.value)
