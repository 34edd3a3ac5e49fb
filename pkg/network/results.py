"""
Network run results: rate estimates, final-pair records and their ratio.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from core.errors import DomainError
from core.states import DensityMatrix, PHI_PLUS, fidelity


logger = logging.getLogger(__name__)


class Method(Enum):
    ENUMERATE = "enumerate"
    SAMPLE = "sample"


@dataclass(frozen=True)
class RateEstimate:
    """Per-pulse probability with its statistical error (zero when exact)."""
    value: float
    std_error: float = 0.0
    trials_or_weight: float = 0.0
    method: Method = Method.ENUMERATE

    def __post_init__(self):
        if self.value < 0 or self.std_error < 0:
            raise DomainError(f"negative rate estimate {self.value} +/- {self.std_error}")
        if self.method is Method.ENUMERATE and self.std_error != 0.0:
            raise DomainError("exact estimates carry no standard error")

    def per_second(self, pulse_rate: float) -> float:
        return self.value * pulse_rate

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "trials_or_weight": self.trials_or_weight,
            "method": self.method.value,
        }


def sum_estimates(estimates, method: Method) -> RateEstimate:
    """Sum of independent estimates; errors add in quadrature."""
    estimates = list(estimates)
    value = float(sum(e.value for e in estimates))
    se = float(np.sqrt(sum(e.std_error ** 2 for e in estimates))) if method is Method.SAMPLE else 0.0
    trials = float(sum(e.trials_or_weight for e in estimates))
    return RateEstimate(value, se, trials, method)


def rate_ratio(a: RateEstimate, b: RateEstimate) -> RateEstimate:
    """a / b with a delta-method standard error."""
    if b.value <= 0:
        raise DomainError("ratio denominator has zero rate")
    r = a.value / b.value
    if a.method is Method.ENUMERATE and b.method is Method.ENUMERATE:
        return RateEstimate(r, 0.0, a.trials_or_weight, Method.ENUMERATE)
    rel_a = a.std_error / a.value if a.value > 0 else 0.0
    rel_b = b.std_error / b.value
    se = abs(r) * float(np.hypot(rel_a, rel_b))
    return RateEstimate(r, se, min(a.trials_or_weight, b.trials_or_weight), Method.SAMPLE)


@dataclass
class FinalPairRecord:
    """
    Post-selected state of the final pair for one outcome combination.
    ``contamination`` is the weight of multi-pair pulses, which enters the
    state as white noise.
    """
    condition: str
    key: str
    outcomes: dict  # station id -> PcmOutcome
    pair: tuple
    state: Optional[DensityMatrix]
    rate: RateEstimate
    tracked_weight: float = 0.0
    contamination: float = 0.0
    corrections: tuple = ()

    def fidelity(self) -> float:
        return fidelity(self.state, PHI_PLUS) if self.state is not None else 0.0

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "outcomes": {k: v.tag.value for k, v in self.outcomes.items()},
            "pair": list(self.pair),
            "corrections": list(self.corrections),
            "rate": self.rate.to_dict(),
            "tracked_weight": self.tracked_weight,
            "contamination": self.contamination,
            "fidelity": self.fidelity(),
        }


@dataclass
class NetworkRun:
    layout: str
    method: Method
    condition_rates: dict  # condition name -> RateEstimate
    combo_rates: dict  # combination key -> RateEstimate
    records: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def total(self) -> RateEstimate:
        return sum_estimates(self.condition_rates.values(), self.method)

    def pair_rates(self) -> dict:
        """(condition, pair) -> summed RateEstimate."""
        groups = {}
        for rec in self.records:
            groups.setdefault((rec.condition, rec.pair), []).append(rec.rate)
        return {k: sum_estimates(v, self.method) for k, v in groups.items()}

    def pair_fidelity(self, pair: tuple) -> float:
        """Rate-weighted fidelity of every record ending on ``pair``."""
        num = den = 0.0
        for rec in self.records:
            if rec.pair == pair and rec.state is not None:
                num += rec.rate.value * rec.fidelity()
                den += rec.rate.value
        return num / den if den > 0 else 0.0

    def average_fidelity(self) -> float:
        """Rate-weighted fidelity over every record with a state."""
        num = den = 0.0
        for rec in self.records:
            if rec.state is not None:
                num += rec.rate.value * rec.fidelity()
                den += rec.rate.value
        return num / den if den > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "layout": self.layout,
            "method": self.method.value,
            "total": self.total().to_dict(),
            "conditions": {k: v.to_dict() for k, v in self.condition_rates.items()},
            "records": [r.to_dict() for r in self.records],
            "diagnostics": self.diagnostics,
        }
