"""
SPDC Source Model - event-level emission, loss and threshold detection.

A source fires k pairs per pulse with weight w(k). Two series are offered:

- thermal:  w(k) = p^k for 1 <= k <= max_pairs, w(0) = 1 - sum
- poisson:  w(k) ~ exp(-p) p^k / k!, truncated at max_pairs and renormalised

Every emitted photon survives (reaches its detector) independently with the
efficiency of its mode. Distinct emission patterns never interfere: a
double pair only ever adds photons, and therefore clicks.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy.stats import binom, poisson

from core.errors import DomainError


logger = logging.getLogger(__name__)

P_MAX = 0.3


class EmissionModel(Enum):
    THERMAL = "thermal"
    POISSON = "poisson"


@dataclass(frozen=True)
class SourceModel:
    """Per-source SPDC parameters shared by every source of a layout."""
    p: float = 0.0344
    max_pairs: int = 2
    pulse_rate: float = 8.0e7
    efficiency: float = 0.38
    emission: EmissionModel = EmissionModel.THERMAL

    def __post_init__(self):
        if not 0.0 <= self.p <= P_MAX:
            raise DomainError(f"down-conversion probability {self.p} outside [0, {P_MAX}]")
        if self.max_pairs not in (1, 2, 3):
            raise DomainError(f"max_pairs must be 1, 2 or 3 (got {self.max_pairs})")
        if not 0.0 <= self.efficiency <= 1.0:
            raise DomainError(f"efficiency {self.efficiency} outside [0, 1]")
        if self.pulse_rate < 0:
            raise DomainError("pulse rate must be non-negative")
        if isinstance(self.emission, str):
            object.__setattr__(self, "emission", EmissionModel(self.emission))

    def pair_weights(self) -> np.ndarray:
        return emission_weights(self)

    def truncated(self, max_pairs: int) -> "SourceModel":
        return replace(self, max_pairs=max_pairs)

    def with_p(self, p: float) -> "SourceModel":
        return replace(self, p=p)


@dataclass(frozen=True)
class EmissionPattern:
    """Number of pairs each source emitted in one pulse."""
    pairs_per_source: tuple

    @property
    def num_photons(self) -> int:
        return 2 * sum(self.pairs_per_source)


@dataclass(frozen=True)
class ClickPattern:
    """Set of detector identifiers that clicked in one pulse."""
    clicked: frozenset = field(default_factory=frozenset)

    @classmethod
    def of(cls, *detectors: str) -> "ClickPattern":
        return cls(frozenset(detectors))

    def restrict(self, detectors) -> "ClickPattern":
        return ClickPattern(self.clicked & frozenset(detectors))

    def __len__(self) -> int:
        return len(self.clicked)


def emission_weights(model: SourceModel) -> np.ndarray:
    """w(0..max_pairs) for one source; sums to 1."""
    k = np.arange(model.max_pairs + 1)
    if model.emission is EmissionModel.THERMAL:
        w = np.power(model.p, k, dtype=float)
        w[0] = 1.0 - w[1:].sum()
        if w[0] < 0:
            raise DomainError(f"p={model.p} gives negative vacuum weight")
        return w
    raw = poisson.pmf(k, model.p)
    return raw / raw.sum()


def emission_distribution(model: SourceModel, num_sources: int) -> list:
    """Every EmissionPattern with its product weight, (max_pairs+1)^num_sources entries."""
    w = emission_weights(model)
    patterns = []
    for combo in itertools.product(range(model.max_pairs + 1), repeat=num_sources):
        weight = float(np.prod([w[k] for k in combo])) if combo else 1.0
        patterns.append((EmissionPattern(tuple(combo)), weight))
    return patterns


def sample_emissions(model: SourceModel, num_sources: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` emission patterns, shape (size, num_sources)."""
    w = emission_weights(model)
    return rng.choice(len(w), size=(size, num_sources), p=w)


def survival_sample(pattern: EmissionPattern, eta: float, rng: np.random.Generator) -> np.ndarray:
    """
    Survival mask for every emitted photon, source by source, two photons per
    pair (mode a first).
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"efficiency {eta} outside [0, 1]")
    n = pattern.num_photons
    if eta >= 1.0:
        return np.ones(n, dtype=bool)
    return rng.random(n) < eta


def twofold_rate(model: SourceModel) -> float:
    """First-order coincidence rate of one EPR source (Hz)."""
    return model.pulse_rate * model.p * model.efficiency ** 2


@dataclass(frozen=True)
class SourceOutcomes:
    """
    Joint distribution of surviving photon numbers (n_a, n_b) of one source.
    ``single_pair`` is the share of each weight coming from k <= 1, i.e. the
    events whose polarization state is still a single tracked pair.
    """
    n_a: np.ndarray
    n_b: np.ndarray
    weight: np.ndarray
    single_pair: np.ndarray


def source_outcomes(model: SourceModel, eta_a: float, eta_b: float, max_pairs: Optional[int] = None) -> SourceOutcomes:
    kmax = model.max_pairs if max_pairs is None else max_pairs
    w = emission_weights(model.truncated(kmax))
    table = np.zeros((kmax + 1, kmax + 1))
    tracked = np.zeros_like(table)
    for k in range(kmax + 1):
        na = np.arange(kmax + 1)
        pa = binom.pmf(na, k, eta_a)
        pb = binom.pmf(na, k, eta_b)
        contrib = w[k] * np.outer(pa, pb)
        table += contrib
        if k <= 1:
            tracked += contrib
    na_idx, nb_idx = np.nonzero(table > 0)
    return SourceOutcomes(
        n_a=na_idx.astype(np.int16),
        n_b=nb_idx.astype(np.int16),
        weight=table[na_idx, nb_idx],
        single_pair=tracked[na_idx, nb_idx],
    )
