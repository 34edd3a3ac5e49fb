"""Sources module: SPDC emission, loss and twofold-rate model."""

from .spdc import (
    EmissionModel,
    SourceModel,
    EmissionPattern,
    ClickPattern,
    SourceOutcomes,
    emission_weights,
    emission_distribution,
    sample_emissions,
    survival_sample,
    source_outcomes,
    twofold_rate,
)


def create_source_model_from_config(config) -> SourceModel:
    """Factory function to create a SourceModel from config object."""
    return SourceModel(
        p=config.DOWN_CONVERSION_P,
        max_pairs=config.MAX_PAIRS,
        pulse_rate=config.PULSE_RATE_HZ,
        efficiency=config.SYSTEM_EFFICIENCY,
        emission=EmissionModel(config.EMISSION_MODEL),
    )


__all__ = [
    "EmissionModel",
    "SourceModel",
    "EmissionPattern",
    "ClickPattern",
    "SourceOutcomes",
    "emission_weights",
    "emission_distribution",
    "sample_emissions",
    "survival_sample",
    "source_outcomes",
    "twofold_rate",
    "create_source_model_from_config",
]
