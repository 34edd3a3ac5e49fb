"""Noise module: imperfection knobs and the visibility / white-noise channels."""

from .model import (
    NoiseModel,
    MixedBranch,
    PBS_POINT,
    apply_visibility,
    pbs_channel,
    cpbs_branches,
    werner_pair,
    depolarize,
)


def create_noise_model_from_config(config) -> NoiseModel:
    """Factory function to create a NoiseModel from config object."""
    return NoiseModel(
        efficiency=config.SYSTEM_EFFICIENCY,
        ghz_lossless=config.GHZ_LOSSLESS,
        pcm_visibility=config.PCM_VISIBILITY,
        pbs_visibility=config.PBS_VISIBILITY,
        white_noise=config.WHITE_NOISE,
        include_multi_pair=config.INCLUDE_MULTI_PAIR,
    )


__all__ = [
    "NoiseModel",
    "MixedBranch",
    "PBS_POINT",
    "apply_visibility",
    "pbs_channel",
    "cpbs_branches",
    "werner_pair",
    "depolarize",
    "create_noise_model_from_config",
]
