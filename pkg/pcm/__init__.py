"""PCM module: click classification, state update and measurement operators."""

from .device import (
    PcmTag,
    PcmOutcome,
    Detector,
    Side,
    BELL_TAGS,
    SINGLE_TAGS,
    MASK_DETECTORS,
    classify,
    single_basis,
    outcome_for,
    mask_tag_table,
    Port,
    port_for,
    bunched_single_click,
    single_detector_probability,
    click_probabilities,
    sample_clicks,
    bell_vector,
    apply_outcome,
)
from .povm import (
    PcmPovm,
    bell_element,
    ideal_povm,
    false_bsm_rate,
)


__all__ = [
    "PcmTag",
    "PcmOutcome",
    "Detector",
    "Side",
    "BELL_TAGS",
    "SINGLE_TAGS",
    "MASK_DETECTORS",
    "classify",
    "single_basis",
    "outcome_for",
    "mask_tag_table",
    "Port",
    "port_for",
    "bunched_single_click",
    "single_detector_probability",
    "click_probabilities",
    "sample_clicks",
    "bell_vector",
    "apply_outcome",
    "PcmPovm",
    "bell_element",
    "ideal_povm",
    "false_bsm_rate",
]
