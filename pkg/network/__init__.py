"""Network module: layouts, exact and sampled runs, tables and rate laws."""

from .layout import (
    SourceSpec,
    PbsSpec,
    StationSpec,
    ArmSpec,
    NodeSpec,
    CoincidenceCondition,
    ExperimentLayout,
    BUILTIN_LAYOUTS,
    layout_all_photonic_2x2,
    layout_conventional_2x2,
    layout_to_dict,
    layout_from_dict,
    dump_layout,
    load_layout,
)
from .events import Combination, PhotonGrid, build_grid, combination_rate, combinations
from .register import ChainResult, ChainWalker
from .results import Method, RateEstimate, FinalPairRecord, NetworkRun, rate_ratio, sum_estimates
from .enumerate import run_enumerate, attach_states, condition_states, effective_model
from .sample import run_sample
from .table import TableRow, final_pair_table
from .analytics import (
    Scheme,
    rate_formula,
    ratio_theory,
    twelve_fold_state,
    twelve_fold_zbasis,
    zbasis_support,
    signal_to_noise,
)


def run_from_config(layout: ExperimentLayout, model, noise, config, method: str = "enumerate", **kwargs) -> NetworkRun:
    """Dispatch to run_enumerate or run_sample with engine settings from config."""
    if method == Method.SAMPLE.value:
        return run_sample(
            layout,
            model,
            noise,
            trials=kwargs.get("trials", config.SAMPLE_TRIALS),
            seed=kwargs.get("seed", config.SEED),
            workers=kwargs.get("workers", config.WORKERS),
            block_size=config.SAMPLE_BLOCK_SIZE,
            progress=kwargs.get("progress", False),
            with_states=kwargs.get("with_states", True),
        )
    return run_enumerate(
        layout,
        model,
        noise,
        budget=config.ENUMERATION_BUDGET,
        with_states=kwargs.get("with_states", True),
    )


__all__ = [
    "SourceSpec",
    "PbsSpec",
    "StationSpec",
    "ArmSpec",
    "NodeSpec",
    "CoincidenceCondition",
    "ExperimentLayout",
    "BUILTIN_LAYOUTS",
    "layout_all_photonic_2x2",
    "layout_conventional_2x2",
    "layout_to_dict",
    "layout_from_dict",
    "dump_layout",
    "load_layout",
    "Combination",
    "PhotonGrid",
    "build_grid",
    "combination_rate",
    "combinations",
    "ChainResult",
    "ChainWalker",
    "Method",
    "RateEstimate",
    "FinalPairRecord",
    "NetworkRun",
    "rate_ratio",
    "sum_estimates",
    "run_enumerate",
    "attach_states",
    "condition_states",
    "effective_model",
    "run_sample",
    "TableRow",
    "final_pair_table",
    "Scheme",
    "rate_formula",
    "ratio_theory",
    "twelve_fold_state",
    "twelve_fold_zbasis",
    "zbasis_support",
    "signal_to_noise",
    "run_from_config",
]
