"""Optics module: wave plates, PBS post-selection and the CPBS."""

from .elements import (
    PlateKind,
    WavePlate,
    waveplate_matrix,
    PbsGate,
    CpbsDevice,
    BranchLabel,
    Branch,
    cpbs_bra,
    pbs_postselect,
    cpbs_apply,
    HWP_22_5,
    PARITY_PROJECTOR,
)

__all__ = [
    "PlateKind",
    "WavePlate",
    "waveplate_matrix",
    "PbsGate",
    "CpbsDevice",
    "BranchLabel",
    "Branch",
    "cpbs_bra",
    "pbs_postselect",
    "cpbs_apply",
    "HWP_22_5",
    "PARITY_PROJECTOR",
]
