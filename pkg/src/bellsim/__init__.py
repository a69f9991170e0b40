"""Desk-scale simulator and analysis toolkit for an atom-photon CHSH experiment."""

__version__ = "0.1.0"

from .states import (  # noqa: F401
    ATOM,
    PHOTON,
    BellAngles,
    DensityMatrix,
    MeasurementSetting,
    OutcomeFractions,
    TwoQubitState,
    bell_pair_ideal,
    bell_signal,
    chsh_operator,
    correlation,
    densify,
    fidelity,
    outcome_probabilities,
    rotate,
    werner,
)
