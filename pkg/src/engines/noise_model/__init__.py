# hexinject - Noise Model Engine Package
# Biased Pauli channels and noise attachment

from .channels import (
    SINGLE,
    DOUBLE,
    SINGLE_LABELS,
    DOUBLE_LABELS,
    single_qubit_channel,
    two_qubit_channel,
    depolarizing_channel,
    channels_for,
    attach_noise,
    noise_location_count,
)

__all__ = [
    "SINGLE",
    "DOUBLE",
    "SINGLE_LABELS",
    "DOUBLE_LABELS",
    "single_qubit_channel",
    "two_qubit_channel",
    "depolarizing_channel",
    "channels_for",
    "attach_noise",
    "noise_location_count",
]
