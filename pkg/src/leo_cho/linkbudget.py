"""Free-space path loss and RSRP under clear-sky line-of-sight conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beams import AntennaPattern, tx_gain


@dataclass(frozen=True)
class RadioSpec:
    tx_power: float = 23.0  # dBW
    rx_gain: float = 39.7  # dBi
    carrier_frequency: float = 20.0  # GHz
    rlf_threshold: float = -120.0  # dBm
    # Lumped gas, scintillation, shadowing, clutter and penetration losses.
    extra_loss_db: float = 0.0

    def __post_init__(self) -> None:
        if self.carrier_frequency <= 0:
            raise ValueError("carrier_frequency must be positive")


@dataclass(frozen=True)
class RsrpSample:
    sat_id: int
    beam_id: int
    power: float  # dBm

    @property
    def identity(self) -> tuple[int, int]:
        return (self.sat_id, self.beam_id)


def fspl(f_c: float, d: float) -> float:
    """Free-space path loss in dB; ``f_c`` in GHz, ``d`` in metres."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if f_c <= 0:
        raise ValueError(f"frequency must be positive, got {f_c}")
    return 32.45 + 20.0 * math.log10(f_c) + 20.0 * math.log10(d)


def path_loss(radio: RadioSpec, d: float) -> float:
    return fspl(radio.carrier_frequency, d) + radio.extra_loss_db


def rsrp(radio: RadioSpec, pattern: AntennaPattern, alpha, d: float):
    """Received power in dBm for off-boresight angle(s) ``alpha`` at range ``d``.

    ``alpha`` may be an array (one entry per beam); the result then matches it.
    """
    dbw = radio.tx_power + tx_gain(alpha, pattern) + radio.rx_gain - path_loss(radio, d)
    out = np.asarray(dbw) + 30.0
    return out if out.ndim else float(out)
