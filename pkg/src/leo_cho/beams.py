"""Hexagonal multi-beam layouts and the circular-aperture (Airy) gain pattern."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j1

from .errors import ConfigError
from .geometry import SPEED_OF_LIGHT, EcefVector, SatelliteState


@dataclass(frozen=True, eq=False)
class BeamLayout:
    """Boresights of one satellite in its body frame.

    Body frame: ``z`` points to nadir, ``x`` along track, ``y = z × x``.
    Row 0 of ``boresights`` is nadir.
    """

    beam_count: int
    boresights: np.ndarray
    tier_sizes: tuple[int, ...]
    beam_diameter: float
    altitude_ref: float

    def tier_angle(self, k: int) -> float:
        """Off-nadir angle of tier ``k`` in radians."""
        return math.atan(k * self.beam_diameter / self.altitude_ref)


@dataclass(frozen=True)
class AntennaPattern:
    max_gain: float = 30.5
    aperture_radius: float = 0.1
    carrier_frequency: float = 20.0  # GHz
    # dB relative to max_gain; None keeps the nulls, which is where most
    # radio link failures come from.
    gain_floor: float | None = None

    def __post_init__(self) -> None:
        if self.ka <= 0:
            raise ValueError("wave number times aperture radius must be positive")
        if not math.isfinite(self.max_gain):
            raise ValueError("max_gain must be finite")
        if self.gain_floor is not None and not self.gain_floor <= 0:
            raise ValueError("gain_floor is relative to max_gain and must be <= 0")

    @property
    def wave_number(self) -> float:
        return 2.0 * math.pi * self.carrier_frequency * 1e9 / SPEED_OF_LIGHT

    @property
    def ka(self) -> float:
        return self.wave_number * self.aperture_radius


def tiers_for(beam_count: int) -> int:
    """Number of rings around the centre beam, or raise for non-hexagonal counts."""
    k, total = 0, 1
    while total < beam_count:
        k += 1
        total += 6 * k
    if total != beam_count:
        raise ConfigError([f"beam_count {beam_count} is not a centred hexagonal number"])
    return k


def generate_beam_layout(beam_count: int, beam_diameter: float, altitude: float) -> BeamLayout:
    tiers = tiers_for(beam_count)
    sizes = [1] + [6 * k for k in range(1, tiers + 1)]
    rows = [np.array([0.0, 0.0, 1.0])]
    for k in range(1, tiers + 1):
        alpha = math.atan(k * beam_diameter / altitude)
        az = 2.0 * math.pi * np.arange(6 * k) / (6 * k)
        ring = np.stack(
            [
                math.sin(alpha) * np.cos(az),
                math.sin(alpha) * np.sin(az),
                np.full(az.shape, math.cos(alpha)),
            ],
            axis=1,
        )
        rows.extend(ring)
    return BeamLayout(beam_count, np.array(rows), tuple(sizes), beam_diameter, altitude)


def body_frame(position: EcefVector, along_track: EcefVector) -> np.ndarray:
    """3x3 matrix whose columns are the body axes (x, y, z) in ECEF."""
    z = -position / np.linalg.norm(position)
    x = along_track - np.dot(along_track, z) * z
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def off_boresight_angles(
    position: EcefVector, along_track: EcefVector, layout: BeamLayout, ue: EcefVector
) -> np.ndarray:
    """Angle (radians) between every beam boresight and the satellite→UE line."""
    los = ue - position
    los = los / np.linalg.norm(los)
    # Express the line of sight in body coordinates instead of rotating every boresight.
    los_body = body_frame(position, along_track).T @ los
    return np.arccos(np.clip(layout.boresights @ los_body, -1.0, 1.0))


def off_boresight_angle(
    sat: SatelliteState, beam_index: int, layout: BeamLayout, ue: EcefVector
) -> float:
    return float(off_boresight_angles(sat.position, sat.along_track, layout, ue)[beam_index])


def relative_gain_db(alpha, pattern: AntennaPattern):
    """Unclamped Airy pattern ``10 log10(4 |J1(x)/x|^2)``, ``x = κ a sin α``.

    Exactly 0 dB at boresight; ``-inf`` on the nulls.
    """
    x = pattern.ka * np.abs(np.sin(np.asarray(alpha, dtype=float)))
    with np.errstate(divide="ignore", invalid="ignore"):
        # Series J1(x)/x = 1/2 - x^2/16 avoids 0/0 and underflow near boresight.
        small = x < 1e-6
        ratio = np.where(small, 0.5 - x * x / 16.0, j1(x) / np.where(small, 1.0, x))
        out = 10.0 * np.log10(4.0 * ratio * ratio)
    return out if out.ndim else float(out)


def tx_gain(alpha, pattern: AntennaPattern):
    """Transmit gain in dBi, floored at ``max_gain + gain_floor`` when a floor is set."""
    rel = relative_gain_db(alpha, pattern)
    if pattern.gain_floor is not None:
        rel = np.maximum(rel, pattern.gain_floor)
    out = pattern.max_gain + rel
    return out if np.ndim(out) else float(out)
