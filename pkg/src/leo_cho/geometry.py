"""Spherical-Earth geometry and Walker-delta constellation propagation.

Angles are degrees at every public interface and radians internally.
Positions are Earth-centred Earth-fixed (ECEF) metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS = 6_371_000.0
EARTH_ROTATION_RATE = 7.2921159e-5
GRAVITATIONAL_PARAMETER = 3.986004418e14
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class GeodeticPosition:
    """Latitude/longitude in degrees, altitude in metres above the sphere."""

    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if self.altitude < 0:
            raise ValueError(f"altitude {self.altitude} is negative")
        lon = (self.longitude + 180.0) % 360.0 - 180.0
        if lon == -180.0:
            lon = 180.0
        object.__setattr__(self, "longitude", lon)


# A plain (3,) float array; kept as an alias so signatures read like the domain.
EcefVector = np.ndarray


@dataclass(frozen=True)
class ConstellationSpec:
    plane_count: int = 72
    sats_per_plane: int = 22
    altitude: float = 550_000.0
    inclination: float = 53.0
    phasing_factor: int = 0
    raan0: float = 0.0
    epoch_offset: float = 0.0
    earth_radius: float = EARTH_RADIUS
    earth_rotation_rate: float = EARTH_ROTATION_RATE
    gravitational_parameter: float = GRAVITATIONAL_PARAMETER

    def __post_init__(self) -> None:
        if self.plane_count < 1 or self.sats_per_plane < 1:
            raise ValueError("plane_count and sats_per_plane must be positive")
        if not 0 <= self.phasing_factor < self.plane_count:
            raise ValueError("phasing_factor must lie in [0, plane_count)")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")

    @property
    def total(self) -> int:
        return self.plane_count * self.sats_per_plane

    @property
    def orbit_radius(self) -> float:
        return self.earth_radius + self.altitude

    @property
    def period(self) -> float:
        """Orbital period in seconds (Kepler's third law)."""
        return 2.0 * math.pi * math.sqrt(self.orbit_radius**3 / self.gravitational_parameter)


@dataclass(frozen=True)
class StaticConstellation:
    """Satellites pinned in the Earth-fixed frame.

    A test double for the propagator: positions never change, and the
    along-track reference of every satellite is local east.
    """

    positions: tuple[GeodeticPosition, ...]
    earth_radius: float = EARTH_RADIUS

    @property
    def total(self) -> int:
        return len(self.positions)


@dataclass(frozen=True, eq=False)
class SatelliteState:
    sat_id: int
    position: EcefVector = field(repr=False)
    plane_index: int
    slot_index: int
    # Unit vector used as the body-frame azimuth reference for beam layouts.
    along_track: EcefVector = field(repr=False, default=None)  # type: ignore[assignment]


def geodetic_to_ecef(p: GeodeticPosition, earth_radius: float = EARTH_RADIUS) -> EcefVector:
    lat = math.radians(p.latitude)
    lon = math.radians(p.longitude)
    r = earth_radius + p.altitude
    return np.array(
        [r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat)]
    )


def ecef_to_geodetic(v: EcefVector) -> tuple[float, float, float]:
    """Inverse of :func:`geodetic_to_ecef` for the spherical model.

    Returns ``(latitude_deg, longitude_deg, radius_m)``.
    """
    x, y, z = (float(c) for c in v)
    r = math.sqrt(x * x + y * y + z * z)
    return math.degrees(math.asin(z / r)), math.degrees(math.atan2(y, x)), r


def propagate_arrays(
    spec: ConstellationSpec | StaticConstellation, time_s: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised propagation: ``(positions, along_track)``, both ``(S, 3)``.

    Satellite ``s`` lives in plane ``s // sats_per_plane`` at in-plane slot
    ``s % sats_per_plane``.
    """
    if isinstance(spec, StaticConstellation):
        pos = np.array([geodetic_to_ecef(p, spec.earth_radius) for p in spec.positions])
        lon = np.radians([p.longitude for p in spec.positions])
        east = np.stack([-np.sin(lon), np.cos(lon), np.zeros_like(lon)], axis=1)
        return pos.reshape(-1, 3), east.reshape(-1, 3)

    planes = np.repeat(np.arange(spec.plane_count), spec.sats_per_plane)
    slots = np.tile(np.arange(spec.sats_per_plane), spec.plane_count)
    raan = np.radians(spec.raan0 + planes * 360.0 / spec.plane_count)
    mean_motion = 2.0 * math.pi / spec.period
    u = (
        np.radians(
            slots * 360.0 / spec.sats_per_plane
            + planes * spec.phasing_factor * 360.0 / spec.total
        )
        + mean_motion * time_s
    )
    inc = math.radians(spec.inclination)
    a = spec.orbit_radius
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)

    x = a * (co * cu - so * su * ci)
    y = a * (so * cu + co * su * ci)
    z = a * su * si
    vx = -co * su - so * cu * ci
    vy = -so * su + co * cu * ci
    vz = cu * si

    theta = spec.earth_rotation_rate * time_s
    ct, st = math.cos(theta), math.sin(theta)
    pos = np.stack([x * ct + y * st, -x * st + y * ct, z], axis=1)
    vel = np.stack([vx * ct + vy * st, -vx * st + vy * ct, vz], axis=1)
    return pos, vel


def propagate_constellation(
    spec: ConstellationSpec | StaticConstellation, t: int, dt: float
) -> list[SatelliteState]:
    """States of every satellite at slot ``t`` (elapsed ``t*dt + epoch_offset`` s)."""
    if t < 0:
        raise ValueError("slot index must be non-negative")
    epoch = getattr(spec, "epoch_offset", 0.0)
    pos, vel = propagate_arrays(spec, t * dt + epoch)
    per_plane = getattr(spec, "sats_per_plane", 1)
    return [
        SatelliteState(s, pos[s], s // per_plane, s % per_plane, vel[s])
        for s in range(pos.shape[0])
    ]


def elevation_angle(ground: EcefVector, sat: EcefVector) -> float:
    return float(elevation_angles(ground, np.asarray(sat, dtype=float)[None, :])[0])


def elevation_angles(ground: EcefVector, sats: np.ndarray) -> np.ndarray:
    """Elevation in degrees of every row of ``sats`` seen from ``ground``."""
    up = ground / np.linalg.norm(ground)
    los = sats - ground
    # atan2 of the vertical and horizontal parts stays well conditioned at zenith.
    vertical = los @ up
    horizontal = np.linalg.norm(los - vertical[:, None] * up, axis=1)
    return np.degrees(np.arctan2(vertical, horizontal))


def slant_range(ground: EcefVector, sat: EcefVector) -> float:
    return float(np.linalg.norm(np.asarray(sat) - np.asarray(ground)))


def ground_distance(
    a: GeodeticPosition, b: GeodeticPosition, earth_radius: float = EARTH_RADIUS
) -> float:
    """Great-circle (haversine) distance in metres."""
    la1, la2 = math.radians(a.latitude), math.radians(b.latitude)
    dlat = la2 - la1
    dlon = math.radians(b.longitude - a.longitude)
    h = math.sin(dlat / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin(dlon / 2) ** 2
    return 2.0 * earth_radius * math.asin(min(1.0, math.sqrt(h)))
