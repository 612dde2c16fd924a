"""Per-slot visibility, feeder-link association and best-beam selection."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .beams import AntennaPattern, BeamLayout, off_boresight_angles
from .geometry import (
    EARTH_RADIUS,
    EcefVector,
    GeodeticPosition,
    SatelliteState,
    elevation_angles,
    geodetic_to_ecef,
)
from .linkbudget import RadioSpec, RsrpSample, rsrp


@dataclass(frozen=True)
class GroundStation:
    gs_id: int
    position: GeodeticPosition
    hosts_core: bool = False
    feeder_capacity: int = 2

    def __post_init__(self) -> None:
        if self.gs_id < 1:
            raise ValueError("gs_id must be >= 1 (0 means 'unassociated')")
        if self.feeder_capacity < 1:
            raise ValueError("feeder_capacity must be >= 1")

    def ecef(self, earth_radius: float = EARTH_RADIUS) -> EcefVector:
        return geodetic_to_ecef(self.position, earth_radius)


@dataclass(frozen=True)
class VisibilityConfig:
    ue_min_elevation: float = 10.0
    gs_min_elevation: float = 5.0

    def __post_init__(self) -> None:
        for name in ("ue_min_elevation", "gs_min_elevation"):
            v = getattr(self, name)
            if not 0.0 <= v < 90.0:
                raise ValueError(f"{name} must lie in [0, 90), got {v}")


@dataclass(frozen=True)
class FeederAssociation:
    """Satellite → GS map. Satellites absent from ``links`` are unassociated (0)."""

    links: Mapping[int, int] = field(default_factory=dict)

    def gs_of(self, sat_id: int) -> int:
        return self.links.get(sat_id, 0)

    def load(self) -> Counter:
        return Counter(self.links.values())


@dataclass(frozen=True)
class CandidateSet:
    t: int
    sat_ids: tuple[int, ...]

    def __contains__(self, sat_id: object) -> bool:
        return sat_id in self.sat_ids

    def __len__(self) -> int:
        return len(self.sat_ids)


def _gs_elevations(
    states: Sequence[SatelliteState], gss: Sequence[GroundStation], earth_radius: float
) -> np.ndarray:
    if not states:
        return np.empty((0, len(gss)))
    pos = np.array([s.position for s in states])
    return np.column_stack([elevation_angles(g.ecef(earth_radius), pos) for g in gss])


def associate_feeder_links(
    states: Sequence[SatelliteState],
    gss: Sequence[GroundStation],
    cfg: VisibilityConfig,
    prev: FeederAssociation | None = None,
    ue: EcefVector | None = None,
    earth_radius: float = EARTH_RADIUS,
) -> FeederAssociation:
    """Greedy highest-elevation feeder assignment with capacity limits.

    A satellite keeps its previous GS while that GS still sees it above
    ``gs_min_elevation``. Remaining satellites are served in descending
    order of their best GS elevation (ties by ``sat_id``) and take the
    highest-elevation GS that still has spare capacity.

    When ``ue`` is given only satellites the UE sees at or above
    ``ue_min_elevation`` take part; a satellite leaving UE visibility
    releases its feeder slot.
    """
    prev = prev or FeederAssociation()
    pool = list(states)
    if ue is not None and pool:
        el = elevation_angles(ue, np.array([s.position for s in pool]))
        pool = [s for s, e in zip(pool, el) if e >= cfg.ue_min_elevation]
    beta = _gs_elevations(pool, gss, earth_radius)
    col = {g.gs_id: c for c, g in enumerate(gss)}
    cap = {g.gs_id: g.feeder_capacity for g in gss}

    links: dict[int, int] = {}
    load: Counter = Counter()
    rows = sorted(range(len(pool)), key=lambda r: pool[r].sat_id)
    for r in rows:
        g = prev.gs_of(pool[r].sat_id)
        if g in col and beta[r, col[g]] >= cfg.gs_min_elevation and load[g] < cap[g]:
            links[pool[r].sat_id] = g
            load[g] += 1

    newcomers = [r for r in rows if pool[r].sat_id not in links]
    newcomers.sort(key=lambda r: (-float(beta[r].max()) if len(gss) else 0.0, pool[r].sat_id))
    for r in newcomers:
        ranked = sorted(gss, key=lambda g: (-beta[r, col[g.gs_id]], g.gs_id))
        for g in ranked:
            if beta[r, col[g.gs_id]] < cfg.gs_min_elevation:
                break
            if load[g.gs_id] < cap[g.gs_id]:
                links[pool[r].sat_id] = g.gs_id
                load[g.gs_id] += 1
                break
    return FeederAssociation(dict(sorted(links.items())))


def candidate_satellites(
    states: Sequence[SatelliteState],
    ue: EcefVector,
    gss: Sequence[GroundStation],
    cfg: VisibilityConfig,
    assoc: FeederAssociation,
    t: int = 0,
    earth_radius: float = EARTH_RADIUS,
) -> CandidateSet:
    """Satellites above the UE elevation mask whose own feeder GS sees them."""
    linked = [s for s in states if assoc.gs_of(s.sat_id) != 0]
    if not linked:
        return CandidateSet(t, ())
    theta = elevation_angles(ue, np.array([s.position for s in linked]))
    by_id = {g.gs_id: g for g in gss}
    members = []
    for s, th in zip(linked, theta):
        if th < cfg.ue_min_elevation:
            continue
        gs = by_id.get(assoc.gs_of(s.sat_id))
        if gs is None:
            continue
        beta = elevation_angles(gs.ecef(earth_radius), s.position[None, :])[0]
        if beta >= cfg.gs_min_elevation:
            members.append(s.sat_id)
    return CandidateSet(t, tuple(sorted(members)))


def beam_powers(
    state: SatelliteState,
    layout: BeamLayout,
    radio: RadioSpec,
    pattern: AntennaPattern,
    ue: EcefVector,
) -> np.ndarray:
    """RSRP (dBm) of every beam of one satellite at the UE."""
    alpha = off_boresight_angles(state.position, state.along_track, layout, ue)
    d = float(np.linalg.norm(state.position - ue))
    return np.atleast_1d(rsrp(radio, pattern, alpha, d))


def best_beam(
    candidates: CandidateSet | Iterable[int],
    states: Mapping[int, SatelliteState] | Sequence[SatelliteState],
    layout: BeamLayout,
    radio: RadioSpec,
    pattern: AntennaPattern,
    ue: EcefVector,
    powers: Mapping[int, np.ndarray] | None = None,
) -> RsrpSample | None:
    """Strongest (satellite, beam) over the candidate set; ties go to the lower ids.

    ``powers`` may carry precomputed per-beam RSRP arrays keyed by satellite.
    """
    ids = candidates.sat_ids if isinstance(candidates, CandidateSet) else tuple(candidates)
    if not isinstance(states, Mapping):
        states = {s.sat_id: s for s in states}
    best: RsrpSample | None = None
    for sid in sorted(ids):
        p = powers[sid] if powers is not None else beam_powers(states[sid], layout, radio, pattern, ue)
        i = int(np.argmax(p))  # first maximum = lowest beam id
        if best is None or p[i] > best.power:
            best = RsrpSample(sid, i, float(p[i]))
    return best
