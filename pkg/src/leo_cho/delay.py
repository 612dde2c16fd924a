"""CHO delay per functional split and mobility scenario.

The message counts per (split, scenario) are configuration, not physics:
the shipped table is calibrated so that at a reference geometry the
totals land near published snapshot delays (gNB intra ≈ 52 ms,
split 7.2x intra ≈ 97 ms, gNB inter 173-189 ms, split 7.2x up to 219 ms).

For a given inter-satellite scenario the two ground-hosted splits carry the
same ISL and IGSL message counts as the onboard gNB plus extra feeder-link
signalling, so their excess over the gNB does not hinge on where the
satellites happen to be.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping, NamedTuple

import numpy as np

from .errors import ConfigError
from .geometry import EARTH_RADIUS, SPEED_OF_LIGHT, EcefVector, ground_distance
from .handover import MobilityScenario
from .topology import GroundStation


class FunctionalSplit(IntEnum):
    split7_2x = 1
    split2 = 2
    gnb = 3


@dataclass(frozen=True)
class DelayConstants:
    sync: float = 0.020
    core: float = 0.050
    ppm: float = 0.001
    # Multiplies the great-circle IGSL distance (1.0 = vacuum, straight line).
    igsl_factor: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sync", "core", "ppm", "igsl_factor"):
            if getattr(self, name) < 0:
                raise ValueError(f"delay constant {name} must be non-negative")


class LinkCounts(NamedTuple):
    fl: int
    sl: int
    isl: int
    igsl: int


MessageCounts = Mapping[tuple[FunctionalSplit, MobilityScenario], LinkCounts]


class LinkDelays(NamedTuple):
    fl: float
    sl: float
    isl: float
    igsl: float


_S, _Q = FunctionalSplit, MobilityScenario

DEFAULT_COUNTS: dict[tuple[FunctionalSplit, MobilityScenario], LinkCounts] = {
    (_S.split7_2x, _Q.A): LinkCounts(11, 11, 0, 0),
    (_S.split7_2x, _Q.B1): LinkCounts(23, 11, 10, 0),
    (_S.split7_2x, _Q.C1): LinkCounts(23, 11, 10, 4),
    (_S.split7_2x, _Q.C2): LinkCounts(23, 11, 10, 6),
    (_S.split2, _Q.A): LinkCounts(4, 11, 0, 0),
    (_S.split2, _Q.B1): LinkCounts(20, 11, 10, 0),
    (_S.split2, _Q.C1): LinkCounts(20, 11, 10, 4),
    (_S.split2, _Q.C2): LinkCounts(20, 11, 10, 6),
    (_S.gnb, _Q.A): LinkCounts(0, 11, 0, 0),
    (_S.gnb, _Q.B1): LinkCounts(4, 11, 10, 0),
    (_S.gnb, _Q.C1): LinkCounts(4, 11, 10, 4),
    (_S.gnb, _Q.C2): LinkCounts(4, 11, 10, 6),
}


def check_counts(counts: MessageCounts) -> None:
    problems = []
    for f in FunctionalSplit:
        for q in MobilityScenario:
            entry = counts.get((f, q))
            if entry is None:
                problems.append(f"delay table missing entry ({f.name}, {q.name})")
            elif any(n < 0 for n in entry):
                problems.append(f"delay table entry ({f.name}, {q.name}) has a negative count")
    if problems:
        raise ConfigError(problems)


def link_delays(
    ue: EcefVector,
    serving_sat: EcefVector,
    target_sat: EcefVector,
    serving_gs: GroundStation | None,
    target_gs: GroundStation | None,
    same_satellite: bool,
    consts: DelayConstants = DelayConstants(),
    earth_radius: float = EARTH_RADIUS,
) -> LinkDelays:
    """One-way propagation delays (s) of the four link types at the HO slot."""
    c = SPEED_OF_LIGHT
    sl = float(np.linalg.norm(serving_sat - ue)) / c
    fl = 0.0
    if serving_gs is not None:
        fl = float(np.linalg.norm(serving_sat - serving_gs.ecef(earth_radius))) / c
    isl = 0.0 if same_satellite else float(np.linalg.norm(target_sat - serving_sat)) / c
    igsl = 0.0
    if serving_gs is not None and target_gs is not None and serving_gs.gs_id != target_gs.gs_id:
        dist = ground_distance(serving_gs.position, target_gs.position, earth_radius)
        igsl = consts.igsl_factor * dist / c
    return LinkDelays(fl, sl, isl, igsl)


def cho_delay(
    f: FunctionalSplit,
    q: MobilityScenario,
    counts: MessageCounts,
    consts: DelayConstants,
    links: LinkDelays,
) -> float:
    try:
        n = counts[(f, q)]
    except KeyError:
        raise ConfigError([f"delay table missing entry ({f.name}, {q.name})"]) from None
    core = consts.core if (f == FunctionalSplit.gnb and q != MobilityScenario.A) else 0.0
    proc = (n.fl + n.sl + n.isl + n.igsl) * consts.ppm
    prop = n.fl * links.fl + n.sl * links.sl + n.isl * links.isl + n.igsl * links.igsl
    return consts.sync + core + proc + prop
