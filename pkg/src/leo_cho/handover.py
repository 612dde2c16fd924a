"""Conditional-handover state machine: HOM/TTT triggering, RLF and scenario labels."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Mapping, Sequence

from .errors import ConfigError, SimulationError
from .geometry import EARTH_RADIUS, ground_distance
from .linkbudget import RsrpSample
from .topology import FeederAssociation, GroundStation

Beam = tuple[int, int]  # (sat_id, beam_id)

# Absorbs float drift in the seconds-valued timer (e.g. 0.3 - 3*0.1 != 0).
_TIMER_EPS = 1e-9


@dataclass(frozen=True)
class HoParams:
    ttt: float = 0.0  # seconds
    hom: float = 0.0  # dB
    # Restart the TTT timer whenever the strongest neighbour changes identity.
    # Off by default: the timer tracks how long *some* neighbour has beaten
    # the serving beam, and the HO goes to whichever is strongest when it fires.
    reset_on_target_change: bool = False

    def __post_init__(self) -> None:
        for name in ("ttt", "hom"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


class MobilityScenario(IntEnum):
    A = 1
    B1 = 2
    C1 = 3
    C2 = 4


@dataclass(frozen=True)
class ServingState:
    serving: Beam | None
    timer: float
    timer_target: Beam | None = None
    last_ho_time: int | None = None
    previous_serving: Beam | None = None


@dataclass(frozen=True)
class HoEvent:
    t: int
    source: Beam
    target: Beam
    scenario: MobilityScenario | None = None
    cho_delay: float = 0.0

    @property
    def is_intra(self) -> bool:
        return self.source[0] == self.target[0]


@dataclass(frozen=True)
class SlotIndicators:
    t: int
    u: int
    r: int


def initialize_serving(first_best: RsrpSample | None, params: HoParams) -> ServingState:
    """Attach to the strongest beam of the first slot. No handover is charged."""
    if first_best is None:
        raise ConfigError(["no candidate satellite at the first slot; cannot attach the UE"])
    return ServingState(serving=first_best.identity, timer=params.ttt)


def step(
    state: ServingState,
    t: int,
    best: RsrpSample | None,
    serving_power: float,
    params: HoParams,
    dt: float,
    rlf_threshold: float = -120.0,
) -> tuple[ServingState, SlotIndicators, HoEvent | None]:
    """Advance the serving state by one slot.

    ``serving_power`` is the serving beam's RSRP at ``t`` (``-inf`` once the
    serving satellite can no longer be measured). The RLF indicator uses
    this power, i.e. the power *before* any handover fired in this slot.
    """
    if state.serving is None:
        raise SimulationError("step() called before initialize_serving()")
    r = 1 if serving_power >= rlf_threshold else 0

    triggered = (
        best is not None
        and best.identity != state.serving
        and best.power > serving_power + params.hom
    )
    if not triggered:
        new = replace(state, timer=params.ttt, timer_target=None)
        return new, SlotIndicators(t, 0, r), None

    z, target = state.timer, state.timer_target
    if target != best.identity and (params.reset_on_target_change or target is None):
        z = params.ttt
    target = best.identity
    z -= dt
    if z < -_TIMER_EPS:
        event = HoEvent(t, state.serving, best.identity)
        new = ServingState(
            serving=best.identity,
            timer=params.ttt,
            timer_target=None,
            last_ho_time=t,
            previous_serving=state.serving,
        )
        return new, SlotIndicators(t, 1, r), event
    return replace(state, timer=z, timer_target=target), SlotIndicators(t, 0, r), None


def classify_scenario(
    source_sat: int,
    target_sat: int,
    assoc: FeederAssociation,
    anchor_gs: int,
    last_known: Mapping[int, int] | None = None,
    warnings: Counter | None = None,
) -> MobilityScenario:
    """Label a handover A / B1 / C1 / C2.

    Unassociated satellites fall back to ``last_known`` and bump
    ``warnings["unassociated_at_handover"]``.
    """
    if source_sat == target_sat:
        return MobilityScenario.A

    def gs(sat: int) -> int:
        g = assoc.gs_of(sat)
        if g == 0:
            if warnings is not None:
                warnings["unassociated_at_handover"] += 1
            g = (last_known or {}).get(sat, 0)
        return g

    g_src, g_tgt = gs(source_sat), gs(target_sat)
    if g_src == g_tgt:
        return MobilityScenario.B1
    if g_src == anchor_gs:
        return MobilityScenario.C1
    return MobilityScenario.C2


def select_anchor(
    gss: Sequence[GroundStation], first_serving_gs: int, earth_radius: float = EARTH_RADIUS
) -> int:
    """Core-hosting GS closest (great circle) to the UE's first serving GS."""
    hosts = [g for g in gss if g.hosts_core]
    if not hosts:
        raise ConfigError(["no ground station hosts the core (AMF/UPF)"])
    by_id = {g.gs_id: g for g in gss}
    if first_serving_gs not in by_id:
        raise SimulationError(f"first serving GS {first_serving_gs} is not a known station")
    origin = by_id[first_serving_gs].position
    return min(hosts, key=lambda g: (ground_distance(origin, g.position, earth_radius), g.gs_id)).gs_id
