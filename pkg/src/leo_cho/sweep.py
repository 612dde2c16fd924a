"""Single-run simulation loop and the exhaustive TTT x HOM search.

The radio geometry of a run (orbits, feeder links, candidate sets and the
best beam of every slot) does not depend on the functional split or on
the handover parameters, so it is computed once per beam configuration
as a :class:`RadioTrace` and replayed for every grid cell.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .beams import AntennaPattern, BeamLayout, generate_beam_layout
from .delay import (
    DEFAULT_COUNTS,
    DelayConstants,
    FunctionalSplit,
    LinkCounts,
    MessageCounts,
    cho_delay,
    link_delays,
)
from .errors import ConfigError, SimulationError
from .geometry import (
    ConstellationSpec,
    GeodeticPosition,
    SatelliteState,
    StaticConstellation,
    elevation_angles,
    geodetic_to_ecef,
    propagate_arrays,
)
from .handover import (
    HoEvent,
    HoParams,
    MobilityScenario,
    classify_scenario,
    initialize_serving,
    select_anchor,
    step,
)
from .kpi import KpiBuilder, KpiConfig, KpiReport
from .linkbudget import RadioSpec, RsrpSample
from .topology import (
    CandidateSet,
    FeederAssociation,
    GroundStation,
    VisibilityConfig,
    associate_feeder_links,
    beam_powers,
    best_beam,
    candidate_satellites,
)

UE_LOCATION = GeodeticPosition(45.78, 1.75, 0.0)

GROUND_STATIONS = (
    GroundStation(1, GeodeticPosition(38.33458, 0.4909), hosts_core=True),
    GroundStation(2, GeodeticPosition(50.9871, 2.1255)),
    GroundStation(3, GeodeticPosition(45.3207, 9.1886)),
    GroundStation(4, GeodeticPosition(50.3353, 8.5320), hosts_core=True),
)


@dataclass(frozen=True)
class RunSpec:
    split: FunctionalSplit = FunctionalSplit.gnb
    beam_count: int = 127
    params: HoParams = HoParams()
    T: int = 1200
    dt: float = 1.0
    constellation: ConstellationSpec | StaticConstellation = ConstellationSpec()
    ground_stations: tuple[GroundStation, ...] = GROUND_STATIONS
    ue: GeodeticPosition = UE_LOCATION
    radio: RadioSpec = RadioSpec()
    antenna: AntennaPattern = AntennaPattern()
    beam_diameter: float = 50_000.0
    visibility: VisibilityConfig = VisibilityConfig()
    # A serving satellite that drops out of the candidate set (below the UE
    # mask or without a usable feeder link) can no longer carry traffic.
    lose_non_candidates: bool = True
    kpi: KpiConfig = KpiConfig()
    delay: DelayConstants = DelayConstants()
    counts: Mapping[tuple[FunctionalSplit, MobilityScenario], LinkCounts] = field(
        default_factory=lambda: dict(DEFAULT_COUNTS)
    )

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError("T must be at least one slot")
        if not self.dt > 0:
            raise ValueError("slot duration must be positive")

    @property
    def earth_radius(self) -> float:
        return self.constellation.earth_radius

    @property
    def altitude(self) -> float:
        c = self.constellation
        if isinstance(c, StaticConstellation):
            return c.positions[0].altitude if c.positions else 1.0
        return c.altitude

    def trace_key(self) -> tuple:
        """Every input the radio trace depends on."""
        return (
            self.beam_count,
            self.T,
            self.dt,
            self.constellation,
            self.ground_stations,
            self.ue,
            self.radio,
            self.antenna,
            self.beam_diameter,
            self.visibility,
            self.lose_non_candidates,
        )


@dataclass(frozen=True, eq=False)
class SlotGeometry:
    t: int
    assoc: FeederAssociation
    candidates: CandidateSet
    best: RsrpSample | None
    # Satellites above the UE's horizon, keyed by id.
    states: Mapping[int, SatelliteState]
    # Per-beam RSRP (dBm) of every candidate satellite.
    powers: Mapping[int, np.ndarray]


class RadioTrace:
    """Precomputed per-slot geometry shared by every cell of one beam configuration."""

    def __init__(self, spec: RunSpec, slots: list[SlotGeometry], layout: BeamLayout) -> None:
        self.key = spec.trace_key()
        self.slots = slots
        self.layout = layout
        self._radio = spec.radio
        self._antenna = spec.antenna
        self._ue = geodetic_to_ecef(spec.ue, spec.earth_radius)
        self._lose = spec.lose_non_candidates
        self._extra: dict[tuple[int, int], np.ndarray] = {}

    @property
    def ue_ecef(self) -> np.ndarray:
        return self._ue

    def serving_power(self, geo: SlotGeometry, beam: tuple[int, int]) -> float:
        """RSRP of ``beam`` at slot ``geo``.

        ``-inf`` once its satellite has set, or, when non-candidates are
        treated as lost, once it has left the candidate set.
        """
        sat, i = beam
        p = geo.powers.get(sat)
        if p is None:
            if self._lose:
                return -math.inf
            state = geo.states.get(sat)
            if state is None:
                return -math.inf
            key = (geo.t, sat)
            p = self._extra.get(key)
            if p is None:
                p = beam_powers(state, self.layout, self._radio, self._antenna, self._ue)
                self._extra[key] = p
        return float(p[i])


def build_trace(spec: RunSpec) -> RadioTrace:
    layout = generate_beam_layout(spec.beam_count, spec.beam_diameter, spec.altitude)
    R = spec.earth_radius
    ue = geodetic_to_ecef(spec.ue, R)
    epoch = getattr(spec.constellation, "epoch_offset", 0.0)
    per_plane = getattr(spec.constellation, "sats_per_plane", 1)
    gss = spec.ground_stations
    slots: list[SlotGeometry] = []
    assoc = FeederAssociation()
    for t in range(1, spec.T + 1):
        pos, along = propagate_arrays(spec.constellation, (t - 1) * spec.dt + epoch)
        above = np.nonzero(elevation_angles(ue, pos) > 0.0)[0]
        states = {
            int(s): SatelliteState(int(s), pos[s], int(s) // per_plane, int(s) % per_plane, along[s])
            for s in above
        }
        visible = list(states.values())
        assoc = associate_feeder_links(visible, gss, spec.visibility, assoc, ue=ue, earth_radius=R)
        linked = [states[s] for s in assoc.links]
        cands = candidate_satellites(linked, ue, gss, spec.visibility, assoc, t=t, earth_radius=R)
        powers = {
            s: beam_powers(states[s], layout, spec.radio, spec.antenna, ue) for s in cands.sat_ids
        }
        best = best_beam(cands, states, layout, spec.radio, spec.antenna, ue, powers=powers)
        slots.append(SlotGeometry(t, assoc, cands, best, states, powers))
    return RadioTrace(spec, slots, layout)


@dataclass(frozen=True)
class EventRecord:
    """One row of the event log: a handover, or a slot spent in radio link failure."""

    t: int
    kind: str  # "HO" | "RLF"
    source_sat: int
    source_beam: int
    target_sat: int | None = None
    target_beam: int | None = None
    scenario: str | None = None
    cho_delay: float | None = None


def run_simulation(
    spec: RunSpec, trace: RadioTrace | None = None
) -> tuple[KpiReport, list[EventRecord], Counter]:
    """Simulate ``spec.T`` slots and return ``(report, event_log, warnings)``."""
    if trace is None:
        trace = build_trace(spec)
    elif trace.key != spec.trace_key():
        raise SimulationError("radio trace was built for a different configuration")

    gss = {g.gs_id: g for g in spec.ground_stations}
    R = spec.earth_radius
    ue = trace.ue_ecef
    first = trace.slots[0]
    state = initialize_serving(first.best, spec.params)
    anchor = select_anchor(spec.ground_stations, first.assoc.gs_of(state.serving[0]), R)

    builder = KpiBuilder(spec.kpi, spec.dt)
    log: list[EventRecord] = []
    last_known: dict[int, int] = {}
    warnings: Counter = Counter()
    for geo in trace.slots:
        last_known.update(geo.assoc.links)
        serving = state.serving
        p_serv = trace.serving_power(geo, serving)
        state, ind, ev = step(
            state, geo.t, geo.best, p_serv, spec.params, spec.dt, spec.radio.rlf_threshold
        )
        if not ind.r:
            log.append(EventRecord(geo.t, "RLF", serving[0], serving[1]))
        if ev is not None:
            ev = _charge(ev, geo, spec, gss, anchor, last_known, warnings, ue, R)
            log.append(
                EventRecord(
                    geo.t, "HO", ev.source[0], ev.source[1], ev.target[0], ev.target[1],
                    ev.scenario.name, ev.cho_delay,
                )
            )
        builder.accumulate(ind, ev)
    return builder.finalize(spec.T), log, warnings


def _charge(ev, geo, spec, gss, anchor, last_known, warnings, ue, R) -> HoEvent:
    src, tgt = ev.source[0], ev.target[0]
    q = classify_scenario(src, tgt, geo.assoc, anchor, last_known, warnings)
    g_src = geo.assoc.gs_of(src) or last_known.get(src, 0)
    g_tgt = geo.assoc.gs_of(tgt) or last_known.get(tgt, 0)
    s_state, t_state = geo.states.get(src), geo.states.get(tgt)
    if t_state is None:
        raise SimulationError(f"slot {geo.t}: handover target {tgt} has no position")
    s_pos = s_state.position if s_state is not None else t_state.position
    links = link_delays(
        ue, s_pos, t_state.position, gss.get(g_src), gss.get(g_tgt), src == tgt, spec.delay, R
    )
    return replace(ev, scenario=q, cho_delay=cho_delay(spec.split, q, spec.counts, spec.delay, links))


@dataclass(frozen=True)
class SweepGrid:
    ttt_values: tuple[float, ...] = tuple(float(v) for v in range(0, 31, 3))
    hom_values: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0)
    splits: tuple[FunctionalSplit, ...] = tuple(FunctionalSplit)
    beam_counts: tuple[int, ...] = (19, 127)

    def __post_init__(self) -> None:
        for name in ("ttt_values", "hom_values", "splits", "beam_counts"):
            if not getattr(self, name):
                raise ValueError(f"sweep grid {name} is empty")
        if any(v < 0 for v in (*self.ttt_values, *self.hom_values)):
            raise ValueError("sweep grid values must be non-negative")

    def cells(self) -> list[tuple[FunctionalSplit, int, float, float]]:
        return [
            (f, b, ttt, hom)
            for f in self.splits
            for b in self.beam_counts
            for ttt in self.ttt_values
            for hom in self.hom_values
        ]


@dataclass(frozen=True)
class Optimum:
    ttt: float
    hom: float
    xi: float


@dataclass
class SweepResult:
    grid: SweepGrid
    cells: dict[tuple, KpiReport]
    events: dict[tuple, list[EventRecord]]
    optimum: dict[tuple[FunctionalSplit, int], Optimum]


def best_cell(cells: Mapping[tuple, KpiReport], split: FunctionalSplit, beams: int) -> Optimum:
    """Argmax of xi over one (split, beams) slice; ties go to smaller TTT, then smaller HOM."""
    best = None
    for (f, b, ttt, hom), rep in cells.items():
        if f != split or b != beams:
            continue
        key = (rep.xi, -ttt, -hom)
        if best is None or key > best[0]:
            best = (key, Optimum(ttt, hom, rep.xi))
    if best is None:
        raise SimulationError(f"no cells for slice ({split.name}, {beams})")
    return best[1]


_WORKER_TRACES: dict = {}


def _init_worker(traces: dict) -> None:
    _WORKER_TRACES.clear()
    _WORKER_TRACES.update(traces)


def _run_cell(spec: RunSpec):
    return run_simulation(spec, _WORKER_TRACES[spec.beam_count])


def exhaustive_search(
    grid: SweepGrid, base: RunSpec, workers: int = 1
) -> SweepResult:
    """Evaluate every grid cell and pick the best (TTT, HOM) per (split, beams) slice."""
    traces = {b: build_trace(replace(base, beam_count=b)) for b in grid.beam_counts}
    keys = grid.cells()
    specs = [
        replace(base, split=f, beam_count=b, params=replace(base.params, ttt=ttt, hom=hom))
        for f, b, ttt, hom in keys
    ]

    def tagged(key, exc):
        label = f"cell (split={key[0].name}, beams={key[1]}, ttt={key[2]}, hom={key[3]})"
        if isinstance(exc, ConfigError):
            return ConfigError([f"{label}: {v}" for v in exc.violations])
        return SimulationError(f"{label}: {exc}")

    outputs = []
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(traces,)) as pool:
            futures = [pool.submit(_run_cell, s) for s in specs]
            for key, fut in zip(keys, futures):
                try:
                    outputs.append(fut.result())
                except Exception as exc:
                    raise tagged(key, exc) from exc
    else:
        for key, s in zip(keys, specs):
            try:
                outputs.append(run_simulation(s, traces[s.beam_count]))
            except Exception as exc:
                raise tagged(key, exc) from exc

    cells = {k: out[0] for k, out in zip(keys, outputs)}
    events = {k: out[1] for k, out in zip(keys, outputs)}
    optimum = {
        (f, b): best_cell(cells, f, b) for f in grid.splits for b in grid.beam_counts
    }
    return SweepResult(grid, cells, events, optimum)
