"""Mobility KPIs: RLF and handover rates, total CHO delay, effective service time."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import SimulationError
from .handover import HoEvent, SlotIndicators


@dataclass(frozen=True)
class KpiConfig:
    min_time_of_stay: float = 5.0  # s; a shorter stay makes the next HO unnecessary
    pingpong_window: float = 5.0  # s; return to the previous beam within this is a ping-pong

    def __post_init__(self) -> None:
        if self.min_time_of_stay <= 0 or self.pingpong_window <= 0:
            raise ValueError("KPI windows must be positive")


@dataclass(frozen=True)
class KpiReport:
    rlf_count: int
    rlf_per_min: float
    intra_ho_count: int
    intra_ho_per_min: float
    inter_ho_count: int
    inter_ho_per_min: float
    uho_count: int
    pp_count: int
    tau_tot: float
    norm_cho_delay: float
    xi: float
    availability: float

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


class KpiBuilder:
    """Running KPI sums for one simulation run, fed one slot at a time."""

    def __init__(self, cfg: KpiConfig, dt: float) -> None:
        self.cfg = cfg
        self.dt = dt
        self.slots = 0
        self.rlf_count = 0
        self.intra = 0
        self.inter = 0
        self.uho = 0
        self.pp = 0
        self.served_slots = 0
        self.tau_tot = 0.0
        self._last_t: int | None = None
        self._last_event: HoEvent | None = None
        self._r_log: list[int] = []
        self._delay_log: list[float] = []

    def accumulate(self, ind: SlotIndicators, event: HoEvent | None = None) -> KpiBuilder:
        if self._last_t is not None and ind.t <= self._last_t:
            raise SimulationError(f"slot {ind.t} fed after slot {self._last_t}")
        if (event is not None) != bool(ind.u):
            raise SimulationError(f"slot {ind.t}: handover indicator and event disagree")
        self._last_t = ind.t
        self.slots += 1
        self._r_log.append(ind.r)
        if ind.r:
            self.served_slots += 1
        else:
            self.rlf_count += 1

        if event is not None:
            if event.is_intra:
                self.intra += 1
            else:
                self.inter += 1
            self.tau_tot += event.cho_delay
            self._delay_log.append(event.cho_delay)
            prev = self._last_event
            if prev is not None:
                gap = (event.t - prev.t) * self.dt
                if gap < self.cfg.min_time_of_stay:
                    self.uho += 1
                if event.target == prev.source and gap < self.cfg.pingpong_window:
                    self.pp += 1
            self._last_event = event
        return self

    @property
    def served(self) -> float:
        # Multiplied once rather than summed per slot, so it never exceeds T * dt.
        return self.served_slots * self.dt

    def _recomputed_xi(self) -> float:
        served_slots = 0
        for r in self._r_log:
            if r:
                served_slots += 1
        served = served_slots * self.dt
        tau = 0.0
        for d in self._delay_log:
            tau += d
        return served - tau

    def finalize(self, T: int) -> KpiReport:
        if self.slots != T:
            raise SimulationError(f"expected {T} slots, accumulated {self.slots}")
        duration = T * self.dt
        xi = self.served - self.tau_tot
        if xi != self._recomputed_xi():
            raise SimulationError("effective service time drifted from its slot log")

        def per_min(n: int) -> float:
            return n * 60.0 / duration

        return KpiReport(
            rlf_count=self.rlf_count,
            rlf_per_min=per_min(self.rlf_count),
            intra_ho_count=self.intra,
            intra_ho_per_min=per_min(self.intra),
            inter_ho_count=self.inter,
            inter_ho_per_min=per_min(self.inter),
            uho_count=self.uho,
            pp_count=self.pp,
            tau_tot=self.tau_tot,
            norm_cho_delay=self.tau_tot / duration,
            xi=xi,
            availability=xi / duration,
        )
