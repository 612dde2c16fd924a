"""JSON run configuration: defaulting, validation and conversion to run objects."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any

from .beams import AntennaPattern, tiers_for
from .delay import DelayConstants, FunctionalSplit, LinkCounts, check_counts
from .errors import ConfigError
from .geometry import ConstellationSpec, GeodeticPosition, StaticConstellation
from .handover import HoParams, MobilityScenario
from .kpi import KpiConfig
from .linkbudget import RadioSpec
from .sweep import RunSpec, SweepGrid
from .topology import GroundStation, VisibilityConfig

# Values replaced wholesale rather than merged key by key: a partial delay
# table or station list would otherwise be silently completed from defaults.
_ATOMIC = {"ground_segment.stations", "delay_profiles.counts"}


def default_document() -> dict:
    text = resources.files(__package__).joinpath("default_config.json").read_text("utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class RunConfiguration:
    base: RunSpec
    grid: SweepGrid
    workers: int
    out_dir: str
    # Dotted paths of every field taken from the shipped defaults.
    defaulted: tuple[str, ...]
    document: dict


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _leaves(value: Any, path: str) -> list[str]:
    if isinstance(value, dict) and path not in _ATOMIC:
        return [p for k, v in value.items() for p in _leaves(v, f"{path}.{k}")]
    return [path]


def _merge(default: Any, raw: Any, path: str, defaulted: list, errors: list) -> Any:
    if isinstance(default, dict) and path not in _ATOMIC:
        if not isinstance(raw, dict):
            errors.append(f"{path or 'document'}: expected an object")
            return copy.deepcopy(default)
        for key in raw:
            if key not in default:
                errors.append(f"{path + '.' if path else ''}{key}: unknown field")
        out = {}
        for key, dv in default.items():
            sub = f"{path}.{key}" if path else key
            if key in raw:
                out[key] = _merge(dv, raw[key], sub, defaulted, errors)
            else:
                defaulted.extend(_leaves(dv, sub))
                out[key] = copy.deepcopy(dv)
        return out
    if default is None or path in _ATOMIC:
        return raw  # shape checked when the section is built
    if isinstance(default, bool):
        if not isinstance(raw, bool):
            errors.append(f"{path}: expected true or false")
            return default
        return raw
    if _is_number(default):
        if not _is_number(raw):
            errors.append(f"{path}: expected a number")
            return default
        if isinstance(default, int) and not float(raw).is_integer():
            errors.append(f"{path}: expected an integer")
            return default
        return int(raw) if isinstance(default, int) else float(raw)
    if isinstance(default, str):
        if not isinstance(raw, str):
            errors.append(f"{path}: expected a string")
            return default
        return raw
    if isinstance(default, list):
        if not isinstance(raw, list):
            errors.append(f"{path}: expected a list")
            return copy.deepcopy(default)
        return raw
    return raw


def _split(name: Any, path: str, errors: list) -> FunctionalSplit | None:
    try:
        return FunctionalSplit[name]
    except (KeyError, TypeError):
        choices = ", ".join(f.name for f in FunctionalSplit)
        errors.append(f"{path}: unknown split {name!r} (choose from {choices})")
        return None


def _build(section: str, errors: list, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except (ValueError, TypeError) as exc:
        errors.append(f"{section}: {exc}")
        return None


def _hexagonal(n: Any, path: str, errors: list) -> None:
    try:
        tiers_for(n)
    except ConfigError:
        errors.append(f"{path}: {n} beams is not a centred-hexagonal count (1, 7, 19, 37, ...)")


def _stations(doc: dict, errors: list) -> tuple[GroundStation, ...]:
    seg = doc["ground_segment"]
    raw = seg["stations"]
    if not isinstance(raw, list) or not raw:
        errors.append("ground_segment.stations: at least one ground station is required")
        return ()
    out = []
    for i, st in enumerate(raw):
        path = f"ground_segment.stations[{i}]"
        if not isinstance(st, dict):
            errors.append(f"{path}: expected an object")
            continue
        unknown = set(st) - {"id", "lat", "lon", "alt_m", "hosts_core", "feeder_capacity"}
        if unknown:
            errors.append(f"{path}: unknown field(s) {sorted(unknown)}")
        if not all(_is_number(st.get(k)) for k in ("id", "lat", "lon")):
            errors.append(f"{path}: id, lat and lon are required numbers")
            continue
        pos = _build(path, errors, GeodeticPosition, float(st["lat"]), float(st["lon"]), float(st.get("alt_m", 0.0)))
        gs = pos and _build(
            path,
            errors,
            GroundStation,
            int(st["id"]),
            pos,
            bool(st.get("hosts_core", False)),
            int(st.get("feeder_capacity", seg["feeder_capacity"])),
        )
        if gs is not None:
            out.append(gs)
    ids = [g.gs_id for g in out]
    if len(set(ids)) != len(ids):
        errors.append("ground_segment.stations: duplicate station ids")
    if out and not any(g.hosts_core for g in out):
        errors.append("ground_segment.stations: no station hosts the core (AMF/UPF)")
    return tuple(out)


def _counts(raw: Any, errors: list) -> dict | None:
    if not isinstance(raw, dict):
        errors.append("delay_profiles.counts: expected an object keyed by split")
        return None
    table = {}
    for name, row in raw.items():
        f = _split(name, "delay_profiles.counts", errors)
        if f is None:
            continue
        if not isinstance(row, dict):
            errors.append(f"delay_profiles.counts.{name}: expected an object keyed by scenario")
            continue
        for qname, n in row.items():
            path = f"delay_profiles.counts.{name}.{qname}"
            if qname not in MobilityScenario.__members__:
                errors.append(f"{path}: unknown scenario")
            elif (
                not isinstance(n, list)
                or len(n) != 4
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in n)
            ):
                errors.append(f"{path}: expected four integer counts [fl, sl, isl, igsl]")
            else:
                table[(f, MobilityScenario[qname])] = LinkCounts(*n)
    try:
        check_counts(table)
    except ConfigError as exc:
        errors.extend(exc.violations)
    return table


def _constellation(doc: dict, errors: list):
    c = doc["constellation"]
    static = c["static_positions"]
    if static is not None:
        if not isinstance(static, list) or not static:
            errors.append("constellation.static_positions: expected a non-empty list of [lat, lon, alt_m]")
            return None
        pts = []
        for i, p in enumerate(static):
            if not (isinstance(p, list) and len(p) == 3 and all(_is_number(v) for v in p)):
                errors.append(f"constellation.static_positions[{i}]: expected [lat, lon, alt_m]")
                continue
            pos = _build(f"constellation.static_positions[{i}]", errors, GeodeticPosition, *map(float, p))
            if pos is not None:
                if pos.altitude <= 0:
                    errors.append(f"constellation.static_positions[{i}]: altitude must be positive")
                pts.append(pos)
        return StaticConstellation(tuple(pts))
    return _build(
        "constellation",
        errors,
        ConstellationSpec,
        plane_count=c["plane_count"],
        sats_per_plane=c["sats_per_plane"],
        altitude=c["altitude_m"],
        inclination=c["inclination_deg"],
        phasing_factor=c["phasing_factor"],
        raan0=c["raan0_deg"],
        epoch_offset=c["epoch_offset_s"],
    )


def validate_config(raw: Any) -> RunConfiguration:
    """Fill defaults into ``raw`` and check it, reporting every violation at once.

    Raises
    ------
    ConfigError
        With one entry per problem found.
    """
    errors: list[str] = []
    defaulted: list[str] = []
    doc = _merge(default_document(), raw, "", defaulted, errors)

    constellation = _constellation(doc, errors)
    stations = _stations(doc, errors)
    u = doc["ue"]
    ue = _build("ue", errors, GeodeticPosition, u["lat"], u["lon"], u["alt_m"])
    r = doc["radio"]
    radio = _build(
        "radio", errors, RadioSpec,
        tx_power=r["tx_power_dbw"], rx_gain=r["rx_gain_dbi"], carrier_frequency=r["carrier_ghz"],
        rlf_threshold=r["rlf_threshold_dbm"], extra_loss_db=r["extra_loss_db"],
    )
    a = doc["antenna"]
    floor = a["gain_floor_db"]
    if floor is not None and not _is_number(floor):
        errors.append("antenna.gain_floor_db: expected a number or null")
        floor = None
    antenna = None
    if radio is not None:
        antenna = _build(
            "antenna", errors, AntennaPattern,
            max_gain=a["max_gain_dbi"], aperture_radius=a["aperture_radius_m"],
            carrier_frequency=radio.carrier_frequency,
            gain_floor=None if floor is None else float(floor),
        )
    b = doc["beams"]
    _hexagonal(b["beam_count"], "beams.beam_count", errors)
    if not b["beam_diameter_m"] > 0:
        errors.append("beams.beam_diameter_m: must be positive")
    v = doc["visibility"]
    visibility = _build(
        "visibility", errors, VisibilityConfig, v["ue_min_elevation_deg"], v["gs_min_elevation_deg"]
    )
    k = doc["kpi"]
    kpi = _build("kpi", errors, KpiConfig, k["min_time_of_stay_s"], k["pingpong_window_s"])
    d = doc["delay_profiles"]
    consts = _build(
        "delay_profiles", errors, DelayConstants, d["sync_s"], d["core_s"], d["ppm_s"], d["igsl_factor"]
    )
    counts = _counts(d["counts"], errors)
    s = doc["simulation"]
    if s["T"] < 1:
        errors.append("simulation.T: must be at least one slot")
    if not s["dt_s"] > 0:
        errors.append("simulation.dt_s: must be positive")

    h = doc["ho_params"]
    split = _split(h["split"], "ho_params.split", errors)
    for key in ("ttt_s", "hom_db"):
        if h[key] < 0:
            errors.append(f"ho_params.{key}: must be non-negative, got {h[key]}")
    params = None
    if h["ttt_s"] >= 0 and h["hom_db"] >= 0:
        params = _build("ho_params", errors, HoParams, h["ttt_s"], h["hom_db"], h["reset_on_target_change"])

    g = doc["sweep"]
    grid_args = {}
    for key in ("ttt_s", "hom_db"):
        vals = g[key]
        if not vals or not all(_is_number(x) and math.isfinite(x) for x in vals):
            errors.append(f"sweep.{key}: expected a non-empty list of numbers")
        elif any(x < 0 for x in vals):
            errors.append(f"sweep.{key}: values must be non-negative")
        elif len(set(vals)) != len(vals):
            errors.append(f"sweep.{key}: duplicate values")
        else:
            grid_args[key] = tuple(float(x) for x in vals)
    splits = [_split(x, "sweep.splits", errors) for x in g["splits"]]
    if not splits or len(set(splits)) != len(splits):
        errors.append("sweep.splits: expected a non-empty list of distinct splits")
    beams = g["beams"]
    if not beams or len(set(map(str, beams))) != len(beams):
        errors.append("sweep.beams: expected a non-empty list of distinct beam counts")
    for i, n in enumerate(beams):
        if isinstance(n, int) and not isinstance(n, bool):
            _hexagonal(n, f"sweep.beams[{i}]", errors)
        else:
            errors.append(f"sweep.beams[{i}]: expected an integer")
    if g["workers"] < 1:
        errors.append("sweep.workers: must be at least 1")

    if errors:
        raise ConfigError(errors)

    base = RunSpec(
        split=split,
        beam_count=b["beam_count"],
        params=params,
        T=s["T"],
        dt=s["dt_s"],
        constellation=constellation,
        ground_stations=stations,
        ue=ue,
        radio=radio,
        antenna=antenna,
        beam_diameter=b["beam_diameter_m"],
        visibility=visibility,
        lose_non_candidates=v["lose_non_candidates"],
        kpi=kpi,
        delay=consts,
        counts=counts,
    )
    grid = SweepGrid(grid_args["ttt_s"], grid_args["hom_db"], tuple(splits), tuple(beams))
    return RunConfiguration(base, grid, g["workers"], doc["outputs"]["dir"], tuple(defaulted), doc)


def load_config(path: str | Path | None) -> RunConfiguration:
    """Read and validate a JSON configuration; ``None`` means the shipped defaults."""
    if path is None:
        return validate_config({})
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    return validate_config(raw)


def with_overrides(
    cfg: RunConfiguration,
    split: FunctionalSplit | None = None,
    beams: int | None = None,
    ttt: float | None = None,
    hom: float | None = None,
) -> RunConfiguration:
    """Apply command-line overrides, re-checking only what they touch."""
    errors = []
    if beams is not None:
        _hexagonal(beams, "--beams", errors)
    for flag, val in (("--ttt", ttt), ("--hom", hom)):
        if val is not None and not val >= 0:
            errors.append(f"{flag}: must be non-negative, got {val}")
    if errors:
        raise ConfigError(errors)
    base = cfg.base
    params = base.params
    if ttt is not None:
        params = replace(params, ttt=ttt)
    if hom is not None:
        params = replace(params, hom=hom)
    base = replace(
        base,
        split=split if split is not None else base.split,
        beam_count=beams if beams is not None else base.beam_count,
        params=params,
    )
    return replace(cfg, base=base)
