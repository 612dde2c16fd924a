"""Command-line front end: ``validate``, ``simulate``, ``sweep`` and ``plots``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

from .config import RunConfiguration, load_config, with_overrides
from .delay import FunctionalSplit
from .errors import ConfigError, SimulationError
from .kpi import KpiReport
from .sweep import EventRecord, SweepResult, exhaustive_search, run_simulation

log = logging.getLogger("leo_cho")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

SWEEP_COLUMNS = [
    "split", "beams", "ttt_s", "hom_db", "rlf_count", "rlf_per_min", "intra_ho_count",
    "intra_ho_per_min", "inter_ho_count", "inter_ho_per_min", "uho_count", "pp_count",
    "tau_tot_s", "norm_cho_delay", "xi_s", "availability",
]
EVENT_COLUMNS = [
    "t", "kind", "source_sat", "source_beam", "target_sat", "target_beam", "scenario", "cho_delay_s",
]
# Metrics whose surface does not depend on the functional split.
RADIO_METRICS = ("rlf_per_min", "intra_ho_per_min", "inter_ho_per_min")
DELAY_METRICS = ("norm_cho_delay", "availability")

_REPORT_KEYS = {"tau_tot": "tau_tot_s", "xi": "xi_s"}


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _blank(v):
    return "" if v is None else v


def event_rows(events: Sequence[EventRecord]) -> list[list]:
    return [
        [e.t, e.kind, e.source_sat, e.source_beam, _blank(e.target_sat), _blank(e.target_beam),
         _blank(e.scenario), _blank(e.cho_delay)]
        for e in events
    ]


def sweep_row(key: tuple, rep: KpiReport) -> list:
    split, beams, ttt, hom = key
    return [split.name, beams, ttt, hom] + list(rep.as_dict().values())


def _kpi_dict(rep: KpiReport) -> dict:
    return {_REPORT_KEYS.get(k, k): v for k, v in rep.as_dict().items()}


def _num(x: float) -> str:
    return repr(float(x)).replace(".", "p").replace("-", "m")


def cell_stem(key: tuple) -> str:
    split, beams, ttt, hom = key
    return f"{split.name}_b{beams}_ttt{_num(ttt)}_hom{_num(hom)}"


def cmd_validate(cfg: RunConfiguration, out: Path | None) -> int:
    summary = {
        "status": "ok",
        "defaulted_fields": list(cfg.defaulted),
        "grid_cells": len(cfg.grid.cells()),
    }
    text = json.dumps(summary, indent=2) + "\n"
    if out is not None:
        _write(out / "validation.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(cfg: RunConfiguration, out: Path) -> int:
    spec = cfg.base
    report, events, warnings = run_simulation(spec)
    doc = {
        "split": spec.split.name,
        "beams": spec.beam_count,
        "ttt_s": spec.params.ttt,
        "hom_db": spec.params.hom,
        "kpis": _kpi_dict(report),
        "warnings": dict(sorted(warnings.items())),
        "defaulted_fields": list(cfg.defaulted),
    }
    _write(out / "report.json", json.dumps(doc, indent=2) + "\n")
    _write(out / "events.csv", _csv_text(EVENT_COLUMNS, event_rows(events)))
    log.info("simulate: availability %.6f, %d log rows", report.availability, len(events))
    return EXIT_OK


def write_sweep(result: SweepResult, cfg: RunConfiguration, out: Path) -> None:
    keys = result.grid.cells()
    _write(out / "sweep.csv", _csv_text(SWEEP_COLUMNS, (sweep_row(k, result.cells[k]) for k in keys)))
    for k in keys:
        _write(out / "events" / f"{cell_stem(k)}.csv", _csv_text(EVENT_COLUMNS, event_rows(result.events[k])))
    optimum = [
        {"split": f.name, "beams": b, "ttt_s": o.ttt, "hom_db": o.hom, "xi_s": o.xi}
        for (f, b), o in result.optimum.items()
    ]
    _write(out / "optimum.json", json.dumps(optimum, indent=2) + "\n")
    _write(
        out / "report.json",
        json.dumps({"cells": len(keys), "defaulted_fields": list(cfg.defaulted)}, indent=2) + "\n",
    )


def cmd_sweep(cfg: RunConfiguration, out: Path) -> int:
    result = exhaustive_search(cfg.grid, cfg.base, workers=cfg.workers)
    write_sweep(result, cfg, out)
    for (f, b), o in result.optimum.items():
        log.info("optimum %s/%d: ttt=%g s, hom=%g dB, xi=%.3f s", f.name, b, o.ttt, o.hom, o.xi)
    return EXIT_OK


def read_sweep_csv(path: Path) -> list[dict[str, str]]:
    """Rows of a sweep CSV as raw strings, so values can be copied verbatim."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != SWEEP_COLUMNS:
        raise ConfigError([f"{path}: header does not match the sweep CSV columns"])
    rows = []
    for n, rec in enumerate(reader, start=2):
        if len(rec) != len(SWEEP_COLUMNS):
            raise ConfigError([f"{path}:{n}: expected {len(SWEEP_COLUMNS)} fields, got {len(rec)}"])
        row = dict(zip(SWEEP_COLUMNS, rec))
        if row["split"] not in FunctionalSplit.__members__:
            raise ConfigError([f"{path}:{n}: unknown split {row['split']!r}"])
        try:
            int(row["beams"])
            for col in SWEEP_COLUMNS[2:]:
                float(row[col])
        except ValueError:
            raise ConfigError([f"{path}:{n}: non-numeric field"]) from None
        rows.append(row)
    if not rows:
        raise ConfigError([f"{path}: no data rows"])
    return rows


def _matrix_text(cells: dict[tuple[float, float], str], ttts: list[float], homs: list[float], raw: dict) -> str:
    header = ["ttt_s\\hom_db"] + [raw[("h", h)] for h in homs]
    body = [[raw[("t", t)]] + [cells.get((t, h), "") for h in homs] for t in ttts]
    return _csv_text(header, body)


def build_matrices(rows: list[dict[str, str]]) -> dict[str, str]:
    """File name → CSV text of every plot matrix (TTT rows, HOM columns)."""
    raw: dict = {}
    ttts, homs = set(), set()
    for r in rows:
        t, h = float(r["ttt_s"]), float(r["hom_db"])
        raw.setdefault(("t", t), r["ttt_s"])
        raw.setdefault(("h", h), r["hom_db"])
        ttts.add(t)
        homs.add(h)
    ttts, homs = sorted(ttts), sorted(homs)

    radio: dict = defaultdict(dict)
    delay: dict = defaultdict(dict)
    for r in rows:
        cell = (float(r["ttt_s"]), float(r["hom_db"]))
        beams = int(r["beams"])
        for m in RADIO_METRICS:
            seen = radio[(m, beams)].setdefault(cell, r[m])
            if seen != r[m]:
                raise SimulationError(
                    f"{m} differs across splits at beams={beams}, ttt={cell[0]}, hom={cell[1]}"
                )
        for m in DELAY_METRICS:
            slot = delay[(m, r["split"], beams)]
            if cell in slot:
                raise ConfigError([f"duplicate sweep row for {r['split']}, {beams}, {cell}"])
            slot[cell] = r[m]

    out = {}
    for (m, beams), cells in sorted(radio.items()):
        out[f"{m}_b{beams}.csv"] = _matrix_text(cells, ttts, homs, raw)
    for (m, split, beams), cells in sorted(delay.items()):
        out[f"{m}_{split}_b{beams}.csv"] = _matrix_text(cells, ttts, homs, raw)
    return out


def cmd_plots(sweep_csv: Path, out: Path) -> int:
    for name, text in build_matrices(read_sweep_csv(sweep_csv)).items():
        _write(out / name, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leo-cho", description="LEO multi-beam conditional-handover simulator"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", type=Path, help="JSON configuration (defaults if omitted)")
        if out:
            p.add_argument("--out", type=Path, help="output directory (config outputs.dir if omitted)")

    p = sub.add_parser("validate", help="check a configuration and list defaulted fields")
    common(p)
    p = sub.add_parser("simulate", help="run one (split, beams, TTT, HOM) cell")
    common(p)
    p.add_argument("--split", choices=[f.name for f in FunctionalSplit])
    p.add_argument("--beams", type=int)
    p.add_argument("--ttt", type=float, help="time-to-trigger in seconds")
    p.add_argument("--hom", type=float, help="handover margin in dB")
    p = sub.add_parser("sweep", help="exhaustive TTT x HOM search over the configured grid")
    common(p)
    p.add_argument("--workers", type=int, help="worker processes (config sweep.workers if omitted)")
    p = sub.add_parser("plots", help="turn a sweep CSV into per-metric TTT x HOM matrices")
    p.add_argument("sweep_csv", type=Path)
    p.add_argument("--out", type=Path, required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        if args.command == "plots":
            return cmd_plots(args.sweep_csv, args.out)
        cfg = load_config(args.config)
        if args.command == "validate":
            return cmd_validate(cfg, args.out)
        out = args.out if args.out is not None else Path(cfg.out_dir)
        if args.command == "simulate":
            split = FunctionalSplit[args.split] if args.split else None
            cfg = with_overrides(cfg, split, args.beams, args.ttt, args.hom)
            return cmd_simulate(cfg, out)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError(["--workers: must be at least 1"])
            cfg = RunConfiguration(cfg.base, cfg.grid, args.workers, cfg.out_dir, cfg.defaulted, cfg.document)
        return cmd_sweep(cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
