from __future__ import annotations

import math
from dataclasses import replace

import pytest

from leo_cho.delay import FunctionalSplit
from leo_cho.errors import SimulationError
from leo_cho.handover import HoParams
from leo_cho.linkbudget import RadioSpec
from leo_cho.sweep import RunSpec, SweepGrid, best_cell, build_trace, exhaustive_search, run_simulation

SMALL = SweepGrid(ttt_values=(0.0, 6.0), hom_values=(0.0, 5.0), beam_counts=(19,))


def test_single_static_satellite_is_perfect(overhead_fixture):
    rep, log, warnings = run_simulation(overhead_fixture)
    assert rep.xi == overhead_fixture.T * overhead_fixture.dt
    assert rep.availability == 1.0
    assert log == [] and not warnings


def test_threshold_above_received_power_is_all_rlf(overhead_fixture):
    spec = replace(overhead_fixture, radio=RadioSpec(rlf_threshold=0.0))
    rep, log, _ = run_simulation(spec)
    assert rep.rlf_count == spec.T
    assert rep.xi == 0.0
    assert [e.kind for e in log] == ["RLF"] * spec.T


def test_rerun_is_identical():
    spec = RunSpec(T=200, beam_count=19)
    a = run_simulation(spec)
    b = run_simulation(spec)
    assert a[0] == b[0] and a[1] == b[1]


def test_trace_must_match_spec():
    spec = RunSpec(T=20, beam_count=19)
    trace = build_trace(spec)
    with pytest.raises(SimulationError):
        run_simulation(replace(spec, beam_count=127), trace)


def test_zero_parameters_follow_best_beam():
    spec = RunSpec(T=300, beam_count=19)
    trace = build_trace(spec)
    _, log, _ = run_simulation(spec, trace)
    hos = {e.t: (e.target_sat, e.target_beam) for e in log if e.kind == "HO"}
    serving = trace.slots[0].best.identity
    for geo in trace.slots:
        serving = hos.get(geo.t, serving)
        assert serving == geo.best.identity


def test_one_cell_grid_matches_simulate():
    grid = SweepGrid(ttt_values=(3.0,), hom_values=(5.0,), splits=(FunctionalSplit.split2,), beam_counts=(19,))
    base = RunSpec(T=300)
    res = exhaustive_search(grid, base)
    direct, log, _ = run_simulation(replace(base, split=FunctionalSplit.split2, beam_count=19, params=HoParams(3.0, 5.0)))
    (key,) = res.cells
    assert res.cells[key] == direct
    assert res.events[key] == log


def test_off_grid_margin_is_allowed():
    grid = SweepGrid(ttt_values=(0.0,), hom_values=(0.0, 3.0), beam_counts=(19,))
    res = exhaustive_search(grid, RunSpec(T=100))
    assert (FunctionalSplit.gnb, 19, 0.0, 3.0) in res.cells


def test_serial_and_parallel_agree():
    base = RunSpec(T=240)
    serial = exhaustive_search(SMALL, base, workers=1)
    parallel = exhaustive_search(SMALL, base, workers=2)
    assert serial.cells == parallel.cells
    assert serial.events == parallel.events
    assert serial.optimum == parallel.optimum


def test_best_cell_tie_break():
    base = RunSpec(T=60)
    res = exhaustive_search(SweepGrid(ttt_values=(0.0, 3.0), hom_values=(0.0, 5.0), beam_counts=(19,)), base)
    cells = {k: replace(v, xi=1.0) for k, v in res.cells.items()}
    opt = best_cell(cells, FunctionalSplit.gnb, 19)
    assert (opt.ttt, opt.hom) == (0.0, 0.0)


def test_default_grid_size(default_sweep):
    assert len(default_sweep.cells) == 264
    assert len(default_sweep.optimum) == 6


def test_optimum_dominates_its_slice(default_sweep):
    for (f, b), opt in default_sweep.optimum.items():
        xs = [r.xi for (g, c, _, _), r in default_sweep.cells.items() if (g, c) == (f, b)]
        assert opt.xi == max(xs)


def test_default_reports_within_bounds(default_sweep):
    for rep in default_sweep.cells.values():
        assert 0 <= rep.rlf_count <= 1200
        assert rep.availability <= 1.0 and rep.norm_cho_delay >= 0
        assert rep.uho_count + rep.pp_count <= rep.intra_ho_count + rep.inter_ho_count


def test_zero_parameter_rlf_matches_best_beam_outages(default_sweep):
    for b in (19, 127):
        trace = build_trace(RunSpec(beam_count=b))
        outages = sum(g.best is None or g.best.power < -120.0 for g in trace.slots)
        assert default_sweep.cells[(FunctionalSplit.gnb, b, 0.0, 0.0)].rlf_count == outages


def test_every_handover_has_one_scenario(default_sweep):
    for log in default_sweep.events.values():
        for e in log:
            if e.kind == "HO":
                assert e.scenario in {"A", "B1", "C1", "C2"}
                assert (e.scenario == "A") == (e.source_sat == e.target_sat)


def test_origin_beats_high_parameter_corner(default_sweep):
    for f in FunctionalSplit:
        for b in (19, 127):
            origin = default_sweep.cells[(f, b, 0.0, 0.0)].xi
            corner = default_sweep.cells[(f, b, 30.0, 15.0)].xi
            assert origin >= corner, f"{f.name}/{b}: xi(0,0)={origin:.3f} < xi(30,15)={corner:.3f}"


def test_non_candidate_serving_beam_is_lost_or_measured():
    lost = build_trace(RunSpec(T=5))
    kept = build_trace(RunSpec(T=5, lose_non_candidates=False))
    geo = lost.slots[0]
    outside = next(s for s in geo.states if s not in geo.powers)
    inside = next(iter(geo.powers))
    assert lost.serving_power(geo, (outside, 0)) == -math.inf
    assert math.isfinite(kept.serving_power(kept.slots[0], (outside, 0)))
    assert lost.serving_power(geo, (inside, 0)) == kept.serving_power(kept.slots[0], (inside, 0))
