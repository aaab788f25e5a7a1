from __future__ import annotations

import math

import numpy as np
import pytest

from wbflux.experiments import (
    PRESET_IDS,
    TOLERANCES,
    Tolerance,
    discretize,
    parse_rows,
    preset,
    reference_cache_key,
    reference_distances,
    reference_solution,
    run_table,
    snapshot_csv,
    snapshot_dat,
    with_horizon,
    write_snapshots,
)
from wbflux.grid import SolverState, project_initial, project_topography


def test_preset_examples():
    assert preset("tc1").exact(2.0) == pytest.approx(1.0)
    x = np.linspace(0, 4, 101)
    assert np.all(preset("tc3").exact(x) == 0.0)
    z = preset("tc4").problem.topo.z
    assert z(1.4) == 0.0
    assert z(1.6) == pytest.approx(math.sin(1.6 * math.pi))


def test_preset_ids_and_aliases():
    for pid in PRESET_IDS:
        assert preset(pid).id == pid
        assert preset(pid.split("_")[0]).id == pid
    with pytest.raises(KeyError):
        preset("tc9")


def test_preset_table_parameters():
    p = preset("tc1")
    wb = p.table_rows["well_balanced"]
    assert [(r.dx, r.dt) for r in wb] == [(1e-1, 5.7e-6), (1e-2, 3.5e-6), (1e-3, 7.3e-7), (1e-4, 8e-8)]
    assert [r.expensive for r in wb] == [False, False, True, True]
    assert p.table_rows["standard"][0].dt == 4.5e-6
    tc3 = preset("tc3").table_rows["well_balanced"]
    assert {r.dt for r in tc3} == {6.14e-6}
    assert preset("tc2").snapshot_times == (0.25, 0.75, 1.75, 2.75)
    assert preset("tc2").reference_spec == ("standard", 4000)


@pytest.mark.parametrize("pid", ["tc1", "tc4"])
def test_projected_data_is_discrete_equilibrium(pid):
    p = preset(pid)
    disc = discretize(p, 0.1)
    u = project_initial(p.problem, disc).interior
    z = project_topography(p.problem.topo, disc).interior
    np.testing.assert_allclose(u + z, 2.0, atol=1e-13)


def test_with_horizon():
    p = with_horizon(preset("tc2"), 1.0)
    assert p.problem.horizon == 1.0 and p.snapshot_times == (0.25, 0.75)
    assert with_horizon(preset("tc2"), 0.1).snapshot_times == (0.1,)


def test_parse_rows():
    assert parse_rows("1-2", 4) == [1, 2]
    assert parse_rows("3,1", 4) == [1, 3]
    assert parse_rows(None, 3) == [1, 2, 3]
    with pytest.raises(ValueError):
        parse_rows("5", 4)


def test_run_table_tc1_well_balanced_adaptive():
    outcome = run_table("tc1", "well_balanced", "1", dt_mode="adaptive")
    assert outcome.passed
    rep = outcome.reports[0]
    assert rep.l1_error == pytest.approx(5.02e-2, rel=0.02)
    assert rep.numerical_error <= 1e-8
    assert outcome.csv().splitlines()[0] == "dx,dt,l1_error,num_error,eoc,wall_time_s"


def test_run_table_gates_expensive_rows():
    outcome = run_table("tc1", "well_balanced", "1,3", dt_mode="adaptive")
    assert [r.gated for r in outcome.rows] == [False, True]
    assert "GATED" in outcome.diff_report()
    assert len(outcome.csv().splitlines()) == 2


def test_run_table_tc3_row1():
    outcome = run_table("tc3", "well_balanced", "1")
    assert outcome.reports[0].l1_error == pytest.approx(4.388e-1, rel=0.10)
    strict = run_table("tc3", "well_balanced", "1", tolerance=Tolerance(l1_rel=1e-5))
    assert not strict.passed


def test_tolerance_table_covers_published_tables():
    for pid in PRESET_IDS:
        for kind in preset(pid).table_rows:
            assert (pid, kind) in TOLERANCES


def test_snapshot_writers(tmp_path):
    p = preset("tc1")
    disc = discretize(p, 1.0)
    s = SolverState(0, 0.0, [1.0, 2.0, 3.0, 4.0], 0.0, 0.0)
    text = snapshot_csv(disc, s)
    assert text.splitlines() == ["x,u", "0.5,1.0", "1.5,2.0", "2.5,3.0", "3.5,4.0"]
    dat = snapshot_dat(disc, {0.5: s, 0.25: s})
    assert dat.startswith("# t = 0.25\n") and "\n\n\n# t = 0.5\n" in dat
    paths = write_snapshots(tmp_path, "run", disc, {0.25: s})
    assert [q.name for q in paths] == ["run_snap00_t0.25.csv", "run.dat"]


def test_reference_cache_roundtrip(tmp_path):
    p = with_horizon(preset("tc2"), 0.25)
    key = reference_cache_key(p, "standard", 80)
    assert key == reference_cache_key(with_horizon(preset("tc2"), 0.25), "standard", 80)
    assert key != reference_cache_key(p, "standard", 160)
    disc, first = reference_solution(p, 80, cache_dir=tmp_path)
    assert len(list(tmp_path.iterdir())) == 1
    _, second = reference_solution(p, 80, cache_dir=tmp_path)
    np.testing.assert_array_equal(first[0.25].interior, second[0.25].interior)
    assert disc.n_cells == 80


def test_reference_distances_short_horizon(tmp_path):
    p = with_horizon(preset("tc2"), 0.75)
    dist = reference_distances(p, 0.1, n_ref=400, cache_dir=tmp_path)
    assert set(dist) == {"well_balanced", "standard"}
    assert set(dist["standard"]) == {0.25, 0.75}
    assert all(v >= 0 for d in dist.values() for v in d.values())
