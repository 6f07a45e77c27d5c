import math

import numpy as np
import pytest

from conftest import make_snapshot
from contagion.cascade import ScenarioConfig
from contagion.montecarlo import (
    DEFAULT_SIZE_GROUPS,
    SimulationPlan,
    cell_seed,
    resolve_groups,
    run_plan,
    run_simulation,
    run_time_series,
    simulation_rng,
    size_group_profile,
)
from contagion.network import Structure, StructureSpec
from contagion.synthetic import core_periphery_assets, random_snapshot, snapshot_from_assets

QUIET = ScenarioConfig(s=0.4, u=1e-9, g_s=1e-9, g_m=1e-9, g_l=1e-9, delta=1e-9)
ER = StructureSpec("ErdosRenyi", 0.5)


@pytest.fixture(scope="module")
def weak26():
    return snapshot_from_assets(core_periphery_assets(), 0.05)


def test_isolated_defaults_give_one_over_n(weak26):
    res = run_plan(SimulationPlan(weak26, ER, QUIET, m=5))
    assert res.alpha_bar == pytest.approx(1 / 26, abs=1e-15)
    np.testing.assert_allclose(res.alpha_bar_n, 1 / 26)


def test_no_defaults_give_zero():
    snap = snapshot_from_assets([10, 8, 6], 0.5)
    assert run_plan(SimulationPlan(snap, ER, ScenarioConfig(), m=3)).alpha_bar == 0


def test_total_collapse_gives_one():
    snap = snapshot_from_assets([10, 8, 6, 4], 0.01)
    cfg = ScenarioConfig(s=1.0, u=1.0, g_s=1, g_m=1, g_l=1, delta=1)
    assert run_plan(SimulationPlan(snap, StructureSpec("ErdosRenyi", 1.0), cfg, m=2)).alpha_bar == 1


def test_single_simulation_matches_run_simulation(rng):
    snap = random_snapshot(rng, 6)
    plan = SimulationPlan(snap, StructureSpec("TieredI", 0.4), ScenarioConfig(u=0.8, delta=0.2), m=1, master_seed=9)
    alpha, row = run_simulation(snap, plan.structure, plan.scenario, simulation_rng(9, 0))
    res = run_plan(plan)
    assert res.alpha_bar == alpha
    np.testing.assert_array_equal(res.alpha_bar_n, row)
    assert res.alpha_bar == pytest.approx(res.alpha_bar_n.sum() / snap.n)


def test_deterministic_and_jobs_invariant(rng):
    snap = random_snapshot(rng, 8)
    plan = SimulationPlan(snap, StructureSpec("Disassortative", 0.3), ScenarioConfig(u=0.9, g_l=0.1, delta=0.3),
                          m=40, master_seed=2026, keep_alphas=True)
    a, b, c = run_plan(plan), run_plan(plan), run_plan(plan, jobs=3)
    assert a.alpha_bar == b.alpha_bar == c.alpha_bar
    np.testing.assert_array_equal(a.alphas, c.alphas)
    np.testing.assert_array_equal(a.alpha_bar_n, c.alpha_bar_n)


def test_standard_error_requires_alphas(weak26):
    res = run_plan(SimulationPlan(weak26, ER, QUIET, m=2))
    with pytest.raises(ValueError):
        res.standard_error()
    res = run_plan(SimulationPlan(weak26, ER, QUIET, m=3, keep_alphas=True))
    assert res.standard_error() == 0


def test_cell_seed_depends_on_month_and_kind_only():
    a = cell_seed(1, "2017-03", StructureSpec("TieredII", 0.5))
    assert a == cell_seed(1, "2017-03", StructureSpec("TieredII", 0.8))
    assert a != cell_seed(1, "2017-02", StructureSpec("TieredII", 0.5))
    assert a != cell_seed(1, "2017-03", StructureSpec("TieredI", 0.5))
    assert a != cell_seed(2, "2017-03", StructureSpec("TieredII", 0.5))
    assert 0 <= a < 2**64


class TestTimeSeries:
    def test_shape_is_months_by_structures(self, rng):
        base = random_snapshot(rng, 5)
        months = [f"2016-{k:02d}" for k in range(1, 5)]
        snaps = [make_snapshot(base.buckets, base.capital, m) for m in months]
        specs = [StructureSpec(k, 0.5) for k in Structure]
        cells = run_time_series(snaps, specs, ScenarioConfig(), m=2, master_seed=1)
        assert len(cells) == 24
        assert [(c.month, c.structure.kind) for c in cells] == [(m, k) for m in months for k in Structure]

    def test_single_cell_equals_run_plan(self, rng):
        snap = random_snapshot(rng, 6)
        cfg = ScenarioConfig(u=0.7, delta=0.2)
        (cell,) = run_time_series([snap], [ER], cfg, m=10, master_seed=4)
        plan = SimulationPlan(snap, ER, cfg, 10, cell_seed(4, snap.month, ER))
        assert cell.alpha_bar == run_plan(plan).alpha_bar

    def test_constant_snapshots_agree_within_noise(self, rng):
        base = random_snapshot(rng, 8, ratio_range=(0.1, 0.45))
        snaps = [make_snapshot(base.buckets, base.capital, f"2016-{k:02d}") for k in range(1, 5)]
        cfg = ScenarioConfig(s=0.4, u=0.6, g_s=0.05, g_m=0.05, g_l=0.05, delta=0.3)
        cells = run_time_series(snaps, [ER], cfg, m=300, master_seed=11, keep_alphas=True)
        alphas = np.array([c.alpha_bar for c in cells])
        se = max(c.standard_error for c in cells)
        assert np.ptp(alphas) <= 2 * 3 * se + 1e-12

    def test_parallel_cells_match_serial(self, rng):
        snap = random_snapshot(rng, 6)
        specs = [StructureSpec("ErdosRenyi", 0.5), StructureSpec("Assortative", 0.5)]
        cfg = ScenarioConfig(u=0.8, delta=0.3)
        serial = run_time_series([snap], specs, cfg, m=8, master_seed=3)
        parallel = run_time_series([snap], specs, cfg, m=8, master_seed=3, jobs=2)
        assert [c.alpha_bar for c in serial] == [c.alpha_bar for c in parallel]

    def test_needs_snapshots(self):
        with pytest.raises(ValueError):
            run_time_series([], [ER], ScenarioConfig())


class TestSizeGroups:
    def test_default_groups_on_26_banks(self):
        assert resolve_groups(DEFAULT_SIZE_GROUPS, 26)[-1] == ("very small", 14, 26)

    @pytest.mark.parametrize("groups", [
        [("a", 1, 3)],
        [("a", 2, 5)],
        [("a", 1, 2), ("b", 4, 5)],
        [("a", 1, 6)],
    ])
    def test_groups_must_partition(self, groups):
        with pytest.raises(ValueError):
            resolve_groups(groups, 5)

    def test_single_group_is_system_mean(self, rng):
        snap = random_snapshot(rng, 6)
        res = run_plan(SimulationPlan(snap, ER, ScenarioConfig(u=0.5), m=5))
        prof = size_group_profile(res, [("all", 1, None)])
        assert prof.groups[0][3] == pytest.approx(res.alpha_bar_n.mean())
        assert [x for x, _ in prof.scatter] == pytest.approx([math.log(a) for a in snap.assets])

    def test_dominant_bank_has_largest_group_mean(self):
        assets = [1000.0] + [10.0 - 0.1 * k for k in range(7)]
        snap = snapshot_from_assets(assets, 0.3)
        cfg = ScenarioConfig(s=0.4, u=0.3, g_s=0.015, g_m=0.015, g_l=0.015, delta=0.015)
        res = run_plan(SimulationPlan(snap, StructureSpec("TieredII", 0.5), cfg, m=50, master_seed=5))
        prof = size_group_profile(res, [("giant", 1, 1), ("rest", 2, None)])
        assert prof.groups[0][3] > prof.groups[1][3]
