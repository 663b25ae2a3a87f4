import csv
import math

import numpy as np
import pytest

from mintycut import AlgoParams, estimate_lipschitz, monotonicity_violation, run_alg3
from mintycut.bench import (
    COURNOT_COLUMNS,
    TABLE_COLUMNS,
    CournotConfig,
    Problem1Config,
    TableRow,
    export_region,
    gen_cournot,
    gen_problem1,
    run_cournot_study,
    run_table,
    table_cells,
)


@pytest.mark.parametrize("kind", ["cube", "sphere", "simplex"])
def test_problem1_generator(kind):
    cfg = Problem1Config(n=12, l=3, set_kind=kind, b_norm=2.5, L_target=20.0, seed=4)
    inst = gen_problem1(cfg)
    op = inst.operator
    assert np.linalg.norm(op.b) == pytest.approx(2.5)
    rng = np.random.default_rng(99)
    x = inst.set.sample_uniform(rng)
    assert np.all(op(x)[-3:] == 0)
    assert monotonicity_violation(op, inst.set, 300, rng) >= -1e-9
    # a fresh estimate (same safety factor as the calibration) lands close to the target
    est = estimate_lipschitz(op, inst.set, 1000, np.random.default_rng(123))
    assert 0.95 * 20 <= est <= 1.05 * 20
    assert inst.lipschitz == 20.0
    again = gen_problem1(cfg)
    assert np.array_equal(again.operator.M, op.M) and np.array_equal(again.objective.u, inst.objective.u)


def test_problem1_config_validation():
    with pytest.raises(ValueError):
        Problem1Config(n=5, l=5)
    with pytest.raises(ValueError):
        Problem1Config(set_kind="torus")
    with pytest.raises(ValueError):
        Problem1Config(b_norm=-1.0)


def test_cournot_zero_welfare_when_costs_exceed_prices():
    cfg = CournotConfig(n_firms=2, n_locations=2, a=(1.0, 1.0), b=(0.01, 0.01), cost_range=(1.5, 1.5))
    inst = gen_cournot(cfg)
    tr = run_alg3(inst, AlgoParams(practical_stop=True), rng=0)
    assert -tr.final.f == pytest.approx(0.0, abs=1e-3)


def test_cournot_monopoly_welfare():
    # one firm, one market, linear price 1 - 0.01 S, unit cost 0.5, capacity 5:
    # selling at capacity is both the equilibrium and the welfare optimum, 5 * 0.95 - 2.5
    cfg = CournotConfig(n_firms=1, n_locations=1, sigma=1.0, a=(1.0,), b=(0.01,), cost_range=(0.5, 0.5))
    inst = gen_cournot(cfg)
    assert inst.objective.welfare(np.array([5.0, 5.0])) == pytest.approx(2.25)
    tr = run_alg3(inst, AlgoParams(practical_stop=True), rng=0)
    assert -tr.final.f == pytest.approx(2.25, abs=1e-3)


def test_cournot_config_validation():
    with pytest.raises(ValueError):
        CournotConfig(sigma=0.5)
    with pytest.raises(ValueError):
        CournotConfig(a=(1.0,))
    with pytest.raises(ValueError):
        CournotConfig(capacities=[[1.0]]).capacity_matrix()


def test_table_row_checks():
    TableRow("cube", 1.0, 0.1, 2, 3, 0.5, 1.0, 0.5)
    with pytest.raises(ValueError):
        TableRow("cube", 1.0, 0.1, 2, 3, 0.5, 1.0, 0.4)
    with pytest.raises(ValueError):
        TableRow("cube", 1.0, 0.1, 2, 3, 2.0, 1.0, 2.0)


def test_table_cells():
    cells = table_cells("table2", sets=("cube",))
    assert [c[1] for c in cells] == [20.0, 50.0, 100.0]
    cells = table_cells("table4", sets=("sphere",))
    assert [(kw["n"], kw["l"]) for _, _, kw in cells] == [(25, 5), (50, 10), (75, 15), (100, 20)]
    # E for the 50-dim unit cube, eps 0.01: 2 sqrt(50) sqrt(L eps)
    for L, E in ((50, 10.0), (100, 2 * math.sqrt(50) * 1.0)):
        assert 2 * math.sqrt(50) * math.sqrt(L * 0.01) == pytest.approx(E)
    with pytest.raises(ValueError):
        table_cells("table9")


def test_small_table_run(tmp_path):
    out = tmp_path / "t.csv"
    kw = dict(sets=("cube", "sphere"), values=[0.0])
    rows = run_table("table1", 2, out=out, seed=3, **kw)
    with open(out) as fh:
        lines = list(csv.reader(fh))
    assert lines[0] == TABLE_COLUMNS and len(lines) == 3
    for r in rows:
        assert 0 <= r.eps_tilde <= r.E + 1e-9
    again = run_table("table1", 2, seed=3, **kw)
    assert [r.eps_tilde for r in again] == [r.eps_tilde for r in rows]


def test_region_export(tmp_path):
    out = tmp_path / "r.csv"
    rows = export_region(grid=10, out=out, minty_per_axis=40)
    assert len(rows) == 100
    with open(out) as fh:
        assert next(csv.reader(fh)) == ["x1", "x2", "psi_S", "psi_M_oracle", "label"]
    with pytest.raises(ValueError):
        export_region(grid=5)
    with pytest.raises(ValueError):
        export_region("other", grid=10)


def test_cournot_study_csv(tmp_path):
    out = tmp_path / "c.csv"
    params = AlgoParams(practical_stop=True, time_limit=1.0, max_outer_iterations=200)
    summary, runs = run_cournot_study(CournotConfig(n_firms=2, n_locations=2, a=(1, 1), b=(0.01, 0.01)),
                                      2, out, params)
    assert len(runs) == 2
    with open(out) as fh:
        lines = list(csv.reader(fh))
    assert lines[0] == COURNOT_COLUMNS and len(lines) == 2
    assert summary["max_time_sec"] >= summary["mean_time_sec"]
