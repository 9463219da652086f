import csv
import json
from fractions import Fraction

import numpy as np
import pytest

from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import GraphEngine
from kuramoto_certify.exceptions import DomainError
from kuramoto_certify.schemas import Stability, Verdict
from kuramoto_certify.tools.basin_tools import run_basin, wilson_interval
from kuramoto_certify.tools.certify_tools import certify_state, run_certify, run_region_scan
from kuramoto_certify.tools.figure_tools import FIGURE1_HEADER, figure1_row, run_figure1, run_razor_edge
from kuramoto_certify.tools import pattern_tools
from kuramoto_certify.tools.pattern_tools import (
    circulant_descriptor,
    first_confirmed_twist,
    run_chain_sweep,
    run_pattern_search,
    stable_twists,
)
from kuramoto_certify.utils.file_utils import FileUtils


# --- 吸引域 ---
def test_wilson_interval():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0
    assert hi == pytest.approx(0.2775, abs=1e-4)
    lo, hi = wilson_interval(10, 10)
    assert lo == pytest.approx(0.7225, abs=1e-4)
    assert hi == 1.0
    lo, hi = wilson_interval(50, 100)
    assert 0.5 - lo == pytest.approx(hi - 0.5)
    assert wilson_interval(0, 0) == (0.0, 1.0)


@pytest.mark.parametrize("trials", [1, 3, 7, 10, 49, 100, 333, 1000, 12345])
def test_wilson_interval_reaches_the_ends(trials):
    assert wilson_interval(trials, trials)[1] == 1.0
    assert wilson_interval(0, trials)[0] == 0.0
    lo, hi = wilson_interval(trials, trials)
    assert 0.0 < lo < 1.0


def test_basin_complete_graph_always_syncs():
    estimate = run_basin(GraphEngine.complete(6), 100, seed=1, graph_id="complete:6", t_end=200.0)
    assert estimate.synced == 100
    assert estimate.fraction == 1.0
    assert estimate.unresolved == 0
    assert estimate.graph_id == "complete:6"
    assert estimate.wilson_interval[1] == 1.0


def test_basin_is_deterministic_across_workers():
    c5 = GraphEngine.cycle(5)
    one = run_basin(c5, 60, seed=42, t_end=300.0, workers=1)
    many = run_basin(c5, 60, seed=42, t_end=300.0, workers=4)
    assert one == many
    assert one.synced + one.patterns + one.unresolved == 60


@pytest.mark.slow
def test_basin_c5_has_a_pattern_basin():
    estimate = run_basin(GraphEngine.cycle(5), 500, seed=20240601, graph_id="cycle:5")
    assert 0.0 < estimate.fraction < 1.0
    assert estimate.patterns > 0


def test_basin_rejects_zero_trials():
    with pytest.raises(DomainError):
        run_basin(GraphEngine.complete(4), 0)


# --- 图案搜索 ---
def test_stable_twists_prefilter():
    assert stable_twists(5, (1,)) == [1]
    assert stable_twists(12, (1,)) == [1, 2]
    assert stable_twists(5, (1, 2)) == []
    assert stable_twists(4, (1,)) == []


def test_rejected_twist_falls_through_to_next_q(monkeypatch):
    confirm = pattern_tools.confirm_twist
    monkeypatch.setattr(pattern_tools, "confirm_twist", lambda g, q: None if q == 1 else confirm(g, q))

    q, _, spectrum, certificate = first_confirmed_twist(GraphEngine.cycle(12), [1, 2])
    assert q == 2
    assert spectrum.classification == Stability.STABLE
    assert certificate.violations() == []
    assert first_confirmed_twist(GraphEngine.cycle(12), [1]) is None

    record = run_pattern_search(5)
    assert record.found
    assert record.offsets == [2]
    assert record.q == 2


def test_pattern_search_n5_finds_c5():
    record = run_pattern_search(5)
    assert record.found and record.complete
    assert record.offsets == [1]
    assert record.q == 1
    assert record.mu == 0.5
    assert record.spectrum.classification == Stability.STABLE
    assert record.certificate.violations() == []


def test_pattern_search_n10_stays_below_bound():
    record = run_pattern_search(10)
    assert record.found and record.complete
    assert Fraction(record.mu).limit_denominator(9) <= GraphEngine.sync_sufficient_mu(10)
    assert record.certificate.eq10_slack >= -1e-9
    assert record.spectrum.classification == Stability.STABLE


def test_pattern_search_budget_truncation():
    record = run_pattern_search(20, budget=3)
    assert not record.complete
    assert not record.found
    assert record.examined <= 3


def test_pattern_search_rejects_small_n():
    with pytest.raises(DomainError):
        run_pattern_search(4)
    with pytest.raises(DomainError):
        run_pattern_search(8, budget=0)


def test_circulant_descriptor_round_trip():
    descriptor = circulant_descriptor(12, (1, 2, 6))
    assert descriptor == "circulant:12:1,2,6"
    assert GraphEngine.from_descriptor(descriptor) == GraphEngine.circulant(12, {1, 2, 6})


def test_chain_sweep_small():
    report = run_chain_sweep(n_max=9, trials=3, seed=5, t_end=200.0)
    assert report.passed
    assert report.graphs_checked > 0
    assert report.states_checked > report.graphs_checked


@pytest.mark.slow
def test_chain_sweep_up_to_24():
    report = run_chain_sweep(n_max=24, trials=100)
    assert report.stable_patterns == []
    assert report.certificate_failures == []
    assert report.basin_failures == []


# --- Figure 1 / razor edge ---
def test_figure1_row_n20():
    row = figure1_row(20, budget=200)
    assert row.bound == "14/19"
    assert row.bound_value == pytest.approx(0.7368, abs=1e-4)
    assert row.red_square == pytest.approx(14 / 19)
    assert row.pattern_mu is None or row.pattern_mu <= row.bound_value


def test_run_figure1_writes_csv(tmp_path):
    out = tmp_path / "figure1.csv"
    rows = run_figure1((5, 8), budget=500, output_path=str(out), workers=2)
    assert [row.n for row in rows] == [5, 6, 7, 8]
    assert rows[0].bound_value == 0.5
    assert rows[0].red_square is None
    assert rows[3].red_square == pytest.approx(5 / 7)
    for row in rows:
        if row.pattern_mu is not None:
            assert row.pattern_mu <= row.bound_value

    with open(out, newline="", encoding="utf-8") as fh:
        table = list(csv.reader(fh))
    assert table[0] == FIGURE1_HEADER
    assert len(table) == 5
    assert table[1][0] == "5"


def test_run_figure1_rejects_bad_range():
    with pytest.raises(DomainError):
        run_figure1((4, 10))
    with pytest.raises(DomainError):
        run_figure1((10, 6))


def test_razor_edge(tmp_path):
    out = tmp_path / "razor.json"
    rows = run_razor_edge((1, 8), output_path=str(out))
    assert [row.connectivity for row in rows] == [str(Fraction(3 * m - 1, 4 * m - 1)) for m in range(1, 9)]
    assert [row.connectivity for row in rows[:4]] == ["2/3", "5/7", "8/11", "11/15"]
    for row in rows:
        assert row.residual < 1e-12
        assert row.spectrum.classification == Stability.MARGINAL
        assert row.spectrum.zero_multiplicity == 4
        assert row.basin_fraction is None
    assert all(a.connectivity_value < b.connectivity_value < 0.75 for a, b in zip(rows, rows[1:]))
    assert len(json.loads(out.read_text())) == 8


def test_razor_edge_connectivity_limit():
    rows = run_razor_edge((10, 10))
    assert rows[0].connectivity == "29/39"


# --- 证书批处理 ---
def test_certify_all_in_phase_k8():
    payload, code = certify_state(GraphEngine.complete(8), DynamicsEngine.all_in_phase(8))
    assert code == 0
    assert payload["consistent"]
    assert payload["certificate"].theorem1_verdict == Verdict.ALL_IN_PHASE_FORCED
    assert payload["spectrum"]["classification"] == "Stable"


def test_certify_twisted_c4_on_boundary(c4_twisted):
    g, s = c4_twisted
    payload, code = certify_state(GraphEngine.add_self_loops(g), s)
    assert code == 0
    assert payload["spectrum"]["classification"] == "Marginal"
    assert payload["certificate"].eq9_slack == pytest.approx(0.0, abs=1e-12)
    assert payload["violations"] == []


def test_certify_unstable_pair():
    payload, code = certify_state(GraphEngine.complete(2), PhaseState([0.0, np.pi]))
    assert code == 0
    assert payload["spectrum"]["classification"] == "Unstable"
    assert "eq5" in payload["violations"]
    assert payload["consistent"]


def test_certify_rejects_size_mismatch():
    with pytest.raises(DomainError):
        certify_state(GraphEngine.complete(4), DynamicsEngine.all_in_phase(3))


def test_run_certify_files(tmp_path):
    graph_path = FileUtils.save_graph(GraphEngine.cycle(5), tmp_path / "c5.txt")
    state_path = FileUtils.save_state(DynamicsEngine.twisted_state(5, 1), tmp_path / "c5.state")
    out = tmp_path / "report.json"
    payload, code = run_certify(str(graph_path), str(state_path), output_path=str(out))
    assert code == 0
    assert payload["certificate"].eq9_slack == pytest.approx(0.3, abs=1e-12)
    written = json.loads(out.read_text())
    assert written["spectrum"]["classification"] == "Stable"
    assert written["consistent"] is True

    payload, code = run_certify(graph="cycle:5", state_file=str(state_path))
    assert code == 0
    with pytest.raises(DomainError):
        run_certify(state_file=str(state_path))
    with pytest.raises(DomainError):
        run_certify(graph="cycle:5")


def test_run_region_scan_outputs(tmp_path):
    out = tmp_path / "region.json"
    region = run_region_scan(0.7495, grid_step=0.005, output_path=str(out))
    summary = json.loads(out.read_text())
    assert summary["feasible_count"] == region.feasible_count
    assert len(summary["components"]) == len(region.components)

    with open(tmp_path / "region_points.csv", newline="", encoding="utf-8") as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["rho1", "rho2_abs", "feasible"]
    assert len(table) == 1 + 201 * 201
