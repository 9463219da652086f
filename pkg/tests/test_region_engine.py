import numpy as np
import pytest

from kuramoto_certify.config import Config
from kuramoto_certify.engines.certificate_engine import CertificateEngine
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import GraphEngine
from kuramoto_certify.engines.region_engine import RegionEngine
from kuramoto_certify.exceptions import CertificateInapplicableError, DomainError

from tests.conftest import four_group_state


def _anti_phase_graph(per_group: int):
    """四组相位 0, π/2, π, 3π/2；只有相对的两组之间缺边"""
    n = 4 * per_group
    group = np.arange(n) // per_group
    adj = (group[:, None] - group[None, :]) % 4 != 2
    return GraphEngine.from_adjacency(adj)


def _split_components(region):
    low = min(region.components, key=lambda c: c.rho1_min)
    high = [c for c in region.components if c is not low]
    return low, high


# --- 可行域 ---
def test_scan_near_three_quarters_reproduces_thresholds():
    region = RegionEngine.feasibility_scan(0.7495)
    low, high = _split_components(region)
    assert low.rho1_min == 0.0
    assert low.rho1_max == pytest.approx(0.03166, abs=1e-3)
    assert low.rho2_max == pytest.approx(0.04474, abs=1e-3)
    assert high
    assert min(c.rho1_min for c in high) == pytest.approx(0.7065, abs=1e-3)
    assert region.summary().feasible_count == region.feasible_count


@pytest.mark.slow
def test_fine_scan_thresholds():
    region = RegionEngine.feasibility_scan(0.7495, grid_step=1e-4)
    assert len(region.components) == 2
    low, high = _split_components(region)
    assert low.rho1_max == pytest.approx(0.03166, abs=5e-4)
    assert low.rho2_max == pytest.approx(0.04474, abs=5e-4)
    assert high[0].rho1_min == pytest.approx(0.7065, abs=5e-4)


def test_scan_above_three_quarters_has_no_low_component():
    region = RegionEngine.feasibility_scan(0.76)
    points = region.feasible_points()
    assert points.size
    assert points[:, 0].min() > np.sqrt(2.0) * 0.24
    assert not region.contains(0.0, 0.0)
    assert all(c.rho1_min > 0.3 for c in region.components)


def test_scan_far_below_includes_origin():
    region = RegionEngine.feasibility_scan(0.5, grid_step=0.01, refine=False)
    assert region.mask[0, 0]
    assert region.contains(0.0, 0.0)


def test_scan_is_independent_of_workers():
    one = RegionEngine.feasibility_scan(0.7495, grid_step=0.002, refine=False, workers=1)
    many = RegionEngine.feasibility_scan(0.7495, grid_step=0.002, refine=False, workers=4)
    assert np.array_equal(one.mask, many.mask)
    assert one.summary() == many.summary()


def test_feasible_set_shrinks_as_mu_tilde_grows():
    levels = (0.6, 0.7, 0.74, 0.7495, 0.75, 0.76, 0.8, 0.9)
    masks = [RegionEngine.feasibility_scan(mu, grid_step=0.005, refine=False).mask for mu in levels]
    for lower, higher in zip(masks, masks[1:]):
        assert not np.any(higher & ~lower)

    rho1, rho2 = np.meshgrid(np.linspace(0.0, 1.0, 1001), np.linspace(0.0, 1.0, 1001), indexing="ij")
    previous = RegionEngine.feasible(rho1, rho2, 0.7)
    for mu in (0.72, 0.7495, 0.751, 0.78):
        current = RegionEngine.feasible(rho1, rho2, mu)
        assert not np.any(current & ~previous)
        previous = current


def test_scan_rows_and_stride():
    region = RegionEngine.feasibility_scan(0.7495, grid_step=0.01, refine=False)
    rows = list(region.iter_rows(stride=2))
    assert len(rows) == 51 * 51
    assert rows[0] == (0.0, 0.0, 1)
    assert sum(row[2] for row in rows) == region.feasible_points(stride=2).shape[0]


def test_scan_rejects_bad_grid_step():
    for step in (0.0, -1e-3, 0.6):
        with pytest.raises(DomainError):
            RegionEngine.feasibility_scan(0.7495, grid_step=step)


def test_feasible_matches_certificates():
    rho1 = np.array([0.01, 0.02, 0.3, 0.8])
    rho2 = np.array([0.01, 0.2, 0.1, 0.9])
    mask = RegionEngine.feasible(rho1, rho2, 0.7495)
    for r1, r2, flag in zip(rho1, rho2, mask):
        eq10 = CertificateEngine.eq10_slack_values(r1, r2, 0.7495) >= 0.0
        eq11 = CertificateEngine.eq11_slack(r1, r2, 0.7495) >= 0.0
        assert flag == (eq10 and eq11)


# --- 常数推导 ---
def test_derived_constants():
    spread = RegionEngine.cluster_spread_threshold()
    assert spread == pytest.approx(0.1452, abs=1e-3)
    assert spread <= Config.CLUSTER_SPREAD
    fraction = RegionEngine.cluster_size_fraction(0.7495)
    assert fraction == pytest.approx(0.2495, abs=1e-4)
    assert fraction >= Config.CLUSTER_SIZE_FRACTION
    absolute, per_non_edge = RegionEngine.eq14_constants()
    assert absolute == pytest.approx(-0.49900, abs=1e-5)
    assert per_non_edge == pytest.approx(-1.9921, abs=1e-3)
    with pytest.raises(DomainError):
        RegionEngine.cluster_spread_threshold(0.5)


# --- eq14 ---
def test_eq14_on_crafted_four_cluster_state():
    g = _anti_phase_graph(2)
    s = four_group_state(2, 0.0)
    result = RegionEngine.eq14_check(g, s)

    cos_m = np.cos(np.subtract.outer(s.theta, s.theta))
    oracle = np.sum((1.0 - g.weights) * (cos_m - cos_m ** 2)) / g.n ** 2
    assert result.lhs_normalized == pytest.approx(oracle)
    assert result.lhs_normalized == pytest.approx(-0.5)
    assert result.absolute_threshold == -0.49900
    assert result.scaled_threshold == pytest.approx(-1.9921 * 0.25)
    assert result.holds_absolute
    assert result.holds_scaled


def test_eq14_outside_regime():
    g = GraphEngine.complete(5)
    with pytest.raises(CertificateInapplicableError):
        RegionEngine.eq14_check(g, DynamicsEngine.all_in_phase(5))
    result = RegionEngine.eq14_check(g, DynamicsEngine.all_in_phase(5), enforce_regime=False)
    assert result.lhs_normalized == pytest.approx(0.0, abs=1e-12)


def test_in_case_ii():
    assert RegionEngine.in_case_ii(0.0, 0.0, 0.75)
    assert not RegionEngine.in_case_ii(0.04, 0.0, 0.75)
    assert not RegionEngine.in_case_ii(0.0, 0.05, 0.75)
    assert not RegionEngine.in_case_ii(0.0, 0.0, 0.7)


# --- 四簇分解 ---
def test_cluster_exact_four_groups():
    report = RegionEngine.cluster_analysis(four_group_state(10, 0.3))
    assert report.phi == pytest.approx(0.3, abs=1e-3)
    assert report.cluster_sizes == [10, 10, 10, 10]
    assert report.rogue_count == 0
    assert max(report.cluster_spreads) < 1e-3
    assert not report.certified_regime


def test_cluster_all_in_phase():
    report = RegionEngine.cluster_analysis(DynamicsEngine.all_in_phase(12))
    assert sorted(report.cluster_sizes) == [0, 0, 0, 12]
    assert report.rogue_count == 0


def test_cluster_rogue_oscillator():
    base = four_group_state(10, 0.3).theta
    s = PhaseState(np.append(base, 0.3 + np.pi / 4))
    report = RegionEngine.cluster_analysis(s)
    assert report.n == 41
    assert report.rogue_count == 1
    assert sum(report.cluster_sizes) == 40


def test_cluster_spread_within_threshold():
    rng = np.random.default_rng(17)
    base = four_group_state(25, 1.0).theta
    s = PhaseState(base + rng.uniform(-0.05, 0.05, size=base.size))
    report = RegionEngine.cluster_analysis(s)
    assert report.rogue_count == 0
    assert report.cluster_sizes == [25, 25, 25, 25]
    assert max(report.cluster_spreads) <= report.spread_threshold / 2


def test_cluster_certified_regime_flags():
    s = four_group_state(10, 0.3)
    report = RegionEngine.cluster_analysis(s, mu_tilde=0.76)
    assert report.certified_regime
    assert report.anti_sync_pair_ok
    assert report.rogue_ok

    lopsided = PhaseState(np.concatenate([np.full(30, 0.0), np.full(10, np.pi)]))
    outside = RegionEngine.cluster_analysis(lopsided, mu_tilde=0.76)
    assert not outside.certified_regime
    assert outside.anti_sync_pair_ok is None

    below = RegionEngine.cluster_analysis(s, mu_tilde=0.7)
    assert not below.certified_regime
    assert below.rogue_ok is None
