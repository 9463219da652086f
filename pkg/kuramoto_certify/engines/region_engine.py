import logging
from dataclasses import dataclass, field
from multiprocessing.pool import ThreadPool
from typing import Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import ndimage
from scipy.optimize import brentq

from kuramoto_certify.config import Config
from kuramoto_certify.engines.certificate_engine import CertificateEngine
from kuramoto_certify.engines.dynamics_engine import PhaseState
from kuramoto_certify.engines.graph_engine import Graph, GraphEngine
from kuramoto_certify.engines.moment_engine import MomentEngine
from kuramoto_certify.exceptions import CertificateInapplicableError, DomainError
from kuramoto_certify.schemas import ClusterReport, ComponentBox, RegionSummary

logger = logging.getLogger("kuramoto_certify.region")

HALF_PI = 0.5 * np.pi


class Eq14Result(NamedTuple):
    lhs_normalized: float
    absolute_threshold: float
    scaled_threshold: float

    @property
    def holds_absolute(self) -> bool:
        return self.lhs_normalized <= self.absolute_threshold + Config.CERT_TOL

    @property
    def holds_scaled(self) -> bool:
        return self.lhs_normalized <= self.scaled_threshold + Config.CERT_TOL


@dataclass
class FeasibilityRegion:
    """(ρ₁, |ρ₂|) 网格上同时满足 eq10 与 eq11 的点"""

    mu_tilde: float
    grid_step: float
    rho1_axis: np.ndarray
    rho2_axis: np.ndarray
    mask: np.ndarray
    components: List[ComponentBox] = field(default_factory=list)

    @property
    def feasible_count(self) -> int:
        return int(self.mask.sum())

    def feasible_points(self, stride: int = 1) -> np.ndarray:
        i, j = np.nonzero(self.mask[::stride, ::stride])
        return np.column_stack([self.rho1_axis[::stride][i], self.rho2_axis[::stride][j]])

    def contains(self, rho1: float, rho2_abs: float) -> bool:
        return bool(RegionEngine.feasible(np.asarray(rho1), np.asarray(rho2_abs), self.mu_tilde))

    def iter_rows(self, stride: int = 1) -> Iterator[Tuple[float, float, int]]:
        """CSV 点云 (rho1, rho2_abs, feasible)"""
        r1 = self.rho1_axis[::stride]
        r2 = self.rho2_axis[::stride]
        sub = self.mask[::stride, ::stride]
        for i, rho1 in enumerate(r1):
            for j, rho2 in enumerate(r2):
                yield float(rho1), float(rho2), int(sub[i, j])

    def summary(self) -> RegionSummary:
        return RegionSummary(
            mu_tilde=self.mu_tilde,
            grid_step=self.grid_step,
            feasible_count=self.feasible_count,
            components=self.components,
        )


class RegionEngine:
    """接近 3/4 时的可行域扫描、四簇分解与非边平均界"""

    # --- 可行域 ---
    @staticmethod
    def feasible(rho1: np.ndarray, rho2_abs: np.ndarray, mu_tilde: float) -> np.ndarray:
        eq10 = CertificateEngine.eq10_slack_values(rho1, rho2_abs, mu_tilde) >= 0.0
        _, bound = CertificateEngine.eq11_best_bound(rho1, rho2_abs, mu_tilde)
        return eq10 & (rho2_abs >= bound)

    @staticmethod
    def _bisect(mu_tilde: float, inside: Tuple[float, float], outside: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = np.array(inside, dtype=float), np.array(outside, dtype=float)
        while np.max(np.abs(hi - lo)) > Config.BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if RegionEngine.feasible(mid[0], mid[1], mu_tilde):
                lo = mid
            else:
                hi = mid
        edge = 0.5 * (lo + hi)
        return float(edge[0]), float(edge[1])

    @staticmethod
    def _refine_box(region: FeasibilityRegion, labels: np.ndarray, label: int, box: Tuple[slice, slice],
                    max_cells: int = 64) -> ComponentBox:
        r1, r2, mu = region.rho1_axis, region.rho2_axis, region.mu_tilde
        rows, cols = box
        i_lo, i_hi, j_lo, j_hi = rows.start, rows.stop - 1, cols.start, cols.stop - 1
        last = len(r1) - 1

        def cells(index: int, axis: int) -> np.ndarray:
            line = labels[index] if axis == 0 else labels[:, index]
            hits = np.nonzero(line == label)[0]
            if hits.size > max_cells:
                hits = hits[np.linspace(0, hits.size - 1, max_cells).astype(int)]
            return hits

        rho1_min, rho1_max = float(r1[i_lo]), float(r1[i_hi])
        rho2_min, rho2_max = float(r2[j_lo]), float(r2[j_hi])
        if i_hi < last:
            rho1_max = max(RegionEngine._bisect(mu, (r1[i_hi], r2[j]), (r1[i_hi + 1], r2[j]))[0]
                           for j in cells(i_hi, 0))
        if i_lo > 0:
            rho1_min = min(RegionEngine._bisect(mu, (r1[i_lo], r2[j]), (r1[i_lo - 1], r2[j]))[0]
                           for j in cells(i_lo, 0))
        if j_hi < last:
            rho2_max = max(RegionEngine._bisect(mu, (r1[i], r2[j_hi]), (r1[i], r2[j_hi + 1]))[1]
                           for i in cells(j_hi, 1))
        if j_lo > 0:
            rho2_min = min(RegionEngine._bisect(mu, (r1[i], r2[j_lo]), (r1[i], r2[j_lo - 1]))[1]
                           for i in cells(j_lo, 1))
        return ComponentBox(
            points=int(np.sum(labels[box] == label)),
            rho1_min=rho1_min,
            rho1_max=rho1_max,
            rho2_min=rho2_min,
            rho2_max=rho2_max,
        )

    @staticmethod
    def feasibility_scan(
        mu_tilde: float,
        grid_step: Optional[float] = None,
        refine: bool = True,
        workers: Optional[int] = None,
    ) -> FeasibilityRegion:
        """
        在 [0,1]² 网格上标记可行点，按行分块并行；连通分量用 4-邻接标记，
        分量边界再用二分法细化
        """
        grid_step = Config.GRID_STEP if grid_step is None else grid_step
        if not 0.0 < grid_step <= 0.5:
            raise DomainError(f"grid_step must lie in (0, 0.5], got {grid_step}")
        cells = int(round(1.0 / grid_step))
        axis = np.linspace(0.0, 1.0, cells + 1)
        mask = np.zeros((axis.size, axis.size), dtype=bool)

        block = 256
        starts = list(range(0, axis.size, block))

        def scan_rows(start: int) -> None:
            rows = axis[start:start + block, None]
            mask[start:start + block] = RegionEngine.feasible(rows, axis[None, :], mu_tilde)

        with ThreadPool(min(len(starts), workers or Config.POOL_SIZE)) as pool:
            pool.map(scan_rows, starts)

        region = FeasibilityRegion(mu_tilde, grid_step, axis, axis.copy(), mask)
        labels, count = ndimage.label(mask)
        boxes = ndimage.find_objects(labels)
        components = []
        for label, box in enumerate(boxes, start=1):
            if box is None:
                continue
            if refine:
                components.append(RegionEngine._refine_box(region, labels, label, box))
            else:
                rows, cols = box
                components.append(ComponentBox(
                    points=int(np.sum(labels[box] == label)),
                    rho1_min=float(axis[rows.start]), rho1_max=float(axis[rows.stop - 1]),
                    rho2_min=float(axis[cols.start]), rho2_max=float(axis[cols.stop - 1]),
                ))
        region.components = sorted(components, key=lambda c: (c.rho1_min, c.rho2_min))
        logger.info(
            "feasibility scan mu_tilde=%g step=%g: %d points, %d components",
            mu_tilde, grid_step, region.feasible_count, count,
        )
        return region

    # --- 常数推导 ---
    @staticmethod
    def cluster_spread_threshold(average: float = Config.EQ14_PER_NON_EDGE) -> float:
        """cos(π−φ) − cos²(π−φ) = average 的最小正根的两倍"""
        if not -2.0 < average < 0.0:
            raise DomainError(f"average contribution must lie in (-2, 0), got {average}")
        root = brentq(lambda phi: -np.cos(phi) - np.cos(phi) ** 2 - average, 0.0, HALF_PI)
        return 2.0 * root

    @staticmethod
    def cluster_size_fraction(mu_tilde: float, average: float = -Config.EQ14_PER_NON_EDGE) -> float:
        return average * (1.0 - mu_tilde) / 2.0

    @staticmethod
    def eq14_constants(
        rho1_max: float = Config.CASE_II_RHO1,
        rho2_max: float = 0.0,
        mu_tilde: float = Config.CASE_II_MU_TILDE,
    ) -> Tuple[float, float]:
        """
        由 eq5 右端在 case-(ii) 区域内的上确界推出 (绝对界, 每条非边的平均贡献界)
        """
        absolute = 0.5 * (2.0 * rho1_max ** 2 - rho2_max ** 2 - 1.0)
        return absolute, absolute / (1.0 - mu_tilde)

    @staticmethod
    def in_case_ii(rho1: float, rho2_abs: float, mu_tilde: float) -> bool:
        return (
            rho1 < Config.CASE_II_RHO1
            and rho2_abs < Config.CASE_II_RHO2
            and mu_tilde >= Config.CASE_II_MU_TILDE
        )

    @staticmethod
    def eq14_check(g: Graph, s: PhaseState, enforce_regime: bool = True) -> Eq14Result:
        mu_tilde = GraphEngine.connectivity(g).mu_tilde
        rho1 = abs(MomentEngine.moment(s, 1))
        rho2 = abs(MomentEngine.moment(s, 2))
        if enforce_regime and not RegionEngine.in_case_ii(rho1, rho2, mu_tilde):
            raise CertificateInapplicableError(
                f"state outside the case-(ii) regime (rho1={rho1:.4g}, |rho2|={rho2:.4g}, mu_tilde={mu_tilde:.4g})"
            )
        lhs = CertificateEngine.eq5_check(g, s).lhs / g.n ** 2
        return Eq14Result(
            lhs_normalized=float(lhs),
            absolute_threshold=Config.EQ14_ABSOLUTE,
            scaled_threshold=Config.EQ14_PER_NON_EDGE * (1.0 - mu_tilde),
        )

    # --- 四簇分解 ---
    @staticmethod
    def _deviations(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        # 到最近簇中心 φ + kπ/2 的有符号偏差，取值 [−π/4, π/4)
        return np.mod(theta[None, :] - phi[:, None] + 0.25 * np.pi, HALF_PI) - 0.25 * np.pi

    @staticmethod
    def _assign(theta: np.ndarray, phi: float, radius: float):
        dev = RegionEngine._deviations(theta, np.array([phi]))[0]
        cluster = np.mod(np.rint((theta - phi - dev) / HALF_PI).astype(int), 4)
        member = np.abs(dev) <= radius
        return dev, cluster, member

    @staticmethod
    def cluster_analysis(
        s: PhaseState,
        mu_tilde: Optional[float] = None,
        spread_threshold: float = Config.CLUSTER_SPREAD,
    ) -> ClusterReport:
        """
        以 1e−3 步长扫描 φ ∈ [0, π/2)，最大化落入 φ + kπ/2 簇的振子数，
        平局取偏差平方和最小者；簇内相位差不超过 spread_threshold，即到中心不超过其一半
        """
        theta = s.theta
        radius = 0.5 * spread_threshold
        phis = np.arange(0.0, HALF_PI, Config.CLUSTER_PHI_STEP)
        dev = RegionEngine._deviations(theta, phis)
        inside = np.abs(dev) <= radius
        counts = inside.sum(axis=1)
        sq = np.where(inside, dev ** 2, 0.0).sum(axis=1)
        best = np.lexsort((sq, -counts))[0]
        phi = float(phis[best])

        # 用成员的四倍角圆均值微调 φ，成员数不减才采纳
        _, _, member = RegionEngine._assign(theta, phi, radius)
        if member.any():
            refined = float(np.mod(np.angle(np.mean(np.exp(4j * theta[member]))) / 4.0, HALF_PI))
            if RegionEngine._assign(theta, refined, radius)[2].sum() >= member.sum():
                phi = refined

        dev, cluster, member = RegionEngine._assign(theta, phi, radius)
        sizes = [int(np.sum(member & (cluster == k))) for k in range(4)]
        spreads = [
            float(np.max(np.abs(dev[member & (cluster == k)]))) if sizes[k] else 0.0
            for k in range(4)
        ]
        rogue = int(s.n - member.sum())

        report = ClusterReport(
            n=s.n,
            phi=phi,
            cluster_sizes=sizes,
            cluster_spreads=spreads,
            rogue_count=rogue,
            spread_threshold=spread_threshold,
        )
        if mu_tilde is not None:
            rho1 = abs(MomentEngine.moment(s, 1))
            rho2 = abs(MomentEngine.moment(s, 2))
            if RegionEngine.in_case_ii(rho1, rho2, mu_tilde):
                floor = Config.CLUSTER_SIZE_FRACTION * s.n
                report.certified_regime = True
                report.anti_sync_pair_ok = any(
                    sizes[k] >= floor and sizes[k + 2] >= floor for k in range(2)
                )
                report.rogue_ok = rogue <= Config.ROGUE_FRACTION * s.n
        return report
