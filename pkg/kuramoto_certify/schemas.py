from enum import Enum
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


# --- 连通度 ---
class Connectivity(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    min_degree: int
    mu: float
    mu_tilde: float

    @classmethod
    def from_min_degree(cls, n: int, min_degree: int) -> "Connectivity":
        return cls(
            n=n,
            min_degree=min_degree,
            mu=float(Fraction(min_degree, n - 1)),
            mu_tilde=float(Fraction(min_degree + 1, n)),
        )

    @property
    def mu_fraction(self) -> Fraction:
        return Fraction(self.min_degree, self.n - 1)

    @property
    def mu_tilde_fraction(self) -> Fraction:
        return Fraction(self.min_degree + 1, self.n)


# --- 谱分析 ---
class Stability(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


class SpectrumReport(BaseModel):
    eigenvalues: List[float]
    zero_multiplicity: int
    classification: Stability
    zero_tol: float

    @property
    def max_eigenvalue(self) -> float:
        return self.eigenvalues[-1]

    def to_export(self) -> Dict:
        """导出格式 {eigenvalues, zero_multiplicity, classification}"""
        return {
            "eigenvalues": self.eigenvalues,
            "zero_multiplicity": self.zero_multiplicity,
            "classification": self.classification.value,
        }


# --- 证书 ---
class Verdict(str, Enum):
    ALL_IN_PHASE_FORCED = "AllInPhaseForced"
    INCONCLUSIVE = "Inconclusive"


class LemmaTwoParams(BaseModel):
    """切线界 a + b·x 的参数，以及生成它们的 (ρ₁, μ̃, x₀)"""

    rho1: float
    mu_tilde: float
    x0: float
    a: float
    b: float

    @property
    def slack_sq(self) -> float:
        return (1.0 - self.mu_tilde) ** 2

    @property
    def x_max(self) -> float:
        return min(1.0, self.slack_sq / self.rho1 ** 2)

    def f(self, x):
        return 1.0 - 2.0 * x

    def g(self, x):
        radicand = np.maximum(self.slack_sq - self.rho1 ** 2 * np.asarray(x, dtype=float), 0.0)
        return self.a + 4.0 * self.b * np.sqrt(radicand)

    def g_prime(self, x: float) -> float:
        radicand = self.slack_sq - self.rho1 ** 2 * x
        if radicand <= 0.0:
            # 端点处 b = 0，取切点导数的极限值
            return -2.0
        return -2.0 * self.rho1 ** 2 * self.b / radicand ** 0.5

    def tangency_residuals(self) -> Tuple[float, float]:
        value = abs(float(self.f(self.x0)) - float(self.g(self.x0)))
        slope = abs(-2.0 - self.g_prime(self.x0))
        return value, slope

    def bound_violation(self, samples: int = 10_000) -> float:
        """在可行 x 网格上 min (f − g)，非负即切线始终位于曲线下方"""
        xs = np.linspace(0.0, self.x_max, samples)
        return float(np.min(self.f(xs) - self.g(xs)))


class CertificateReport(BaseModel):
    n: int
    mu_tilde: float
    rho1: float
    rho2_abs: float
    all_in_phase: bool
    lxb_value: float
    eq5_lhs: float
    eq5_rhs: float
    eq6_slack: float
    eq8_max: float
    eq9_slack: Optional[float] = None
    eq10_slack: float
    eq11_slack: Optional[float] = None
    lemma1_violations: int
    corollary1_applies: bool
    sin_bound_holds: bool
    theorem1_verdict: Verdict
    tolerance: float
    classification: Optional[Stability] = None

    def violations(self) -> List[str]:
        """列出不成立的必要条件（稳定平衡态必须全部满足）"""
        tol = self.tolerance
        scale = tol * self.n ** 2
        failed: List[str] = []
        if self.lxb_value > scale:
            failed.append("lxb")
        if self.eq5_lhs > self.eq5_rhs + scale:
            failed.append("eq5")
        if self.eq6_slack < -tol:
            failed.append("eq6")
        if self.eq8_max > tol:
            failed.append("eq8")
        if self.eq9_slack is None or self.eq9_slack < -tol:
            failed.append("eq9")
        if self.eq10_slack < -tol:
            failed.append("eq10")
        if self.eq11_slack is not None and self.eq11_slack < -tol:
            failed.append("eq11")
        if self.lemma1_violations > 0:
            failed.append("lemma1")
        if self.corollary1_applies and not (self.all_in_phase and self.sin_bound_holds):
            failed.append("corollary1")
        return failed

    def consistent_with(self, classification: Stability) -> bool:
        # 不稳定态允许违反；稳定与临界态必须满足全部必要条件
        if classification == Stability.UNSTABLE:
            return True
        return not self.violations()


class ComponentBox(BaseModel):
    points: int
    rho1_min: float
    rho1_max: float
    rho2_min: float
    rho2_max: float


class RegionSummary(BaseModel):
    mu_tilde: float
    grid_step: float
    feasible_count: int
    components: List[ComponentBox]


class ClusterReport(BaseModel):
    n: int
    phi: float
    cluster_sizes: List[int]
    cluster_spreads: List[float]
    rogue_count: int
    spread_threshold: float
    certified_regime: bool = False
    anti_sync_pair_ok: Optional[bool] = None
    rogue_ok: Optional[bool] = None


# --- 实验 ---
class BasinEstimate(BaseModel):
    graph_id: str
    trials: int
    synced: int
    patterns: int = 0
    unresolved: int = 0
    fraction: float
    wilson_interval: Tuple[float, float]


class PatternRecord(BaseModel):
    n: int
    found: bool
    complete: bool
    examined: int
    offsets: Optional[List[int]] = None
    degree: Optional[int] = None
    mu: Optional[float] = None
    q: Optional[int] = None
    spectrum: Optional[SpectrumReport] = None
    certificate: Optional[CertificateReport] = None


class Figure1Row(BaseModel):
    n: int
    bound: str
    bound_value: float
    pattern_mu: Optional[float] = None
    pattern_offsets: Optional[str] = None
    pattern_q: Optional[int] = None
    pattern_complete: bool = True
    red_square: Optional[float] = None


class RazorEdgeRow(BaseModel):
    m: int
    n: int
    connectivity: str
    connectivity_value: float
    residual: float
    spectrum: SpectrumReport
    basin_fraction: Optional[float] = None


class ChainSweepReport(BaseModel):
    n_max: int
    graphs_checked: int
    states_checked: int
    stable_patterns: List[str] = Field(default_factory=list)
    certificate_failures: List[str] = Field(default_factory=list)
    basin_failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.stable_patterns or self.certificate_failures or self.basin_failures)


class ExperimentConfig(BaseModel):
    """--config JSON 文件的结构，未知字段直接拒绝"""

    model_config = ConfigDict(extra="forbid")

    experiment: Literal["figure1", "razor_edge", "pattern_search", "basin", "certify", "region_scan"]
    n_range: Tuple[int, int] = (5, 50)
    m_range: Tuple[int, int] = (1, 8)
    trials: int = Field(default=100, ge=0)
    seed: int = Field(default=20240601, ge=0, lt=2 ** 64)
    budget: int = Field(default=20000, ge=1)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output_path: Optional[str] = None
    graph: Optional[str] = None
    graph_file: Optional[str] = None
    state_file: Optional[str] = None
    mu_tilde: float = 0.7495
    grid_step: float = Field(default=1e-3, gt=0.0, le=0.5)
    sweep: bool = False
