import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from kuramoto_certify.config import Config
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import Graph, GraphEngine
from kuramoto_certify.engines.moment_engine import MomentEngine
from kuramoto_certify.exceptions import CertificateInapplicableError, DomainError
from kuramoto_certify.schemas import (
    CertificateReport,
    LemmaTwoParams,
    SpectrumReport,
    Verdict,
)

logger = logging.getLogger("kuramoto_certify.certificates")


class Eq5Result(NamedTuple):
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


class Lemma1Result(NamedTuple):
    lhs: float
    mid: float
    radicand: float

    @property
    def eq8_holds(self) -> bool:
        return self.radicand >= -Config.RADICAND_CLAMP

    def holds(self, tol: float = 0.0) -> bool:
        return self.eq8_holds and self.lhs >= self.mid - tol and self.mid >= 0.0


class Lemma3Result(NamedTuple):
    x0star: float
    rho2_lower: float


class CertificateEngine:
    """
    稳定平衡态必要条件链的数值检验：
    LXB 二次型 → 非边余弦和 → 单点正弦界 → ρ₁ 下界 → (ρ₁, |ρ₂|) 可行域 → 切线界 → 全同相判定
    """

    # --- 公共量 ---
    @staticmethod
    def _cos_matrix(theta: np.ndarray) -> np.ndarray:
        c, s = np.cos(theta), np.sin(theta)
        return np.clip(np.outer(c, c) + np.outer(s, s), -1.0, 1.0)

    @staticmethod
    def _rho12(s: PhaseState) -> Tuple[float, float]:
        return abs(MomentEngine.moment(s, 1)), abs(MomentEngine.moment(s, 2))

    @staticmethod
    def _radicands(s: PhaseState, mu_tilde: float) -> np.ndarray:
        """(1−μ̃)² − ρ₁² sin²θ_j，要求 s 已规范化"""
        rho1 = abs(s.rho1)
        return (1.0 - mu_tilde) ** 2 - rho1 ** 2 * np.sin(s.theta) ** 2

    # --- 二次型与非边求和 ---
    @staticmethod
    def lxb_stability_value(g: Graph, s: PhaseState) -> float:
        """−Σ A cos + Σ A cos²，稳定平衡态 ≤ 0"""
        cos_m = CertificateEngine._cos_matrix(s.theta)
        return float(np.sum(g.weights * (cos_m ** 2 - cos_m)))

    @staticmethod
    def eq5_check(g: Graph, s: PhaseState) -> Eq5Result:
        cos_m = CertificateEngine._cos_matrix(s.theta)
        lhs = float(np.sum((1.0 - g.weights) * (cos_m - cos_m ** 2)))
        rho1, rho2 = CertificateEngine._rho12(s)
        rhs = 0.5 * g.n ** 2 * (2.0 * rho1 ** 2 - rho2 ** 2 - 1.0)
        return Eq5Result(lhs, rhs)

    @staticmethod
    def eq6_slack(g: Graph, s: PhaseState) -> float:
        rho1, rho2 = CertificateEngine._rho12(s)
        lhs5 = CertificateEngine.eq5_check(g, s).lhs
        return rho1 ** 2 - (0.5 * (1.0 + rho2 ** 2) + lhs5 / g.n ** 2)

    # --- 单点界 ---
    @staticmethod
    def lemma1_check(g: Graph, s: PhaseState, j: int, mu_tilde: Optional[float] = None) -> Lemma1Result:
        """
        n·sqrt((1−μ̃)² − ρ₁² sin²θ_j) ≥ Σ_k (1−A_jk)|cos(θ_k−θ_j)| ≥ 0
        无自环时求和跳过 k = j
        """
        if not 0 <= j < g.n:
            raise DomainError(f"oscillator index {j} outside 0..{g.n - 1}")
        if mu_tilde is None:
            mu_tilde = GraphEngine.connectivity(g).mu_tilde
        s = DynamicsEngine.normalize_phase(s)
        radicand = float(CertificateEngine._radicands(s, mu_tilde)[j])
        lhs = g.n * np.sqrt(max(0.0, radicand))
        cos_row = np.cos(s.theta - s.theta[j])
        mid = float(np.sum(g.non_edges[j] * np.abs(cos_row)))
        return Lemma1Result(float(lhs), mid, radicand)

    @staticmethod
    def eq8_check(s: PhaseState, mu_tilde: float) -> float:
        """max_j ρ₁|sin θ_j| − (1−μ̃)，稳定平衡态 ≤ 0"""
        s = DynamicsEngine.normalize_phase(s)
        return float(np.max(abs(s.rho1) * np.abs(np.sin(s.theta))) - (1.0 - mu_tilde))

    @staticmethod
    def corollary1_applies(rho1: float, mu_tilde: float) -> bool:
        return bool(rho1 > np.sqrt(2.0) * (1.0 - mu_tilde))

    @staticmethod
    def corollary1_check(s: PhaseState, mu_tilde: float) -> bool:
        """ρ₁ > √2(1−μ̃) 时稳定平衡态只能是全同相态"""
        return CertificateEngine.corollary1_applies(abs(s.rho1), mu_tilde)

    @staticmethod
    def sin_bound_holds(s: PhaseState) -> bool:
        s = DynamicsEngine.normalize_phase(s)
        return bool(np.all(np.abs(np.sin(s.theta)) < 1.0 / np.sqrt(2.0)))

    # --- 序参量界 ---
    @staticmethod
    def eq9_slack(s: PhaseState, mu_tilde: float) -> float:
        s = DynamicsEngine.normalize_phase(s)
        radicands = CertificateEngine._radicands(s, mu_tilde)
        worst = float(radicands.min())
        if worst < -Config.RADICAND_CLAMP:
            raise CertificateInapplicableError(
                f"sine bound violated: radicand {worst:.3e} is negative, eq9 does not apply"
            )
        rho1, rho2 = CertificateEngine._rho12(s)
        bound = 0.5 * (1.0 + rho2 ** 2) - 2.0 / s.n * float(np.sum(np.sqrt(np.maximum(radicands, 0.0))))
        return rho1 ** 2 - bound

    @staticmethod
    def eq10_slack_values(rho1, rho2_abs, mu_tilde: float):
        """ρ₁² − 2(μ̃ − 3/4) − |ρ₂|²/2，可对数组求值"""
        return np.asarray(rho1) ** 2 - 2.0 * (mu_tilde - 0.75) - 0.5 * np.asarray(rho2_abs) ** 2

    @staticmethod
    def eq10_slack(s: PhaseState, mu_tilde: float) -> float:
        rho1, rho2 = CertificateEngine._rho12(s)
        return float(CertificateEngine.eq10_slack_values(rho1, rho2, mu_tilde))

    @staticmethod
    def lxb_rho1_floor(mu_tilde: float) -> float:
        """去掉 |ρ₂|² 项后的旧界 ρ₁² ≥ 2(μ̃ − 3/4)"""
        return 2.0 * (mu_tilde - 0.75)

    @staticmethod
    def lemma2_params(rho1: float, mu_tilde: float, x0: float) -> LemmaTwoParams:
        if rho1 <= 0.0:
            raise DomainError("Lemma 2 requires rho1 > 0")
        slack_sq = (1.0 - mu_tilde) ** 2
        x_max = min(1.0, slack_sq / rho1 ** 2)
        if not -1e-15 <= x0 <= x_max * (1.0 + 1e-15):
            raise DomainError(f"x0={x0} outside admissible range [0, {x_max}]")
        a = 1.0 + 2.0 * x0 - 4.0 * slack_sq / rho1 ** 2
        b = np.sqrt(max(0.0, slack_sq - rho1 ** 2 * x0)) / rho1 ** 2
        return LemmaTwoParams(rho1=rho1, mu_tilde=mu_tilde, x0=x0, a=a, b=float(b))

    @staticmethod
    def eq11_bound_at(rho1, rho2_abs, mu_tilde: float, x0):
        """a(x₀) + b(x₀)(1 + |ρ₂|² − 2ρ₁²)，可对数组求值"""
        rho1 = np.asarray(rho1, dtype=float)
        slack_sq = (1.0 - mu_tilde) ** 2
        c = 1.0 + np.asarray(rho2_abs) ** 2 - 2.0 * rho1 ** 2
        a = 1.0 + 2.0 * x0 - 4.0 * slack_sq / rho1 ** 2
        b = np.sqrt(np.maximum(slack_sq - rho1 ** 2 * x0, 0.0)) / rho1 ** 2
        return a + b * c

    @staticmethod
    def eq11_best_bound(rho1, rho2_abs, mu_tilde: float):
        """
        对 x₀ 取最紧的 eq11 下界，返回 (x₀, bound)；向量化
        c ≥ 0 时目标关于 x₀ 凹，驻点 x₀ = ((1−μ̃)² − c²/16)/ρ₁² 截断到可行区间即为最优；
        c < 0 时目标为凸函数，最优在端点
        """
        rho1 = np.asarray(rho1, dtype=float)
        rho2_abs = np.asarray(rho2_abs, dtype=float)
        slack_sq = (1.0 - mu_tilde) ** 2
        c = 1.0 + rho2_abs ** 2 - 2.0 * rho1 ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            x_max = np.minimum(1.0, slack_sq / rho1 ** 2)
            stationary = np.clip((slack_sq - c ** 2 / 16.0) / rho1 ** 2, 0.0, x_max)
            at_zero = CertificateEngine.eq11_bound_at(rho1, rho2_abs, mu_tilde, 0.0)
            at_max = CertificateEngine.eq11_bound_at(rho1, rho2_abs, mu_tilde, x_max)
            at_stationary = CertificateEngine.eq11_bound_at(rho1, rho2_abs, mu_tilde, stationary)
        endpoint_x = np.where(at_max > at_zero, x_max, 0.0)
        endpoint_bound = np.maximum(at_zero, at_max)
        x_best = np.where(c >= 0.0, stationary, endpoint_x)
        bound = np.where(c >= 0.0, at_stationary, endpoint_bound)
        # ρ₁ = 0 时 Lemma 2 不适用，视为无约束
        bound = np.where(rho1 > 0.0, bound, -np.inf)
        return x_best, bound

    @staticmethod
    def eq11_best_x0(rho1: float, rho2_abs: float, mu_tilde: float) -> Tuple[float, float]:
        """
        标量版本：闭式解可用时直接取，否则在 [0, x_max] 上做有界标量搜索并与端点比较
        """
        if rho1 <= 0.0:
            raise DomainError("Lemma 2 requires rho1 > 0")
        c = 1.0 + rho2_abs ** 2 - 2.0 * rho1 ** 2
        if c >= 0.0:
            x_best, bound = CertificateEngine.eq11_best_bound(rho1, rho2_abs, mu_tilde)
            return float(x_best), float(bound)

        x_max = min(1.0, (1.0 - mu_tilde) ** 2 / rho1 ** 2)
        objective = lambda x: -float(CertificateEngine.eq11_bound_at(rho1, rho2_abs, mu_tilde, x))
        result = minimize_scalar(objective, bounds=(0.0, x_max), method="bounded",
                                 options={"xatol": Config.GOLDEN_TOL})
        candidates = [(0.0, -objective(0.0)), (x_max, -objective(x_max)), (float(result.x), -result.fun)]
        return max(candidates, key=lambda item: item[1])

    @staticmethod
    def eq11_slack(rho1: float, rho2_abs: float, mu_tilde: float, x0: Optional[float] = None) -> float:
        """|ρ₂| − [a + b(1 + |ρ₂|² − 2ρ₁²)]；x0 缺省时取最紧的 x₀"""
        if x0 is None:
            _, bound = CertificateEngine.eq11_best_x0(rho1, rho2_abs, mu_tilde)
        else:
            CertificateEngine.lemma2_params(rho1, mu_tilde, x0)
            bound = float(CertificateEngine.eq11_bound_at(rho1, rho2_abs, mu_tilde, x0))
        return rho2_abs - bound

    @staticmethod
    def lemma3_x0star(rho1: float, mu_tilde: float) -> Lemma3Result:
        """
        x₀* = (1−μ̃)²/ρ₁² − (1−2ρ₁²)²/(16ρ₁²)，并给出 |ρ₂| ≥ 1 − 2x₀*
        """
        if rho1 <= 0.0:
            raise CertificateInapplicableError("Lemma 3 requires rho1 > 0")
        r1_sq = rho1 ** 2
        if 1.0 - 2.0 * r1_sq < 0.0:
            raise CertificateInapplicableError("Lemma 3 requires 1 - 2 rho1^2 >= 0")
        floor = CertificateEngine.lxb_rho1_floor(mu_tilde)
        if floor <= 0.0 or r1_sq < floor:
            raise CertificateInapplicableError(
                f"Lemma 3 requires rho1^2 >= 2(mu_tilde - 3/4) > 0 (rho1^2={r1_sq:.6g}, floor={floor:.6g})"
            )
        slack_sq = (1.0 - mu_tilde) ** 2
        x0star = slack_sq / r1_sq - (1.0 - 2.0 * r1_sq) ** 2 / (16.0 * r1_sq)
        upper = slack_sq / r1_sq
        if not (-1e-12 <= x0star <= upper and x0star < 1.0):
            raise CertificateInapplicableError(f"x0* = {x0star:.6g} outside [0, min(1, {upper:.6g})]")
        return Lemma3Result(max(x0star, 0.0), 1.0 - 2.0 * max(x0star, 0.0))

    @staticmethod
    def lemma3_numeric_x0(rho1: float, mu_tilde: float) -> float:
        """数值最大化 a + b(1−2ρ₁²)，用于核对闭式解"""
        r1_sq = rho1 ** 2
        x_max = min(1.0, (1.0 - mu_tilde) ** 2 / r1_sq)
        objective = lambda x: -float(CertificateEngine.eq11_bound_at(rho1, 0.0, mu_tilde, x))
        result = minimize_scalar(objective, bounds=(0.0, x_max), method="bounded",
                                 options={"xatol": Config.GOLDEN_TOL})
        return float(result.x)

    @staticmethod
    def theorem1_chain(mu_tilde: float) -> dict:
        """
        |ρ₂| ≥ 1/2 ⇒ ρ₁² ≥ |ρ₂|²/2 ≥ 1/8 ⇒ ρ₁ > √2(1−μ̃) 的数值复核
        """
        rho2_floor = 0.5
        rho1_sq_floor = 0.5 * rho2_floor ** 2
        corollary_sq = 2.0 * (1.0 - mu_tilde) ** 2
        return {
            "rho2_floor": rho2_floor,
            "rho1_sq_floor": rho1_sq_floor,
            "corollary_threshold_sq": corollary_sq,
            "chain_holds": bool(mu_tilde > 0.75 and rho1_sq_floor > corollary_sq),
        }

    @staticmethod
    def theorem1_verdict(mu_tilde: float) -> Verdict:
        if not 0.0 < mu_tilde <= 1.0:
            raise DomainError(f"mu_tilde must lie in (0, 1], got {mu_tilde}")
        if mu_tilde > 0.75:
            chain = CertificateEngine.theorem1_chain(mu_tilde)
            if not chain["chain_holds"]:
                logger.error("Theorem 1 chain failed numerically at mu_tilde=%g: %s", mu_tilde, chain)
                return Verdict.INCONCLUSIVE
            return Verdict.ALL_IN_PHASE_FORCED
        return Verdict.INCONCLUSIVE

    # --- 汇总 ---
    @staticmethod
    def certificate_report(
        g: Graph,
        s: PhaseState,
        spectrum: Optional[SpectrumReport] = None,
        tol: Optional[float] = None,
    ) -> CertificateReport:
        tol = Config.CERT_TOL if tol is None else tol
        mu_tilde = GraphEngine.connectivity(g).mu_tilde
        s = DynamicsEngine.normalize_phase(s)
        rho1, rho2 = CertificateEngine._rho12(s)
        eq5 = CertificateEngine.eq5_check(g, s)

        try:
            eq9 = CertificateEngine.eq9_slack(s, mu_tilde)
        except CertificateInapplicableError as exc:
            logger.info("%s", exc)
            eq9 = None

        eq11 = None
        if rho1 > Config.NORMALIZE_EPS:
            eq11 = CertificateEngine.eq11_slack(rho1, rho2, mu_tilde)

        violations = 0
        for j in range(g.n):
            if not CertificateEngine.lemma1_check(g, s, j, mu_tilde).holds(tol * g.n):
                violations += 1

        all_in_phase = bool(np.max(np.abs(s.theta)) < 1e-6)
        return CertificateReport(
            n=g.n,
            mu_tilde=mu_tilde,
            rho1=rho1,
            rho2_abs=rho2,
            all_in_phase=all_in_phase,
            lxb_value=CertificateEngine.lxb_stability_value(g, s),
            eq5_lhs=eq5.lhs,
            eq5_rhs=eq5.rhs,
            eq6_slack=CertificateEngine.eq6_slack(g, s),
            eq8_max=CertificateEngine.eq8_check(s, mu_tilde),
            eq9_slack=eq9,
            eq10_slack=CertificateEngine.eq10_slack(s, mu_tilde),
            eq11_slack=eq11,
            lemma1_violations=violations,
            corollary1_applies=CertificateEngine.corollary1_check(s, mu_tilde),
            sin_bound_holds=CertificateEngine.sin_bound_holds(s),
            theorem1_verdict=CertificateEngine.theorem1_verdict(mu_tilde),
            tolerance=tol,
            classification=spectrum.classification if spectrum else None,
        )
