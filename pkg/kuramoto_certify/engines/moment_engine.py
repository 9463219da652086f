from dataclasses import dataclass

import numpy as np

from kuramoto_certify.engines.dynamics_engine import PhaseState
from kuramoto_certify.exceptions import DomainError


@dataclass(frozen=True)
class MomentSet:
    """Daido 矩 ρ_1..ρ_M"""

    rho: np.ndarray

    @property
    def M(self) -> int:
        return self.rho.shape[0]

    def __getitem__(self, m: int) -> complex:
        if m < 1 or m > self.M:
            raise DomainError(f"moment order {m} outside 1..{self.M}")
        return complex(self.rho[m - 1])


class MomentEngine:
    """序参量矩 ρ_m = (1/n) Σ_j e^{imθ_j} 及其三角恒等式"""

    @staticmethod
    def moment(s: PhaseState, m: int) -> complex:
        if m < 1:
            raise DomainError(f"moment order must be >= 1, got {m}")
        return complex(np.mean(np.exp(1j * m * s.theta)))

    @staticmethod
    def moment_set(s: PhaseState, M: int) -> MomentSet:
        if M < 1:
            raise DomainError(f"highest order must be >= 1, got {M}")
        orders = np.arange(1, M + 1)[:, None]
        return MomentSet(rho=np.mean(np.exp(1j * orders * s.theta[None, :]), axis=1))

    @staticmethod
    def _pairwise_differences(s: PhaseState, m: int) -> np.ndarray:
        return m * np.subtract.outer(s.theta, s.theta)

    @staticmethod
    def fourier_identity_residual(s: PhaseState, m: int) -> float:
        """
        |(1/n²) Σ_{j,k} cos²(m(θ_k−θ_j)) − (1 + |ρ_{2m}|²)/2|
        左侧按成对求和直接计算
        """
        if m < 1:
            raise DomainError(f"moment order must be >= 1, got {m}")
        lhs = float(np.mean(np.cos(MomentEngine._pairwise_differences(s, m)) ** 2))
        rhs = 0.5 * (1.0 + abs(MomentEngine.moment(s, 2 * m)) ** 2)
        return abs(lhs - rhs)

    @staticmethod
    def magnitude_identity_residual(s: PhaseState, m: int) -> float:
        """||ρ_m|² − (1/n²) Σ_{j,k} cos(m(θ_k−θ_j))|"""
        if m < 1:
            raise DomainError(f"moment order must be >= 1, got {m}")
        pairwise = float(np.mean(np.cos(MomentEngine._pairwise_differences(s, m))))
        return abs(abs(MomentEngine.moment(s, m)) ** 2 - pairwise)
