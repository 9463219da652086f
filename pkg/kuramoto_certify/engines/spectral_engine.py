import logging
from typing import Iterable, Optional

import numpy as np
from scipy.linalg import LinAlgError, eigh

from kuramoto_certify.config import Config
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import Graph
from kuramoto_certify.exceptions import NumericError, PreconditionError
from kuramoto_certify.schemas import SpectrumReport, Stability

logger = logging.getLogger("kuramoto_certify.spectral")


class SpectralEngine:
    """平衡态的 Jacobian、谱与稳定性分类（含多重零特征值的临界情形）"""

    @staticmethod
    def jacobian(g: Graph, s: PhaseState, override: bool = False) -> np.ndarray:
        residual = DynamicsEngine.residual(g, s)
        if residual >= Config.EQUILIBRIUM_RESIDUAL and not override:
            raise PreconditionError(
                f"state is not an equilibrium (residual {residual:.3e}); pass override=True to proceed"
            )
        return DynamicsEngine.linearization(g, s.theta)

    @staticmethod
    def classify(eigenvalues: np.ndarray, zero_tol: float) -> SpectrumReport:
        eigenvalues = np.sort(np.asarray(eigenvalues, dtype=float))
        zero_multiplicity = int(np.sum(np.abs(eigenvalues) < zero_tol))
        if eigenvalues[-1] > zero_tol:
            classification = Stability.UNSTABLE
        elif zero_multiplicity >= 2:
            classification = Stability.MARGINAL
        else:
            classification = Stability.STABLE
        return SpectrumReport(
            eigenvalues=eigenvalues.tolist(),
            zero_multiplicity=zero_multiplicity,
            classification=classification,
            zero_tol=zero_tol,
        )

    @staticmethod
    def spectrum(
        g: Graph,
        s: PhaseState,
        zero_tol: Optional[float] = None,
        override: bool = False,
    ) -> SpectrumReport:
        """
        对称三对角化求解器 (LAPACK syevr) 计算实特征值，默认 zero_tol = 1e−8·n
        """
        jac = SpectralEngine.jacobian(g, s, override=override)
        zero_tol = Config.zero_tol(g.n) if zero_tol is None else zero_tol
        try:
            eigenvalues = eigh(jac, eigvals_only=True, check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise NumericError(f"symmetric eigensolver failed: {exc}") from exc
        report = SpectralEngine.classify(eigenvalues, zero_tol)
        logger.debug(
            "spectrum n=%d: max=%.3e zeros=%d -> %s",
            g.n, report.max_eigenvalue, report.zero_multiplicity, report.classification.value,
        )
        return report

    @staticmethod
    def circulant_twisted_spectra(n: int, offsets: Iterable[int], qs: Iterable[int]) -> np.ndarray:
        """
        循环图上 q-扭曲态 Jacobian 的闭式特征值，每行对应一个 q（升序）
        λ_k = Σ_s w_s cos(2πqs/n)(cos(2πks/n) − 1)，s = n/2 时 w_s = 1，否则 2
        """
        offsets = np.array(sorted(set(offsets)), dtype=float)
        qs = np.atleast_1d(np.asarray(list(qs), dtype=float))
        weights = np.where(2 * offsets == n, 1.0, 2.0)
        k = np.arange(n)
        coupling = weights * np.cos(2.0 * np.pi * np.outer(qs, offsets) / n)
        modes = np.cos(2.0 * np.pi * np.outer(offsets, k) / n) - 1.0
        return np.sort(coupling @ modes, axis=1)

    @staticmethod
    def circulant_twisted_spectrum(n: int, offsets: Iterable[int], q: int) -> np.ndarray:
        return SpectralEngine.circulant_twisted_spectra(n, offsets, [q])[0]
