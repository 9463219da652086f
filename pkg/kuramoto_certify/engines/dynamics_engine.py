import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np
from scipy.integrate import solve_ivp

from kuramoto_certify.config import Config
from kuramoto_certify.engines.graph_engine import Graph
from kuramoto_certify.exceptions import DomainError, IntegrationError, RefinementError

logger = logging.getLogger("kuramoto_certify.dynamics")

TWO_PI = 2.0 * np.pi


def wrap_phases(theta) -> np.ndarray:
    """把相位映射到 (−π, π]"""
    y = np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(y == -np.pi, np.pi, y)


@dataclass(frozen=True, eq=False)
class PhaseState:
    """
    n 个振子的相位（旋转坐标系，弧度），存储时已归入 (−π, π]
    pinned=True 表示 ρ₁ ≈ 0 时改用 θ₀ = 0 作为旋转规范
    """

    theta: np.ndarray
    pinned: bool = False

    def __post_init__(self):
        theta = wrap_phases(np.ravel(self.theta))
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @property
    def rho1(self) -> complex:
        return complex(np.mean(np.exp(1j * self.theta)))

    def shifted(self, c: float) -> "PhaseState":
        return PhaseState(self.theta + c, pinned=self.pinned)


@dataclass
class IntegratorOptions:
    method: Literal["rk4", "adaptive"] = "rk4"
    dt: float = field(default_factory=lambda: Config.DT)
    rtol: float = field(default_factory=lambda: Config.ADAPTIVE_RTOL)
    atol: float = field(default_factory=lambda: Config.ADAPTIVE_ATOL)
    record_every: int = 1
    stop_on_sync: bool = False
    stop_on_equilibrium: bool = False
    check_every: int = field(default_factory=lambda: Config.CHECK_EVERY)

    def validate(self) -> None:
        if self.method not in ("rk4", "adaptive"):
            raise DomainError(f"unknown integration method {self.method!r}")
        if self.dt <= 0 or self.rtol <= 0 or self.atol <= 0:
            raise DomainError("dt, rtol and atol must be positive")
        if self.record_every < 1 or self.check_every < 1:
            raise DomainError("record_every and check_every must be >= 1")


@dataclass
class Trajectory:
    times: np.ndarray
    thetas: np.ndarray
    energies: np.ndarray
    final_residual: float
    max_energy_increase: float = 0.0
    stop_reason: str = "t_end"

    @property
    def states(self) -> List[PhaseState]:
        return [PhaseState(row) for row in self.thetas]

    @property
    def final(self) -> PhaseState:
        return PhaseState(self.thetas[-1])

    @property
    def rho1_abs(self) -> np.ndarray:
        return np.abs(np.mean(np.exp(1j * self.thetas), axis=1))


class DynamicsEngine:
    """齐次 Kuramoto 梯度流：右端项、能量、积分与平衡点精化"""

    # --- 状态构造 ---
    @staticmethod
    def all_in_phase(n: int, phase: float = 0.0) -> PhaseState:
        return PhaseState(np.full(n, float(phase)))

    @staticmethod
    def twisted_state(n: int, q: int) -> PhaseState:
        """θ_j = 2πqj/n"""
        return PhaseState(TWO_PI * q * np.arange(n) / n)

    @staticmethod
    def lift_state(s: PhaseState, tau: int) -> PhaseState:
        """孪生图上的提升：每个 τ-团继承父节点的相位"""
        if tau < 1:
            raise DomainError(f"tau must be >= 1, got {tau}")
        return PhaseState(np.repeat(s.theta, tau))

    @staticmethod
    def _check_size(g: Graph, theta: np.ndarray) -> None:
        if theta.shape[-1] != g.n:
            raise DomainError(f"state has {theta.shape[-1]} phases but graph has {g.n} nodes")

    # --- 右端项与能量 ---
    @staticmethod
    def _rates(w: np.ndarray, theta: np.ndarray) -> np.ndarray:
        # Σ_k A_jk sin(θ_k − θ_j) = cosθ_j (A sinθ)_j − sinθ_j (A cosθ)_j
        c, s = np.cos(theta), np.sin(theta)
        return c * (s @ w) - s * (c @ w)

    @staticmethod
    def rhs(g: Graph, s: PhaseState) -> np.ndarray:
        DynamicsEngine._check_size(g, s.theta)
        return DynamicsEngine._rates(g.coupling, s.theta)

    @staticmethod
    def rhs_batch(g: Graph, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(thetas)
        DynamicsEngine._check_size(g, thetas)
        return DynamicsEngine._rates(g.coupling, thetas)

    @staticmethod
    def residual(g: Graph, s: PhaseState) -> float:
        return float(np.max(np.abs(DynamicsEngine.rhs(g, s))))

    @staticmethod
    def _energy(w: np.ndarray, theta: np.ndarray) -> float:
        c, s = np.cos(theta), np.sin(theta)
        return float(-0.5 * (c @ w @ c + s @ w @ s))

    @staticmethod
    def energy(g: Graph, s: PhaseState) -> float:
        """E(θ) = −½ Σ_{j,k} A_jk cos(θ_k − θ_j)，rhs = −∇E"""
        DynamicsEngine._check_size(g, s.theta)
        return DynamicsEngine._energy(g.weights, s.theta)

    @staticmethod
    def is_synced(g: Graph, s: PhaseState) -> bool:
        return abs(s.rho1) > Config.SYNC_RHO1 and DynamicsEngine.residual(g, s) < Config.SYNC_RESIDUAL

    # --- 积分 ---
    @staticmethod
    def _rk4_step(w: np.ndarray, theta: np.ndarray, dt: float) -> np.ndarray:
        k1 = DynamicsEngine._rates(w, theta)
        k2 = DynamicsEngine._rates(w, theta + 0.5 * dt * k1)
        k3 = DynamicsEngine._rates(w, theta + 0.5 * dt * k2)
        k4 = DynamicsEngine._rates(w, theta + dt * k3)
        return wrap_phases(theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))

    @staticmethod
    def integrate(
        g: Graph,
        s0: PhaseState,
        t_end: float,
        opts: Optional[IntegratorOptions] = None,
    ) -> Trajectory:
        opts = opts or IntegratorOptions()
        opts.validate()
        if t_end <= 0:
            raise DomainError(f"t_end must be positive, got {t_end}")
        DynamicsEngine._check_size(g, s0.theta)
        if opts.method == "adaptive":
            return DynamicsEngine._integrate_adaptive(g, s0, t_end, opts)
        return DynamicsEngine._integrate_rk4(g, s0, t_end, opts)

    @staticmethod
    def _stop_reason(w: np.ndarray, theta: np.ndarray, opts: IntegratorOptions) -> Optional[str]:
        residual = np.max(np.abs(DynamicsEngine._rates(w, theta)))
        if opts.stop_on_sync and residual < Config.SYNC_RESIDUAL:
            if abs(np.mean(np.exp(1j * theta))) > Config.SYNC_RHO1:
                return "synced"
        if opts.stop_on_equilibrium and residual < Config.EQUILIBRIUM_RESIDUAL:
            return "equilibrium"
        return None

    @staticmethod
    def _integrate_rk4(g: Graph, s0: PhaseState, t_end: float, opts: IntegratorOptions) -> Trajectory:
        w, a = g.coupling, g.weights
        steps = int(np.ceil(t_end / opts.dt - 1e-12))
        theta = s0.theta.copy()
        energy = DynamicsEngine._energy(a, theta)

        times, thetas, energies = [0.0], [theta], [energy]
        max_increase = 0.0
        reason = "t_end"
        t = 0.0
        for step in range(1, steps + 1):
            dt = min(opts.dt, t_end - t)
            theta = DynamicsEngine._rk4_step(w, theta, dt)
            t = t_end if step == steps else step * opts.dt
            new_energy = DynamicsEngine._energy(a, theta)
            max_increase = max(max_increase, new_energy - energy)
            energy = new_energy

            if step % opts.record_every == 0 or step == steps:
                times.append(t)
                thetas.append(theta)
                energies.append(energy)
            if step % opts.check_every == 0:
                reason_now = DynamicsEngine._stop_reason(w, theta, opts)
                if reason_now is not None:
                    reason = reason_now
                    if times[-1] != t:
                        times.append(t)
                        thetas.append(theta)
                        energies.append(energy)
                    break

        if max_increase > Config.ENERGY_TOL:
            logger.warning("energy increased by %.3e during integration (dt=%g)", max_increase, opts.dt)
        final_residual = float(np.max(np.abs(DynamicsEngine._rates(w, theta))))
        logger.debug("rk4 finished at t=%g (%s), residual %.3e", times[-1], reason, final_residual)
        return Trajectory(
            times=np.asarray(times),
            thetas=np.vstack(thetas),
            energies=np.asarray(energies),
            final_residual=final_residual,
            max_energy_increase=max_increase,
            stop_reason=reason,
        )

    @staticmethod
    def _integrate_adaptive(g: Graph, s0: PhaseState, t_end: float, opts: IntegratorOptions) -> Trajectory:
        w, a = g.coupling, g.weights

        # 自适应步内不做相位折返，输出时再折返
        sol = solve_ivp(
            lambda _t, y: DynamicsEngine._rates(w, y),
            (0.0, t_end),
            s0.theta.copy(),
            method="RK45",
            rtol=opts.rtol,
            atol=opts.atol,
        )
        thetas = wrap_phases(sol.y.T)[:: opts.record_every]
        times = sol.t[:: opts.record_every]
        if times[-1] != sol.t[-1]:
            thetas = np.vstack([thetas, wrap_phases(sol.y[:, -1])])
            times = np.append(times, sol.t[-1])
        energies = np.array([DynamicsEngine._energy(a, row) for row in thetas])
        increases = np.diff(energies)
        trajectory = Trajectory(
            times=times,
            thetas=thetas,
            energies=energies,
            final_residual=float(np.max(np.abs(DynamicsEngine._rates(w, thetas[-1])))),
            max_energy_increase=float(max(0.0, increases.max())) if increases.size else 0.0,
            stop_reason="t_end",
        )
        if sol.status < 0:
            trajectory.stop_reason = "failed"
            raise IntegrationError(f"adaptive integration failed at t={sol.t[-1]:g}: {sol.message}", trajectory)
        return trajectory

    @staticmethod
    def integrate_batch(g: Graph, thetas0: np.ndarray, t_end: float, dt: Optional[float] = None) -> np.ndarray:
        """
        批量 RK4 积分，各行独立；每 CHECK_EVERY 步检查判据并冻结已收敛的行
        :return: 每行的结果码 0=未收敛, 1=同步, 2=非同步平衡（图案）
        """
        dt = dt or Config.DT
        w = g.coupling
        thetas = wrap_phases(np.atleast_2d(thetas0)).copy()
        DynamicsEngine._check_size(g, thetas)
        outcome = np.zeros(thetas.shape[0], dtype=np.int8)
        active = np.arange(thetas.shape[0])
        steps = int(np.ceil(t_end / dt - 1e-12))

        for step in range(1, steps + 1):
            if active.size == 0:
                break
            thetas[active] = DynamicsEngine._rk4_step(w, thetas[active], dt)
            if step % Config.CHECK_EVERY and step != steps:
                continue
            sub = thetas[active]
            residual = np.max(np.abs(DynamicsEngine._rates(w, sub)), axis=1)
            rho1 = np.abs(np.mean(np.exp(1j * sub), axis=1))
            synced = (residual < Config.SYNC_RESIDUAL) & (rho1 > Config.SYNC_RHO1)
            settled = ~synced & (residual < Config.EQUILIBRIUM_RESIDUAL)
            outcome[active[synced]] = 1
            outcome[active[settled]] = 2
            active = active[~(synced | settled)]

        if active.size:
            logger.warning("%d trajectories reached t_end=%g without settling", active.size, t_end)
        return outcome

    # --- 规范与精化 ---
    @staticmethod
    def normalize_phase(s: PhaseState) -> PhaseState:
        """
        整体平移 −ψ，使 ρ₁ = |ρ₁|e^{iψ} 变为非负实数
        |ρ₁| 过小时改为固定 θ₀ = 0 并标记 pinned
        """
        rho1 = s.rho1
        if abs(rho1) < Config.NORMALIZE_EPS:
            logger.debug("|rho1| = %.2e below threshold; pinning theta_0", abs(rho1))
            return PhaseState(s.theta - s.theta[0], pinned=True)
        return PhaseState(s.theta - np.angle(rho1), pinned=False)

    @staticmethod
    def linearization(g: Graph, theta: np.ndarray) -> np.ndarray:
        """
        Jacobian：J_jk = A_jk cos(θ_k − θ_j)，J_jj = −Σ_{k≠j} J_jk；逐元素对称组装
        """
        c, s = np.cos(theta), np.sin(theta)
        cos_diff = np.outer(c, c) + np.outer(s, s)
        jac = g.coupling * cos_diff
        np.fill_diagonal(jac, -jac.sum(axis=1))
        return jac

    @staticmethod
    def refine_equilibrium(
        g: Graph,
        s0: PhaseState,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
    ) -> PhaseState:
        """
        投影掉常数模式的 Newton 迭代：(J − 𝟙𝟙ᵀ/n) δ = −f
        """
        tol = Config.REFINE_TOL if tol is None else tol
        max_iter = Config.REFINE_MAX_ITER if max_iter is None else max_iter
        DynamicsEngine._check_size(g, s0.theta)

        w, n = g.coupling, g.n
        theta = s0.theta.copy()
        f = DynamicsEngine._rates(w, theta)
        residual = float(np.max(np.abs(f)))
        if residual < tol:
            return s0

        best_theta, best_residual = theta.copy(), residual
        projector = np.full((n, n), 1.0 / n)
        for iteration in range(1, max_iter + 1):
            jac = DynamicsEngine.linearization(g, theta) - projector
            delta, *_ = np.linalg.lstsq(jac, -f, rcond=None)
            delta -= delta.mean()

            # 残差不降时回溯步长
            step = 1.0
            for _ in range(8):
                trial = theta + step * delta
                f_trial = DynamicsEngine._rates(w, trial)
                trial_residual = float(np.max(np.abs(f_trial)))
                if trial_residual < residual:
                    break
                step *= 0.5
            theta, f, residual = trial, f_trial, trial_residual
            logger.debug("newton iteration %d: residual %.3e (step %.3g)", iteration, residual, step)

            if residual < best_residual:
                best_theta, best_residual = theta.copy(), residual
            if residual < tol:
                return PhaseState(theta, pinned=s0.pinned)

        raise RefinementError(
            f"no convergence after {max_iter} Newton iterations",
            best=PhaseState(best_theta, pinned=s0.pinned),
            residual=best_residual,
        )
