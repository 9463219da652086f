import logging
from multiprocessing.pool import ThreadPool
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm

from kuramoto_certify.config import Config
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine
from kuramoto_certify.engines.graph_engine import Graph
from kuramoto_certify.exceptions import DomainError
from kuramoto_certify.schemas import BasinEstimate
from kuramoto_certify.utils.rng_utils import RNGUtils

logger = logging.getLogger("kuramoto_certify.tools.basin")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """二项比例的 Wilson 区间"""
    if trials <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + 0.5 * confidence))
    p = successes / trials
    denom = 1.0 + z ** 2 / trials
    center = (p + z ** 2 / (2 * trials)) / denom
    half = z * np.sqrt(p * (1.0 - p) / trials + z ** 2 / (4 * trials ** 2)) / denom
    lo = 0.0 if successes == 0 else max(0.0, float(center - half))
    hi = 1.0 if successes == trials else min(1.0, float(center + half))
    return lo, hi


def run_basin(
    g: Graph,
    trials: int,
    seed: Optional[int] = None,
    graph_id: str = "",
    t_end: Optional[float] = None,
    workers: Optional[int] = None,
) -> BasinEstimate:
    """
    蒙特卡洛吸引域采样：第 i 次试验的初相由 (seed, i) 的 Philox 流生成，
    按固定大小分块积分，每块写入预分配槽位，结果与线程数无关
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    seed = Config.SEED if seed is None else seed
    t_end = Config.T_END if t_end is None else t_end

    outcomes = np.zeros(trials, dtype=np.int8)
    starts = list(range(0, trials, Config.BASIN_CHUNK))

    def run_chunk(start: int) -> None:
        count = min(Config.BASIN_CHUNK, trials - start)
        phases = RNGUtils.initial_phase_block(seed, start, count, g.n)
        outcomes[start:start + count] = DynamicsEngine.integrate_batch(g, phases, t_end)

    with ThreadPool(min(len(starts), workers or Config.POOL_SIZE)) as pool:
        pool.map(run_chunk, starts)

    synced = int(np.sum(outcomes == 1))
    patterns = int(np.sum(outcomes == 2))
    unresolved = int(np.sum(outcomes == 0))
    if unresolved:
        logger.warning("%s: %d/%d trials unresolved at t_end=%g, counted as non-synced",
                       graph_id or repr(g), unresolved, trials, t_end)
    estimate = BasinEstimate(
        graph_id=graph_id or repr(g),
        trials=trials,
        synced=synced,
        patterns=patterns,
        unresolved=unresolved,
        fraction=synced / trials,
        wilson_interval=wilson_interval(synced, trials),
    )
    logger.info("basin %s: %d/%d synced (%.3f)", estimate.graph_id, synced, trials, estimate.fraction)
    return estimate
