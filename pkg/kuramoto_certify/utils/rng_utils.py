import numpy as np

TWO_PI = 2.0 * np.pi


class RNGUtils:
    """
    计数器式随机流：Philox 的 128 位 key 由 (seed, trial) 拼成，
    每个试验拥有独立的流，与执行顺序和线程数无关
    """

    @staticmethod
    def stream(seed: int, trial: int) -> np.random.Generator:
        if not 0 <= seed < 2 ** 64 or not 0 <= trial < 2 ** 64:
            raise ValueError(f"seed and trial must be 64-bit unsigned integers, got {seed}, {trial}")
        return np.random.Generator(np.random.Philox(key=(trial << 64) | seed))

    @staticmethod
    def initial_phases(seed: int, trial: int, n: int) -> np.ndarray:
        """[0, 2π)ⁿ 上的独立均匀相位"""
        return RNGUtils.stream(seed, trial).uniform(0.0, TWO_PI, size=n)

    @staticmethod
    def initial_phase_block(seed: int, start: int, count: int, n: int) -> np.ndarray:
        return np.stack([RNGUtils.initial_phases(seed, start + i, n) for i in range(count)])
