import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# 加载 .env 环境变量
load_dotenv()

logger = logging.getLogger("kuramoto_certify.config")


class Config:
    # --- 积分器配置 ---
    DT = float(os.getenv("KC_DT", "0.01"))
    T_END = float(os.getenv("KC_T_END", "1000"))
    ADAPTIVE_RTOL = float(os.getenv("KC_ADAPTIVE_RTOL", "1e-8"))
    ADAPTIVE_ATOL = float(os.getenv("KC_ADAPTIVE_ATOL", "1e-10"))
    # 每隔多少步检查一次收敛判据
    CHECK_EVERY = int(os.getenv("KC_CHECK_EVERY", "100"))
    ENERGY_TOL = 1e-9

    # --- 同步 / 平衡判据 ---
    SYNC_RHO1 = 1.0 - 1e-6
    SYNC_RESIDUAL = 1e-8
    EQUILIBRIUM_RESIDUAL = 1e-8

    # --- Newton 精化 ---
    REFINE_TOL = float(os.getenv("KC_REFINE_TOL", "1e-12"))
    REFINE_MAX_ITER = int(os.getenv("KC_REFINE_MAX_ITER", "100"))
    NORMALIZE_EPS = 1e-14

    # --- 谱分析 ---
    # zero_tol = ZERO_TOL_SCALE * n
    ZERO_TOL_SCALE = float(os.getenv("KC_ZERO_TOL_SCALE", "1e-8"))

    # --- 证书容差 ---
    CERT_TOL = 1e-9
    RADICAND_CLAMP = 1e-12

    # --- 可行域扫描 / 聚类 ---
    GRID_STEP = 1e-3
    GOLDEN_TOL = 1e-10
    BISECT_TOL = 1e-7
    CLUSTER_PHI_STEP = 1e-3
    CLUSTER_SPREAD = 0.146
    CLUSTER_SIZE_FRACTION = 0.249
    ROGUE_FRACTION = 1.0 / 250.0
    CASE_II_RHO1 = 0.03166
    CASE_II_RHO2 = 0.04474
    CASE_II_MU_TILDE = 0.7495
    EQ14_ABSOLUTE = -0.49900
    EQ14_PER_NON_EDGE = -1.9921

    # --- 实验配置 ---
    SEED = int(os.getenv("KC_SEED", "20240601"))
    POOL_SIZE = int(os.getenv("KC_POOL_SIZE", str(min(8, os.cpu_count() or 1))))
    PATTERN_BUDGET = int(os.getenv("KC_PATTERN_BUDGET", "20000"))
    BASIN_CHUNK = 50
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # --- 业务目录配置 ---
    BASE_DIR = Path(__file__).resolve().parent.parent
    OUTPUT_DIR = os.getenv("KC_OUTPUT_DIR", os.path.join(BASE_DIR, "results"))

    # --- 文献常数 (仅作文档) ---
    LITERATURE_BOUNDS = (0.9395, 0.7929, 0.7889, 0.75)
    PATTERN_LOWER_BOUND = 0.6838

    @classmethod
    def zero_tol(cls, n: int) -> float:
        return cls.ZERO_TOL_SCALE * n

    @classmethod
    def init_directories(cls):
        """确保输出目录存在"""
        if not os.path.exists(cls.OUTPUT_DIR):
            os.makedirs(cls.OUTPUT_DIR)
            logger.info("已创建目录: %s", cls.OUTPUT_DIR)

    # --config 文件中 "tolerances" 允许覆盖的键
    OVERRIDABLE = (
        "DT", "T_END", "ADAPTIVE_RTOL", "ADAPTIVE_ATOL", "REFINE_TOL", "REFINE_MAX_ITER",
        "ZERO_TOL_SCALE", "CERT_TOL", "GRID_STEP", "BISECT_TOL", "CLUSTER_SPREAD",
        "SYNC_RHO1", "SYNC_RESIDUAL", "EQUILIBRIUM_RESIDUAL",
    )

    @classmethod
    def apply_overrides(cls, overrides: dict):
        from kuramoto_certify.exceptions import DomainError

        for key, value in overrides.items():
            name = key.upper()
            if name not in cls.OVERRIDABLE:
                raise DomainError(f"unknown tolerance '{key}'")
            current = getattr(cls, name)
            setattr(cls, name, type(current)(value))
            logger.info("配置覆盖 %s: %s -> %s", name, current, value)
