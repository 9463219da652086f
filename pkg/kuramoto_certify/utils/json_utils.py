import json
import logging
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from kuramoto_certify.exceptions import DomainError
from kuramoto_certify.schemas import ExperimentConfig

logger = logging.getLogger("kuramoto_certify.json")


class JSONUtils:
    """报告序列化与配置文件读取"""

    @staticmethod
    def to_builtin(obj: Any) -> Any:
        """
        递归转换为 json 可写的内建类型：
        pydantic 模型、numpy 标量/数组、Fraction、Enum；非有限浮点写成 null
        """
        if isinstance(obj, BaseModel):
            return JSONUtils.to_builtin(obj.model_dump(mode="python"))
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, dict):
            return {str(k): JSONUtils.to_builtin(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [JSONUtils.to_builtin(v) for v in obj]
        if isinstance(obj, np.ndarray):
            return JSONUtils.to_builtin(obj.tolist())
        if isinstance(obj, (np.bool_, bool)):
            return bool(obj)
        if isinstance(obj, (np.integer, int)):
            return int(obj)
        if isinstance(obj, Fraction):
            return float(obj)
        if isinstance(obj, (np.floating, float)):
            value = float(obj)
            return value if math.isfinite(value) else None
        if isinstance(obj, complex):
            return [obj.real, obj.imag]
        return obj

    @staticmethod
    def dumps(obj: Any) -> str:
        # 固定键序与缩进，保证重复运行输出逐字节一致
        return json.dumps(JSONUtils.to_builtin(obj), ensure_ascii=False, indent=2, sort_keys=True)

    @staticmethod
    def write_json(obj: Any, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(JSONUtils.dumps(obj) + "\n")
        logger.info("已写出 %s", path)
        return path

    @staticmethod
    def load_config(path: Union[str, Path]) -> ExperimentConfig:
        """读取 --config JSON，未知键或类型错误统一转成 DomainError"""
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"config {path} is not valid JSON: {exc}") from exc
        try:
            return ExperimentConfig.model_validate(raw)
        except ValidationError as exc:
            raise DomainError(f"config {path} rejected: {exc}") from exc
