from typing import Any, Optional


class KuramotoError(Exception):
    """所有库内异常的基类"""


class DomainError(KuramotoError, ValueError):
    """参数越界：n < 2、tau = 0、非法偏移、尺寸不匹配等"""


class DisconnectedGraphError(DomainError):
    def __init__(self, n_components: int):
        super().__init__(f"graph is disconnected ({n_components} components)")
        self.n_components = n_components


class GraphFormatError(DomainError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class PreconditionError(KuramotoError):
    """非平衡态被送入只对平衡态有定义的运算"""


class IntegrationError(KuramotoError, RuntimeError):
    def __init__(self, message: str, trajectory: Any = None):
        super().__init__(message)
        self.trajectory = trajectory


class RefinementError(KuramotoError, RuntimeError):
    def __init__(self, message: str, best: Any = None, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.best = best
        self.residual = residual


class NumericError(KuramotoError, ArithmeticError):
    """特征值求解等数值内核失败"""


class CertificateInapplicableError(KuramotoError):
    """证书的前提条件不成立"""


class ConsistencyViolation(KuramotoError):
    """检测到与已证结论矛盾的结果（如 μ 超过同步充分界的稳定非同步态）"""

    def __init__(self, message: str, violations: Any = None):
        super().__init__(message)
        self.violations = violations or []
