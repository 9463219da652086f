from .file_utils import FileUtils
from .json_utils import JSONUtils
from .rng_utils import RNGUtils

__all__ = ["FileUtils", "JSONUtils", "RNGUtils"]
