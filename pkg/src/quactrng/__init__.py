"""Deterministic simulator and analysis toolkit for a DRAM true random
number generator based on quadruple row activation.
"""

from .config import (ConfigError, DataPattern, DeviceConfig, DramGeometry,
                     SegmentAddress, TimingParams, VariationProfile,
                     calibrated_variation)
from .device import build_device

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataPattern",
    "DeviceConfig",
    "DramGeometry",
    "SegmentAddress",
    "TimingParams",
    "VariationProfile",
    "calibrated_variation",
    "build_device",
    "__version__",
]
