"""Configuration management for nanores."""

from .logging import configure_logging
from .settings import (
    AssemblyConfig,
    ClassifierSettings,
    DynamicsParams,
    LoggingSettings,
    ReservoirConfig,
    Settings,
)

__all__ = [
    "AssemblyConfig",
    "ClassifierSettings",
    "DynamicsParams",
    "LoggingSettings",
    "ReservoirConfig",
    "Settings",
    "configure_logging",
]
