"""Co-simulator for HAPS-assisted, disaster-resilient cellular networks."""

from .config import load_config
from .coverage import CoverageConfig, CoverageResult, run_coverage
from .disaster import run_timeline, resilience_metrics
from .errors import ConfigError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CoverageConfig",
    "CoverageResult",
    "load_config",
    "resilience_metrics",
    "run_coverage",
    "run_timeline",
]
