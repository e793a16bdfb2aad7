"""Simulated OAuth 2.0 authorization settled on a ledger with hash time-locked payments."""

from . import contract  # noqa: F401 - registers the "authz" contract type
from .errors import ConfigError, LedgerError, ParseError
from .harness import Adversary, MetricsReport, ScenarioConfig, compare, load_config, parse_config, run

__all__ = ["Adversary", "ConfigError", "LedgerError", "MetricsReport", "ParseError", "ScenarioConfig",
           "compare", "load_config", "parse_config", "run"]
__version__ = "0.1.0"
