"""Generation and transmission expansion planning with Benders decomposition."""

from .backend import available_backends, get_backend
from .benders import PRESETS, StrategyConfig, report_bounds, run_benders, run_staged
from .cases import toy_case
from .io import load_system, save_system
from .model import InvestmentDecision, InvestmentSpace, PlanningSystem, validate_system
from .oracle import solve_monolithic

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "InvestmentDecision",
    "InvestmentSpace",
    "PlanningSystem",
    "StrategyConfig",
    "available_backends",
    "get_backend",
    "load_system",
    "report_bounds",
    "run_benders",
    "run_staged",
    "save_system",
    "solve_monolithic",
    "toy_case",
    "validate_system",
]
