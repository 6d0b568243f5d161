"""Risk-averse dynamic EV charging: price model, mean-CVaR MDP solver,
threshold-policy analysis, Monte Carlo evaluation, and risk-parameter
selection."""

from .mdp import MdpConfig, MdpSolution, solve, verify_structure
from .price_model import DiscreteDist, PriceGrid, PriceModelParams, build_grid
from .risk import RiskParams, RiskSchedule, cvar_discrete, mean_cvar, var_discrete

__all__ = [
    "DiscreteDist",
    "MdpConfig",
    "MdpSolution",
    "PriceGrid",
    "PriceModelParams",
    "RiskParams",
    "RiskSchedule",
    "build_grid",
    "cvar_discrete",
    "mean_cvar",
    "solve",
    "var_discrete",
    "verify_structure",
]
