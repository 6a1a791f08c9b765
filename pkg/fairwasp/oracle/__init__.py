"""Exhaustive reference solvers for tiny instances."""
from fairwasp.oracle.brute import (
    LPResult, OracleResult, brute_mip, brute_pairwise_mip, compositions,
    cost_matrix, marginal_feasible, pairwise_feasible, solve_lp, transport_cost,
)

__all__ = [
    "LPResult", "OracleResult", "brute_mip", "brute_pairwise_mip", "compositions",
    "cost_matrix", "marginal_feasible", "pairwise_feasible", "solve_lp", "transport_cost",
]
