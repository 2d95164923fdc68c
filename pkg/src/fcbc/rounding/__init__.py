"""Rounding of fractional assignments to integral ones."""
from .flow import (FlowNetwork, FlowResult, RoundingReport, build_flow_network,
                   check_rounding_properties, round_assignment, solve_mcmf,
                   violation_after_rounding)
from .randomized import RandomRoundingState, constraint_rows, null_vector, randomized_round

__all__ = [
    "FlowNetwork", "FlowResult", "RoundingReport", "build_flow_network",
    "check_rounding_properties", "round_assignment", "solve_mcmf",
    "violation_after_rounding", "RandomRoundingState", "constraint_rows",
    "null_vector", "randomized_round",
]
