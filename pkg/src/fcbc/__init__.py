"""Fair clustering under a hard cost budget.

Search per-color violation levels with feasibility LPs over a fixed center
set, then round the fractional assignment with min-cost flow.
"""
from .core import (Assignment, Instance, Objective, ViolationVector, clustering_cost,
                   compute_violations, min_cluster_size, nearest_assignment, pof)
from .errors import (BudgetInfeasibleError, ConfigError, FCBCError, GuardExceeded,
                     PropertyViolation, SolverError, StructuralError)
from .pipeline import SolveReport, SweepReport, pof_sweep, solve_fabc, solve_fcbc
from .search import Grid, SearchResult

__version__ = "0.1.0"

__all__ = [
    "Assignment", "Instance", "Objective", "ViolationVector", "clustering_cost",
    "compute_violations", "min_cluster_size", "nearest_assignment", "pof",
    "BudgetInfeasibleError", "ConfigError", "FCBCError", "GuardExceeded",
    "PropertyViolation", "SolverError", "StructuralError", "SolveReport", "SweepReport",
    "pof_sweep", "solve_fabc", "solve_fcbc", "Grid", "SearchResult",
]
