"""Channel-allocation solvers and a name-based dispatcher."""
from __future__ import annotations

from ..errors import DataError
from .anneal import AnnealConfig, solve as solve_anneal
from .exact import (ExactConfig, solve_branch_and_bound, solve_coordinate_descent,
                    solve_exhaustive)
from .report import SolverReport

SOLVER_NAMES = ("anneal", "exhaustive", "bnb", "cd")


def run_solver(name: str, p, n_c: int, config: dict | None = None,
               seed: int | None = None) -> SolverReport:
    """Solve with the named solver. ``seed`` fills in when ``config`` has none."""
    config = dict(config or {})
    if seed is not None:
        config.setdefault("seed", seed)
    if name == "anneal":
        return solve_anneal(p, n_c, AnnealConfig.from_dict(config))
    if name == "exhaustive":
        return solve_exhaustive(p, n_c, ExactConfig.from_dict(config))
    if name == "bnb":
        return solve_branch_and_bound(p, n_c, ExactConfig.from_dict(config))
    if name == "cd":
        return solve_coordinate_descent(p, n_c, int(config.get("restarts", 1)),
                                        int(config.get("seed", 0)))
    raise DataError(f"unknown solver {name!r}; choose from {', '.join(SOLVER_NAMES)}")


__all__ = [
    "AnnealConfig", "ExactConfig", "SolverReport", "SOLVER_NAMES", "run_solver",
    "solve_anneal", "solve_exhaustive", "solve_branch_and_bound", "solve_coordinate_descent",
]
