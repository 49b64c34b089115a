from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..pain import ChannelAllocation, total_pain


@dataclass
class SolverReport:
    """Outcome of one solve call.

    ``objective`` is always recomputed from ``allocation`` through
    :func:`wifipain.pain.total_pain`; solvers never report their internal
    running value.
    """

    solver: str
    allocation: ChannelAllocation
    objective: float
    seed: int | None = None
    trace: list[tuple[float, int, float]] = field(default_factory=list)
    soft_objective_final: float | None = None
    restarts_used: int = 1
    config: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @classmethod
    def build(cls, solver, p, allocation, **kw) -> "SolverReport":
        return cls(solver, allocation, total_pain(p, allocation), **kw)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "allocation": self.allocation.to_dict(),
            "objective": self.objective,
            "soft_objective_final": self.soft_objective_final,
            "trace": [list(t) for t in self.trace],
            "seed": self.seed,
            "restarts_used": self.restarts_used,
            "config": self.config,
            "stats": self.stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"
