"""Exact and local-search baselines: enumeration, branch-and-bound, coordinate descent."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DataError, NodeLimitExceeded, SolverError
from ..pain import ChannelAllocation, as_array
from .report import SolverReport

CHUNK = 1 << 15


@dataclass(frozen=True)
class ExactConfig:
    max_exhaustive_homes: int = 14
    fix_first_home: bool = True
    node_limit: int = 10**8

    def __post_init__(self):
        if self.max_exhaustive_homes < 1:
            raise DataError("max_exhaustive_homes must be >= 1")
        if self.node_limit < 1:
            raise DataError("node_limit must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExactConfig":
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__ if k in doc})


def _report(name, p, channels, n_c, **kw) -> SolverReport:
    alloc = ChannelAllocation.from_channels(channels, n_c, getattr(p, "home_ids", ()))
    return SolverReport.build(name, as_array(p), alloc, **kw)


def _check_channels(n_c: int) -> None:
    if n_c < 2:
        raise DataError(f"need at least 2 channels, got {n_c}")


def solve_exhaustive(p, n_c: int, cfg: ExactConfig = ExactConfig()) -> SolverReport:
    """Score every allocation; ties go to the lexicographically smallest labels.

    With ``fix_first_home`` home 0 is pinned to channel 0, which loses nothing
    because relabelling channels never changes the objective.
    """
    pa = as_array(p)
    _check_channels(n_c)
    n = pa.shape[0]
    if n > cfg.max_exhaustive_homes:
        raise SolverError(
            f"exhaustive search over {n} homes exceeds max_exhaustive_homes="
            f"{cfg.max_exhaustive_homes}; use the branch-and-bound solver (bnb)")
    free = n - 1 if cfg.fix_first_home else n
    total = n_c ** free
    powers = n_c ** np.arange(free - 1, -1, -1, dtype=np.int64)

    best_val, best_labels = np.inf, None
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % n_c
        if cfg.fix_first_home:
            digits = np.concatenate([np.zeros((idx.size, 1), dtype=np.int64), digits], axis=1)
        same = digits[:, :, None] == digits[:, None, :]
        vals = np.einsum("mij,ij->m", same, pa)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_labels = vals[k], digits[k].copy()
    return _report("exhaustive", p, best_labels, n_c,
                   config=cfg.to_dict(), stats={"allocations_scored": int(total)})


def branch_order(pa: np.ndarray) -> list[int]:
    """Homes by descending row+column mass, then by index."""
    mass = pa.sum(axis=0) + pa.sum(axis=1)
    return sorted(range(pa.shape[0]), key=lambda i: (-mass[i], i))


def solve_branch_and_bound(p, n_c: int, cfg: ExactConfig = ExactConfig()) -> SolverReport:
    """Depth-first branch-and-bound over per-home channel choices.

    The bound at a partial assignment is the pain already accrued between
    assigned homes, which never decreases as more homes are placed when P is
    nonnegative. A home is only offered channels up to one past the highest
    channel used so far (relabelling symmetry).
    """
    pa = as_array(p)
    _check_channels(n_c)
    if np.any(pa < 0):
        raise SolverError("branch-and-bound needs a nonnegative pain matrix")
    n = pa.shape[0]
    order = branch_order(pa)
    sym = (pa + pa.T).tolist()

    # load[c][h]: pain home h would add by joining channel c, given the
    # homes already placed on c.
    load = [[0.0] * n for _ in range(n_c)]
    labels = [0] * n
    best = {"val": float("inf"), "labels": None}
    nodes = 0

    def dfs(depth: int, accrued: float, used: int) -> None:
        nonlocal nodes
        if depth == n:
            if accrued < best["val"]:
                best["val"], best["labels"] = accrued, list(labels)
            return
        h = order[depth]
        row = sym[h]
        for c in range(min(used + 1, n_c)):
            nodes += 1
            if nodes > cfg.node_limit:
                raise NodeLimitExceeded(
                    f"branch-and-bound exceeded node_limit={cfg.node_limit}",
                    best["labels"], best["val"] if best["labels"] else None)
            bound = accrued + load[c][h]
            if bound >= best["val"]:
                continue
            labels[h] = c
            lc = load[c]
            saved = lc[:]
            for j in range(n):
                lc[j] += row[j]
            dfs(depth + 1, bound, max(used, c + 1))
            lc[:] = saved

    dfs(0, 0.0, 0)
    return _report("bnb", p, best["labels"], n_c,
                   config=cfg.to_dict(), stats={"nodes": nodes})


def solve_coordinate_descent(p, n_c: int, restarts: int = 1, seed: int = 0) -> SolverReport:
    """Greedy per-home improvement sweeps from random starts.

    Each home takes its cheapest channel, lowest index on ties, except that a
    home whose current channel already costs it nothing stays put. Every move
    either lowers the objective or keeps it and lowers a channel index, so
    sweeps (repeated until nothing moves) terminate.
    """
    pa = as_array(p)
    _check_channels(n_c)
    if restarts < 1:
        raise DataError("restarts must be >= 1")
    n = pa.shape[0]
    sym = pa + pa.T
    np.fill_diagonal(sym, 0.0)

    best = None
    sweeps_total = 0
    for r in range(restarts):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))
        labels = rng.integers(0, n_c, size=n)
        changed = True
        while changed:
            changed = False
            sweeps_total += 1
            for i in range(n):
                onehot = np.zeros((n, n_c))
                onehot[np.arange(n), labels] = 1.0
                cost = sym[i] @ onehot
                c = int(np.argmin(cost))
                if c != labels[i] and cost[labels[i]] > 0:
                    labels[i] = c
                    changed = True
        obj = float((pa * (labels[:, None] == labels[None, :])).sum())
        if best is None or obj < best[0]:
            best = (obj, labels.copy(), r)
    return _report("cd", p, best[1], n_c, seed=seed, restarts_used=restarts,
                   config={"restarts": restarts, "seed": seed},
                   stats={"best_restart": best[2], "sweeps": sweeps_total})
