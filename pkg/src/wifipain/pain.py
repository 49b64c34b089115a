"""Neighborhood data model and the pain objective.

Homes are indexed ``0..n-1`` in the order of ``home_ids``. A pain matrix ``P``
holds in ``P[i, j]`` the pain home ``j`` adds to home ``i`` when both share a
channel; a channel allocation ``C`` is an ``n x n_c`` row-stochastic matrix,
one-hot in hard mode. The total pain is ``Tr(C^T P C)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionError

HARD = "hard"
SOFT = "soft"

# Roles a square home-by-home matrix can play. Only the co-usage matrix may
# carry a nonzero diagonal.
ROLE_PAIN = "P"
ROLE_CO_USAGE = "U"
ROLE_SNR = "S"
ROLE_SENSING = "S_b"
ROLES = (ROLE_PAIN, ROLE_CO_USAGE, ROLE_SNR, ROLE_SENSING)

SOFT_ROW_TOL = 1e-9


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _default_ids(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class Neighborhood:
    home_ids: tuple[str, ...]
    num_channels: int = 2

    def __post_init__(self):
        ids = tuple(str(h) for h in self.home_ids)
        object.__setattr__(self, "home_ids", ids)
        if not ids:
            raise DataError("a neighborhood needs at least one home")
        if len(set(ids)) != len(ids):
            dupes = sorted({h for h in ids if ids.count(h) > 1})
            raise DataError(f"duplicate home ids: {dupes}")
        if int(self.num_channels) < 2:
            raise DataError(f"num_channels must be >= 2, got {self.num_channels}")
        object.__setattr__(self, "num_channels", int(self.num_channels))

    @property
    def n(self) -> int:
        return len(self.home_ids)

    def index(self) -> dict[str, int]:
        return {h: i for i, h in enumerate(self.home_ids)}


@dataclass(frozen=True)
class PainMatrix:
    """Square nonnegative home-by-home matrix.

    ``role`` selects the invariant set: every role needs finite nonnegative
    entries, and all roles except the co-usage matrix ``U`` need an exactly
    zero diagonal. The sensing role additionally needs 0/1 entries. Symmetry is
    never required.
    """

    values: np.ndarray
    home_ids: tuple[str, ...] = ()
    role: str = ROLE_PAIN

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError(f"pain matrix must be square, got shape {v.shape}")
        n = v.shape[0]
        ids = tuple(str(h) for h in self.home_ids) or _default_ids(n)
        if len(ids) != n:
            raise DimensionError(f"{len(ids)} home ids for a {n}x{n} matrix")
        if self.role not in ROLES:
            raise DataError(f"unknown matrix role {self.role!r}")
        if not np.all(np.isfinite(v)):
            raise DataError("matrix entries must be finite")
        if np.any(v < 0):
            raise DataError("matrix entries must be nonnegative")
        if self.role != ROLE_CO_USAGE and np.any(np.diag(v) != 0):
            raise DataError(f"{self.role} matrix must have a zero diagonal")
        if self.role == ROLE_SENSING and not np.all((v == 0) | (v == 1)):
            raise DataError("sensing matrix entries must be 0 or 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "home_ids", ids)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_dict(self, num_channels: int | None = None) -> dict:
        return {
            "home_ids": list(self.home_ids),
            "num_channels": num_channels,
            "role": self.role,
            "matrix": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict, role: str | None = None) -> "PainMatrix":
        try:
            matrix = doc["matrix"]
        except (KeyError, TypeError):
            raise DataError("pain document has no 'matrix' field") from None
        return cls(
            np.asarray(matrix, dtype=float),
            tuple(doc.get("home_ids") or ()),
            role or doc.get("role", ROLE_PAIN),
        )


@dataclass(frozen=True)
class ChannelAllocation:
    values: np.ndarray
    mode: str = HARD
    home_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2:
            raise DimensionError(f"allocation must be 2-D, got shape {v.shape}")
        n, k = v.shape
        ids = tuple(str(h) for h in self.home_ids) or _default_ids(n)
        if len(ids) != n:
            raise DimensionError(f"{len(ids)} home ids for an allocation with {n} rows")
        if self.mode == HARD:
            if not np.all((v == 0) | (v == 1)) or np.any(v.sum(axis=1) != 1):
                raise DataError("hard allocation rows must be one-hot")
        elif self.mode == SOFT:
            if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
                raise DataError("soft allocation entries must lie in [0, 1]")
            if np.any(np.abs(v.sum(axis=1) - 1.0) > SOFT_ROW_TOL):
                raise DataError("soft allocation rows must sum to 1")
        else:
            raise DataError(f"unknown allocation mode {self.mode!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "home_ids", ids)

    @classmethod
    def from_channels(cls, channels: Sequence[int], num_channels: int,
                      home_ids: Sequence[str] = ()) -> "ChannelAllocation":
        ch = np.asarray(channels, dtype=int)
        if np.any(ch < 0) or np.any(ch >= num_channels):
            raise DataError(f"channel index out of range [0, {num_channels})")
        onehot = np.zeros((ch.size, num_channels))
        onehot[np.arange(ch.size), ch] = 1.0
        return cls(onehot, HARD, tuple(home_ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_channels(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> np.ndarray:
        """Channel index per home (row argmax)."""
        return np.argmax(self.values, axis=1)

    def to_dict(self) -> dict:
        return {
            "home_ids": list(self.home_ids),
            "num_channels": self.num_channels,
            "mode": self.mode,
            "matrix": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChannelAllocation":
        try:
            matrix = np.asarray(doc["matrix"], dtype=float)
        except (KeyError, TypeError):
            raise DataError("allocation document has no 'matrix' field") from None
        k = doc.get("num_channels")
        if k is not None and matrix.ndim == 2 and matrix.shape[1] != k:
            raise DimensionError(
                f"num_channels={k} but matrix has {matrix.shape[1]} columns")
        return cls(matrix, doc.get("mode", HARD), tuple(doc.get("home_ids") or ()))


@dataclass(frozen=True)
class PainBreakdown:
    per_home: np.ndarray
    total: float
    home_ids: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "per_home": dict(zip(self.home_ids, self.per_home.tolist())),
        }


def as_array(p) -> np.ndarray:
    """Plain float array view of a PainMatrix or array-like."""
    if isinstance(p, PainMatrix):
        return p.values
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"pain matrix must be square, got shape {arr.shape}")
    return arr


def _alloc_array(c) -> np.ndarray:
    if isinstance(c, ChannelAllocation):
        return c.values
    return np.asarray(c, dtype=float)


def _shared(c: np.ndarray) -> np.ndarray:
    # M[i, j] = sum_c C[i, c] C[j, c]. Terms are sorted before summing so the
    # result does not depend on the column order, which makes relabelling
    # channels an exact symmetry of the objective.
    terms = np.sort(c[:, None, :] * c[None, :, :], axis=2)
    return terms.sum(axis=2)


def _check_dims(p: np.ndarray, c: np.ndarray) -> None:
    if c.ndim != 2 or c.shape[0] != p.shape[0]:
        raise DimensionError(
            f"pain matrix is {p.shape[0]}x{p.shape[1]} but allocation is "
            f"{'x'.join(map(str, c.shape))}")


def per_home_pain(p, c) -> PainBreakdown:
    """Pain each home senses from the rest of the neighborhood under ``c``."""
    pa, ca = as_array(p), _alloc_array(c)
    _check_dims(pa, ca)
    per_home = (pa * _shared(ca)).sum(axis=1)
    ids = c.home_ids if isinstance(c, ChannelAllocation) else (
        p.home_ids if isinstance(p, PainMatrix) else _default_ids(pa.shape[0]))
    return PainBreakdown(per_home, float(per_home.sum()), tuple(ids))


def total_pain(p, c) -> float:
    """``Tr(C^T P C)`` for a hard or soft allocation."""
    return per_home_pain(p, c).total


def harden(c_soft) -> ChannelAllocation:
    """One-hot of each row's argmax; ties go to the lowest channel index."""
    ca = _alloc_array(c_soft)
    ids = c_soft.home_ids if isinstance(c_soft, ChannelAllocation) else ()
    return ChannelAllocation.from_channels(np.argmax(ca, axis=1), ca.shape[1], ids)


def load_json(path) -> dict:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def dump_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_pain(path, role: str | None = None) -> PainMatrix:
    return PainMatrix.from_dict(load_json(path), role)


def read_allocation(path) -> ChannelAllocation:
    doc = load_json(path)
    # A solver report embeds its allocation.
    if "allocation" in doc and "matrix" not in doc:
        doc = doc["allocation"]
    return ChannelAllocation.from_dict(doc)
