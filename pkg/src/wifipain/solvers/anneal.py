"""Softmax-relaxed gradient descent with a rising inverse temperature.

Each home gets a row of free weights ``W[i]``; ``softmax(beta * W[i])`` is a
soft channel choice, and the soft total pain ``Tr(C^T P C)`` is minimised with
Adam while ``beta`` steps through an increasing schedule. The final weights
are hardened by row argmax at the last ``beta``.

Restarts are run as one batch of shape ``(restarts, n, n_c)``. Restart ``r``
draws its initial weights from ``numpy.random.Generator(PCG64)`` seeded with
``SeedSequence(seed, spawn_key=(r,))``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DataError, DimensionError
from ..pain import SOFT, ChannelAllocation, as_array, harden, total_pain
from .report import SolverReport

RNG_NAME = "numpy.PCG64 via SeedSequence(seed, spawn_key=(restart,))"


@dataclass(frozen=True)
class AnnealConfig:
    beta_schedule: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    steps_per_phase: int = 6400
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    l2_lambda: float = 0.0
    restarts: int = 1
    seed: int = 0
    trace_stride: int = 100

    def __post_init__(self):
        sched = tuple(float(b) for b in self.beta_schedule)
        object.__setattr__(self, "beta_schedule", sched)
        if not sched or sched[0] <= 0 or any(b <= a for a, b in zip(sched, sched[1:])):
            raise DataError(f"beta_schedule must be positive and strictly increasing: {sched}")
        if self.steps_per_phase < 1:
            raise DataError("steps_per_phase must be >= 1")
        if not self.learning_rate > 0:
            raise DataError("learning_rate must be > 0")
        if self.l2_lambda < 0:
            raise DataError("l2_lambda must be >= 0")
        if self.restarts < 1:
            raise DataError("restarts must be >= 1")
        if self.trace_stride < 1:
            raise DataError("trace_stride must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["beta_schedule"] = list(self.beta_schedule)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "AnnealConfig":
        known = {k: doc[k] for k in cls.__dataclass_fields__ if k in doc}
        if "beta_schedule" in known:
            known["beta_schedule"] = tuple(known["beta_schedule"])
        return cls(**known)


@dataclass(frozen=True)
class SolverWeights:
    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2:
            raise DimensionError(f"weights must be n x n_c, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise DataError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def _weights(w) -> np.ndarray:
    return w.w if isinstance(w, SolverWeights) else np.asarray(w, dtype=float)


def _softmax(z: np.ndarray) -> np.ndarray:
    # Row softmax over the last axis, max-subtracted so large beta cannot overflow.
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def soft_allocation(w, beta: float) -> ChannelAllocation:
    if not beta > 0:
        raise DataError(f"beta must be > 0, got {beta}")
    return ChannelAllocation(_softmax(beta * _weights(w)), SOFT)


def _check(p: np.ndarray, w: np.ndarray) -> None:
    if w.ndim != 2 or w.shape[0] != p.shape[0]:
        raise DimensionError(
            f"pain matrix is {p.shape[0]}x{p.shape[1]} but weights are "
            f"{'x'.join(map(str, w.shape))}")


def soft_pain(p, w, beta: float, l2_lambda: float = 0.0) -> float:
    """Soft total pain at ``beta`` plus ``l2_lambda * ||W||^2``."""
    pa, wa = as_array(p), _weights(w)
    _check(pa, wa)
    value = total_pain(pa, soft_allocation(wa, beta))
    if l2_lambda:
        value += l2_lambda * float(np.sum(wa * wa))
    return value


def _grad(sym: np.ndarray, w: np.ndarray, beta: float, l2_lambda: float):
    """Batched gradient; ``sym`` is ``P + P^T`` and ``w`` has shape (..., n, n_c)."""
    c = _softmax(beta * w)
    g = sym @ c  # d pain / d C
    inner = np.sum(c * g, axis=-1, keepdims=True)
    grad = beta * c * (g - inner)
    if l2_lambda:
        grad = grad + 2.0 * l2_lambda * w
    return grad, c


def loss_gradient(p, w, beta: float, l2_lambda: float = 0.0) -> np.ndarray:
    pa, wa = as_array(p), _weights(w)
    _check(pa, wa)
    if not beta > 0:
        raise DataError(f"beta must be > 0, got {beta}")
    return _grad(pa + pa.T, wa, beta, l2_lambda)[0]


class Adam:
    """Adam on a single parameter array, updated in place."""

    def __init__(self, shape, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, param: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        step_size = self.lr / (1.0 - self.beta1 ** self.t)
        denom = np.sqrt(self.v / (1.0 - self.beta2 ** self.t)) + self.eps
        param -= step_size * self.m / denom


def initial_weights(n: int, n_c: int, seed: int, restarts: int) -> np.ndarray:
    """i.i.d. standard normal weights, one independent stream per restart."""
    out = np.empty((restarts, n, n_c))
    for r in range(restarts):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))
        out[r] = rng.standard_normal((n, n_c))
    return out


def _batched_soft_pain(p: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.einsum("ric,ij,rjc->r", c, p, c)


def run(p, n_c: int, cfg: AnnealConfig, w0: np.ndarray | None = None):
    """Optimise a batch of weights; returns ``(w_end, traces)``.

    ``traces[r]`` lists ``(beta, step, soft_pain)`` every ``cfg.trace_stride``
    steps within each phase (steps counted from 1).
    """
    pa = as_array(p)
    n = pa.shape[0]
    w = initial_weights(n, n_c, cfg.seed, cfg.restarts) if w0 is None else np.array(w0, float)
    sym = pa + pa.T
    opt = Adam(w.shape, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon)
    traces = [[] for _ in range(w.shape[0])]
    stride = cfg.trace_stride
    for beta in cfg.beta_schedule:
        for step in range(1, cfg.steps_per_phase + 1):
            grad, _ = _grad(sym, w, beta, cfg.l2_lambda)
            opt.step(w, grad)
            if step % stride == 0 or step == cfg.steps_per_phase:
                vals = _batched_soft_pain(pa, _softmax(beta * w))
                for r, v in enumerate(vals):
                    traces[r].append((beta, step, float(v)))
    return w, traces


def solve(p, n_c: int, cfg: AnnealConfig = AnnealConfig()) -> SolverReport:
    """Anneal from ``cfg.restarts`` random starts and keep the best hardened result."""
    pa = as_array(p)
    if n_c < 2:
        raise DataError(f"need at least 2 channels, got {n_c}")
    ids = getattr(p, "home_ids", ())
    w_end, traces = run(pa, n_c, cfg)

    beta_final = cfg.beta_schedule[-1]
    best = None
    for r in range(cfg.restarts):
        hard = harden(soft_allocation(w_end[r], beta_final))
        obj = total_pain(pa, hard)
        if best is None or obj < best[1]:
            best = (r, obj, hard)
    r, _, hard = best
    allocation = ChannelAllocation(hard.values, hard.mode, ids)
    return SolverReport.build(
        "anneal", pa, allocation,
        seed=cfg.seed,
        trace=traces[r],
        soft_objective_final=soft_pain(pa, w_end[r], beta_final),
        restarts_used=cfg.restarts,
        config=cfg.to_dict(),
        stats={"best_restart": r, "rng": RNG_NAME},
    )
