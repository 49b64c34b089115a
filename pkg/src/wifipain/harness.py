"""Train/test experiment harness.

Channels are chosen on potential pain estimated from the train days and then
frozen. The frozen allocation is scored on each train day separately (and
averaged) and on the test day(s). Test-day pain reuses the train-period
sensing matrix; only the co-usage comes from test-day usage.

Seeds: solver ``name`` gets ``derive_seed(spec_seed, name)`` unless its config
sets ``seed`` explicitly.
"""
from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, SolverError, WifiPainError
from .estimation import (EstimationConfig, MacMap, ScanObservation, UsageSample,
                         binarize_sensing, build_usage_series, co_usage, local_dates,
                         potential_pain, read_macmap_csv, read_scans_csv, read_usage_csv,
                         snr_matrix)
from .pain import Neighborhood, load_json, total_pain
from .solvers import SOLVER_NAMES, run_solver


def derive_seed(seed: int, name: str) -> int:
    """Named sub-seed: first word of ``SeedSequence([seed, crc32(name)])``."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def digest(values) -> str:
    arr = np.ascontiguousarray(np.asarray(values), dtype="<f8")
    return hashlib.sha256(str(arr.shape).encode() + arr.tobytes()).hexdigest()


@dataclass(frozen=True)
class SolverSpec:
    name: str
    config: dict = field(default_factory=dict)
    label: str = ""

    @property
    def key(self) -> str:
        return self.label or self.name


@dataclass
class ExperimentSpec:
    train_days: list[Path]
    test_days: list[Path]
    scans: list[Path]
    macmap: Path
    estimation: EstimationConfig = EstimationConfig()
    solvers: list[SolverSpec] = field(default_factory=lambda: [SolverSpec("anneal")])
    num_channels: int = 2
    seed: int = 0
    output: Path | None = None
    home_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.train_days or not self.test_days:
            raise DataError("an experiment needs at least one train day and one test day")
        keys = [s.key for s in self.solvers]
        if not keys:
            raise DataError("an experiment needs at least one solver")
        if len(set(keys)) != len(keys):
            raise DataError(f"duplicate solver labels: {keys}")
        for s in self.solvers:
            if s.name not in SOLVER_NAMES:
                raise DataError(f"unknown solver {s.name!r}")

    @classmethod
    def from_dict(cls, doc: dict, base: Path = Path(".")) -> "ExperimentSpec":
        def path(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        def paths(v):
            return [path(p) for p in ([v] if isinstance(v, str) else v or [])]

        try:
            solvers = [SolverSpec(s["name"], dict(s.get("config") or {}), s.get("label", ""))
                       for s in doc.get("solvers", [{"name": "anneal"}])]
            return cls(
                train_days=paths(doc.get("train_days") or doc.get("train_day_dirs")),
                test_days=paths(doc.get("test_days") or doc.get("test_day_dirs")),
                scans=paths(doc.get("scans")),
                macmap=path(doc["macmap"]),
                estimation=EstimationConfig.from_dict(doc.get("estimation") or {}),
                solvers=solvers,
                num_channels=int(doc.get("num_channels", 2)),
                seed=int(doc.get("seed", 0)),
                output=path(doc["output"]) if doc.get("output") else None,
                home_ids=tuple(doc.get("home_ids") or ()),
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"invalid experiment spec: missing or malformed {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        path = Path(path)
        return cls.from_dict(load_json(path), path.parent)


def _usage_files(entry: Path) -> list[Path]:
    if entry.is_dir():
        files = sorted(entry.glob("usage*.csv"))
        if not files:
            raise DataError(f"{entry}: directory holds no usage*.csv files")
        return files
    return [entry]


def _read_days(entries: Sequence[Path]) -> list[UsageSample]:
    out = []
    for e in entries:
        for f in _usage_files(e):
            out.extend(read_usage_csv(f))
    return out


class _Step:
    """Prefix errors raised inside a pipeline step with the step's name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or not isinstance(exc, (WifiPainError, OSError)):
            return False
        kind = SolverError if isinstance(exc, SolverError) else DataError
        raise kind(f"[{self.name}] {exc}") from exc


def _per_day_pain(samples, days, cfg, hood, sb, alloc) -> list[float]:
    out = []
    for d in days:
        u = co_usage(build_usage_series(samples, cfg, hood, [d]))
        out.append(total_pain(potential_pain(u, sb), alloc))
    return out


def run_in_memory(train: Sequence[UsageSample], test: Sequence[UsageSample],
                  scans: Sequence[ScanObservation], mac_map: MacMap,
                  neighborhood: Neighborhood, cfg: EstimationConfig,
                  solvers: Sequence[SolverSpec], seed: int = 0) -> dict:
    """Run the train/test protocol on parsed telemetry and return the report dict."""
    n_c = neighborhood.num_channels
    with _Step("estimate train"):
        train_dates = local_dates(train, cfg)
        test_dates = local_dates(test, cfg)
        if not train_dates or not test_dates:
            raise DataError("no usage samples on the train or test side")
        u_train = co_usage(build_usage_series(train, cfg, neighborhood, train_dates))
        s = snr_matrix(scans, mac_map, neighborhood)
        sb = binarize_sensing(s, cfg)
        p_train = potential_pain(u_train, sb)
    with _Step("estimate test"):
        u_test = co_usage(build_usage_series(test, cfg, neighborhood, test_dates))
        p_test = potential_pain(u_test, sb)

    rows = {}
    for spec in sorted(solvers, key=lambda s: s.key):
        with _Step(f"solve {spec.key}"):
            report = run_solver(spec.name, p_train, n_c, spec.config,
                                derive_seed(seed, spec.key))
        alloc = report.allocation
        with _Step(f"evaluate {spec.key}"):
            train_daily = _per_day_pain(train, train_dates, cfg, neighborhood, sb, alloc)
            test_daily = _per_day_pain(test, test_dates, cfg, neighborhood, sb, alloc)
        rows[spec.key] = {
            "solver": spec.name,
            "seed": report.seed,
            "train_objective": total_pain(p_train, alloc),
            "train_pain_per_day": float(np.mean(train_daily)),
            "train_pain_daily": train_daily,
            "test_pain": float(np.mean(test_daily)),
            "test_pain_daily": test_daily,
            "allocation": dict(zip(neighborhood.home_ids, alloc.channels.tolist())),
            "allocation_digest": digest(alloc.values),
        }
    return {
        "home_ids": list(neighborhood.home_ids),
        "num_channels": n_c,
        "train_dates": [d.isoformat() for d in train_dates],
        "test_dates": [d.isoformat() for d in test_dates],
        "estimation": cfg.to_dict(),
        "seed": seed,
        "digests": {
            "U_train": digest(u_train.values),
            "S_b": digest(sb.values),
            "P_train": digest(p_train.values),
            "U_test": digest(u_test.values),
            "P_test": digest(p_test.values),
        },
        "solvers": rows,
    }


def run_experiment(spec: ExperimentSpec) -> dict:
    with _Step("load inputs"):
        mac_map = read_macmap_csv(spec.macmap)
        ids = spec.home_ids or tuple(mac_map.homes())
        hood = Neighborhood(ids, spec.num_channels)
        train = _read_days(spec.train_days)
        test = _read_days(spec.test_days)
        scans = [obs for f in spec.scans for obs in read_scans_csv(f)]
    return run_in_memory(train, test, scans, mac_map, hood, spec.estimation,
                         spec.solvers, spec.seed)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def generalization_trend(seeds: Sequence[int], n_homes: int = 20, sigma: float = 0.5,
                         solvers: Sequence[SolverSpec] = (SolverSpec("anneal"), SolverSpec("bnb")),
                         layout_shape=(4, 5), sensing_radius: float = 1.5,
                         cfg: EstimationConfig = EstimationConfig(),
                         num_channels: int = 2) -> dict:
    """Compare 1-train-day and 4-train-day allocations on the following day.

    For each seed a synthetic grid neighborhood with five days is generated;
    the 1-day run trains on day 4 only, the 4-day run on days 1-4, and both
    are tested on day 5. Returns mean test and train pain per solver.
    """
    from .synth import GRID, SynthConfig, generate

    acc = {s.key: {"test_1": [], "test_4": [], "train_1": [], "train_4": []} for s in solvers}
    for seed in seeds:
        data = generate(SynthConfig(
            n_homes=n_homes, layout=GRID, layout_shape=layout_shape,
            sensing_radius=sensing_radius, day_noise_sigma=sigma,
            n_train_days=4, n_test_days=1, seed=seed, num_channels=num_channels))
        test = data.test_days[0]
        for n_days, train_days in ((1, data.train_days[-1:]), (4, data.train_days)):
            train = [s for day in train_days for s in day]
            rep = run_in_memory(train, test, data.scans, data.mac_map, data.neighborhood,
                                cfg, solvers, seed)
            for key, row in rep["solvers"].items():
                acc[key][f"test_{n_days}"].append(row["test_pain"])
                acc[key][f"train_{n_days}"].append(row["train_pain_per_day"])
    return {
        key: {name: float(np.mean(vals)) for name, vals in d.items()}
        for key, d in acc.items()
    }
