"""Synthetic neighborhoods with known potential pain.

Homes sit on a grid or in a building (units along x, floors along y, unit
spacing 1). Pairs closer than ``sensing_radius`` hear each other at an SNR
drawn from [10, 30] dB, so the sensing graph is exactly the geometric graph.
Every home has a 24-hour base usage profile; on day ``k`` each home's profile
is scaled by its own mean-one log-normal factor ``exp(sigma z - sigma^2 / 2)``.

Random streams: ``SeedSequence(seed, spawn_key=(s,))`` with ``s`` = 0 for base
profiles, 1 for scans, 2 for daily noise.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import DataError
from .estimation import (EstimationConfig, MacMap, ScanObservation, UsageSample,
                         UsageSeries, co_usage, potential_pain)
from .pain import ROLE_SENSING, Neighborhood, PainMatrix, dump_json

GRID = "grid"
BUILDING = "building"


@dataclass(frozen=True)
class SynthConfig:
    n_homes: int = 8
    layout: str = BUILDING
    layout_shape: tuple[int, int] = (2, 4)  # (rows, cols) or (floors, units_per_floor)
    sensing_radius: float = 2.0
    base_usage_profile: np.ndarray | None = field(default=None, repr=False)
    day_noise_sigma: float = 0.0
    n_train_days: int = 4
    n_test_days: int = 1
    seed: int = 0
    num_channels: int = 2
    start_date: date = date(2021, 8, 21)
    utc_offset_hours: int = -4
    scans_per_pair: int = 3
    external_aps: int = 2

    def __post_init__(self):
        if self.n_homes < 2:
            raise DataError("n_homes must be >= 2")
        if not self.sensing_radius > 0:
            raise DataError("sensing_radius must be > 0")
        if self.day_noise_sigma < 0:
            raise DataError("day_noise_sigma must be >= 0")
        if self.layout not in (GRID, BUILDING):
            raise DataError(f"layout must be {GRID!r} or {BUILDING!r}")
        a, b = (int(x) for x in self.layout_shape)
        if a * b != self.n_homes:
            raise DataError(f"layout {a}x{b} does not hold {self.n_homes} homes")
        object.__setattr__(self, "layout_shape", (a, b))
        if self.base_usage_profile is not None:
            prof = np.asarray(self.base_usage_profile, dtype=float)
            if prof.shape != (self.n_homes, 24):
                raise DataError(f"base_usage_profile must be {self.n_homes}x24")
            if np.any(prof < 0) or np.any(prof > 100):
                raise DataError("base_usage_profile values must lie in [0, 100]")
            object.__setattr__(self, "base_usage_profile", prof)
        if self.n_train_days < 1 or self.n_test_days < 0:
            raise DataError("need n_train_days >= 1 and n_test_days >= 0")

    @property
    def tz(self) -> timezone:
        return timezone(timedelta(hours=self.utc_offset_hours))

    @property
    def n_days(self) -> int:
        return self.n_train_days + self.n_test_days

    def day(self, k: int) -> date:
        """Calendar date of day ``k`` (0-based)."""
        return self.start_date + timedelta(days=k)

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthConfig":
        known = {k: doc[k] for k in cls.__dataclass_fields__ if k in doc}
        if "layout_shape" in known:
            known["layout_shape"] = tuple(known["layout_shape"])
        if isinstance(known.get("start_date"), str):
            known["start_date"] = date.fromisoformat(known["start_date"])
        return cls(**known)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def layout_positions(cfg: SynthConfig) -> tuple[list[str], np.ndarray]:
    a, b = cfg.layout_shape
    ids, pos = [], []
    for r in range(a):
        for c in range(b):
            if cfg.layout == BUILDING:
                ids.append(f"{r + 1}{c + 1:02d}")
            else:
                ids.append(f"H{r * b + c + 1:03d}")
            pos.append((float(c), float(r)))
    return ids, np.array(pos)


def sensing_graph(positions: np.ndarray, radius: float) -> np.ndarray:
    d = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=2)
    adj = (d <= radius).astype(float)
    np.fill_diagonal(adj, 0.0)
    return adj


def default_profiles(n: int, rng: np.random.Generator) -> np.ndarray:
    # Daily rhythm: quiet nights, moderate days, an evening peak. Per-home
    # levels are log-uniform over 0.2-5 % airtime.
    hours = np.arange(24)
    rhythm = 0.15 + 0.45 * ((hours >= 7) & (hours < 19)) + 0.9 * ((hours >= 18) & (hours < 23))
    level = np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=(n, 1)))
    texture = rng.uniform(0.2, 1.0, size=(n, 24))
    return np.clip(level * rhythm[None, :] * texture, 0.0, 100.0)


@dataclass
class SynthData:
    config: SynthConfig
    neighborhood: Neighborhood
    positions: np.ndarray
    adjacency: np.ndarray
    base_profile: np.ndarray
    hourly: np.ndarray  # (n_days, 24, n_homes)
    usage_days: list[list[UsageSample]]
    scans: list[ScanObservation]
    mac_map: MacMap

    @property
    def train_days(self) -> list[list[UsageSample]]:
        return self.usage_days[: self.config.n_train_days]

    @property
    def test_days(self) -> list[list[UsageSample]]:
        return self.usage_days[self.config.n_train_days:]

    def ground_truth(self, est: EstimationConfig = EstimationConfig(),
                     n_days: int = 1) -> PainMatrix:
        """Potential pain of ``n_days`` noise-free days under ``est``'s window.

        Computed from the base profiles and the geometric sensing graph, not
        from the emitted files.
        """
        hours = list(est.hours)
        block = self.base_profile[:, hours].T
        series = UsageSeries(self.neighborhood.home_ids, (),
                             np.concatenate([block] * n_days, axis=0))
        sb = PainMatrix(self.adjacency, self.neighborhood.home_ids, ROLE_SENSING)
        return potential_pain(co_usage(series), sb)

    def write(self, out_dir, est: EstimationConfig = EstimationConfig()) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for k, samples in enumerate(self.usage_days, start=1):
            with (out / f"usage_day_{k}.csv").open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["home_id", "timestamp", "airtime_pct"])
                for s in samples:
                    w.writerow([s.home_id, s.timestamp.isoformat(), repr(s.airtime_pct)])
        with (out / "scans.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scanner_home_id", "sensed_mac", "snr_db", "timestamp"])
            for s in self.scans:
                w.writerow([s.scanner_home_id, s.sensed_mac, repr(s.snr_db), s.timestamp.isoformat()])
        with (out / "macmap.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mac", "home_id"])
            for mac, home in self.mac_map.items():
                w.writerow([mac, home])
        dump_json(self.ground_truth(est).to_dict(self.config.num_channels),
                  out / "ground_truth_p.json")
        cfg = self.config
        dump_json({
            "train_days": [f"usage_day_{k}.csv" for k in range(1, cfg.n_train_days + 1)],
            "test_days": [f"usage_day_{k}.csv" for k in range(cfg.n_train_days + 1, cfg.n_days + 1)],
            "scans": ["scans.csv"],
            "macmap": "macmap.csv",
            "num_channels": cfg.num_channels,
            "estimation": est.to_dict(),
            "solvers": [{"name": "anneal"}, {"name": "bnb"}],
            "seed": cfg.seed,
            "output": "report.json",
        }, out / "experiment.json")
        return out


def _mac(k: int, external: bool = False) -> str:
    prefix = "0a" if external else "02"
    return f"{prefix}:00:00:00:{(k >> 8) & 0xff:02x}:{k & 0xff:02x}"


def generate(cfg: SynthConfig) -> SynthData:
    ids, pos = layout_positions(cfg)
    hood = Neighborhood(tuple(ids), cfg.num_channels)
    adj = sensing_graph(pos, cfg.sensing_radius)
    n = cfg.n_homes

    base = cfg.base_usage_profile
    if base is None:
        base = default_profiles(n, _rng(cfg.seed, 0))

    noise_rng = _rng(cfg.seed, 2)
    sigma = cfg.day_noise_sigma
    hourly = np.empty((cfg.n_days, 24, n))
    usage_days = []
    for k in range(cfg.n_days):
        factor = np.exp(sigma * noise_rng.standard_normal((1, n)) - 0.5 * sigma**2)
        day_vals = np.clip(base.T * factor, 0.0, 100.0)
        hourly[k] = day_vals
        midnight = datetime.combine(cfg.day(k), datetime.min.time(), cfg.tz)
        samples = []
        for h in range(24):
            for q in range(4):
                ts = midnight + timedelta(hours=h, minutes=15 * q)
                for i, home in enumerate(ids):
                    samples.append(UsageSample(home, ts, float(day_vals[h, i])))
        usage_days.append(samples)

    mac_map = MacMap.from_pairs((_mac(i), home) for i, home in enumerate(ids))
    scan_rng = _rng(cfg.seed, 1)
    scans = []
    train_span = timedelta(days=cfg.n_train_days)
    start = datetime.combine(cfg.day(0), datetime.min.time(), cfg.tz)
    for i in range(n):
        for rep in range(cfg.scans_per_pair):
            ts = start + train_span * (rep + 0.5) / cfg.scans_per_pair + timedelta(minutes=i)
            ts = ts.replace(microsecond=0)
            for j in range(n):
                if adj[i, j]:
                    scans.append(ScanObservation(ids[i], _mac(j), float(scan_rng.uniform(10.0, 30.0)), ts))
            for e in range(cfg.external_aps):
                scans.append(ScanObservation(ids[i], _mac(e, external=True),
                                             float(scan_rng.uniform(5.0, 40.0)), ts))
    return SynthData(cfg, hood, pos, adj, base, hourly, usage_days, scans, mac_map)
