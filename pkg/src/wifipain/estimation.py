"""Potential-pain estimation from AP telemetry.

The chain is::

    usage samples --hourly means--> UsageSeries --log(1 + u_i . u_j)--> U
    scan reports  --mean SNR-->      S --symmetrize, >= threshold-->    S_b
    P = S_b * U   (elementwise)

Local time is the wall-clock time of each timestamp's own UTC offset, unless
``EstimationConfig.timezone`` names an IANA zone to convert into.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .errors import DataError, DimensionError
from .pain import (ROLE_CO_USAGE, ROLE_PAIN, ROLE_SENSING, ROLE_SNR, Neighborhood,
                   PainMatrix)

WHOLE_DAY = "whole_day"
EVENING = "evening"

USAGE_HEADER = ("home_id", "timestamp", "airtime_pct")
SCANS_HEADER = ("scanner_home_id", "sensed_mac", "snr_db", "timestamp")
MACMAP_HEADER = ("mac", "home_id")


def parse_timestamp(text: str) -> datetime:
    """RFC 3339 timestamp with an explicit offset."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return ts


def normalize_mac(mac: str) -> str:
    return mac.strip().lower().replace("-", ":")


@dataclass(frozen=True)
class UsageSample:
    home_id: str
    timestamp: datetime
    airtime_pct: float

    def __post_init__(self):
        if not (0.0 <= self.airtime_pct <= 100.0):
            raise DataError(f"airtime_pct {self.airtime_pct} outside [0, 100]")
        if self.timestamp.tzinfo is None:
            raise DataError("usage timestamp needs a UTC offset")


@dataclass(frozen=True)
class ScanObservation:
    scanner_home_id: str
    sensed_mac: str
    snr_db: float
    timestamp: datetime

    def __post_init__(self):
        if not math.isfinite(self.snr_db) or self.snr_db < 0:
            raise DataError(f"snr_db must be finite and >= 0, got {self.snr_db}")
        object.__setattr__(self, "sensed_mac", normalize_mac(self.sensed_mac))


class MacMap(dict):
    """MAC address -> home id. MACs absent from the map are external APs."""

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "MacMap":
        out = cls()
        for mac, home in pairs:
            key = normalize_mac(mac)
            if key in out and out[key] != home:
                raise DataError(f"MAC {key} maps to both {out[key]} and {home}")
            out[key] = str(home)
        return out

    def homes(self) -> list[str]:
        """Mapped home ids in order of first appearance."""
        return list(dict.fromkeys(self.values()))


@dataclass(frozen=True)
class EstimationConfig:
    window: str = EVENING
    evening_hours: tuple[int, int] = (19, 22)
    # None: use every local date present in the samples.
    n_d: int | None = None
    snr_threshold_db: float = 10.0
    symmetrize: bool = True
    timezone: str | None = None

    def __post_init__(self):
        if self.window not in (WHOLE_DAY, EVENING):
            raise DataError(f"window must be {WHOLE_DAY!r} or {EVENING!r}")
        start, end = (int(h) for h in self.evening_hours)
        if not 0 <= start < end <= 24:
            raise DataError(f"evening_hours must satisfy 0 <= start < end <= 24")
        object.__setattr__(self, "evening_hours", (start, end))
        if self.n_d is not None and self.n_d < 1:
            raise DataError("n_d must be >= 1")
        if not self.snr_threshold_db > 0:
            raise DataError("snr_threshold_db must be > 0")

    @property
    def hours(self) -> tuple[int, ...]:
        if self.window == WHOLE_DAY:
            return tuple(range(24))
        return tuple(range(*self.evening_hours))

    def local(self, ts: datetime) -> datetime:
        return ts.astimezone(ZoneInfo(self.timezone)) if self.timezone else ts

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "evening_hours": list(self.evening_hours),
            "n_d": self.n_d,
            "snr_threshold_db": self.snr_threshold_db,
            "symmetrize": self.symmetrize,
            "timezone": self.timezone,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EstimationConfig":
        known = {k: doc[k] for k in cls.__dataclass_fields__ if k in doc}
        if "evening_hours" in known:
            known["evening_hours"] = tuple(known["evening_hours"])
        return cls(**known)


@dataclass(frozen=True)
class UsageSeries:
    """Hourly usage ``values[t, i]`` on a time axis shared by all homes."""

    home_ids: tuple[str, ...]
    axis: tuple[tuple[date, int], ...]
    values: np.ndarray = field(repr=False)

    @property
    def days(self) -> list[date]:
        return sorted({d for d, _ in self.axis})


# ---------------------------------------------------------------------------
# CSV readers

def _read_csv(path, header: Sequence[str]):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [h for h in header if h not in (reader.fieldnames or ())]
        if missing:
            raise DataError(f"{path}:1: missing column(s) {missing}")
        for row in reader:
            yield path, reader.line_num, row


def read_usage_csv(path) -> list[UsageSample]:
    out = []
    for p, line, row in _read_csv(path, USAGE_HEADER):
        try:
            out.append(UsageSample(row["home_id"].strip(), parse_timestamp(row["timestamp"]),
                                   float(row["airtime_pct"])))
        except (ValueError, TypeError, AttributeError) as exc:
            raise DataError(f"{p}:{line}: {exc}") from None
    return out


def read_scans_csv(path) -> list[ScanObservation]:
    out = []
    for p, line, row in _read_csv(path, SCANS_HEADER):
        try:
            out.append(ScanObservation(row["scanner_home_id"].strip(), row["sensed_mac"],
                                       float(row["snr_db"]), parse_timestamp(row["timestamp"])))
        except (ValueError, TypeError, AttributeError) as exc:
            raise DataError(f"{p}:{line}: {exc}") from None
    return out


def read_macmap_csv(path) -> MacMap:
    pairs = []
    for p, line, row in _read_csv(path, MACMAP_HEADER):
        if not row["mac"] or not row["home_id"]:
            raise DataError(f"{p}:{line}: empty mac or home_id")
        pairs.append((row["mac"], row["home_id"].strip()))
    try:
        return MacMap.from_pairs(pairs)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Estimation chain

def _unknown_homes(ids: Iterable[str], known: dict) -> list[str]:
    return sorted({h for h in ids if h not in known})


def build_usage_series(samples: Sequence[UsageSample], cfg: EstimationConfig,
                       neighborhood: Neighborhood,
                       days: Sequence[date] | None = None) -> UsageSeries:
    """Average quarter-hourly samples into hourly values per home.

    The day range is ``days`` when given (other samples are ignored);
    otherwise ``cfg.n_d`` consecutive local dates ending at the latest sample,
    where samples before that range are an error, or every local date present
    when ``cfg.n_d`` is None. Hours without samples are 0. In evening mode
    samples outside ``cfg.evening_hours`` are dropped.
    """
    index = neighborhood.index()
    bad = _unknown_homes((s.home_id for s in samples), index)
    if bad:
        raise DataError(f"usage samples reference unknown home(s): {bad}")

    local = [cfg.local(s.timestamp) for s in samples]
    strict = days is None
    if days is None:
        present = sorted({t.date() for t in local})
        if cfg.n_d is None:
            days = present
        elif present:
            days = [present[-1] - timedelta(days=k) for k in range(cfg.n_d - 1, -1, -1)]
        else:
            days = []
    days = sorted(set(days))
    if not days:
        raise DataError("no usage samples to estimate from")

    hours = cfg.hours
    axis = tuple((d, h) for d in days for h in hours)
    slot = {key: t for t, key in enumerate(axis)}
    day_set = set(days)

    # Deterministic accumulation: stable sort by instant, then input order.
    order = sorted(range(len(samples)), key=lambda k: samples[k].timestamp)
    sums = np.zeros((len(axis), neighborhood.n))
    counts = np.zeros((len(axis), neighborhood.n), dtype=int)
    stray = 0
    for k in order:
        t_local = local[k]
        d = t_local.date()
        if d not in day_set:
            stray += 1
            continue
        t = slot.get((d, t_local.hour))
        if t is None:
            continue
        i = index[samples[k].home_id]
        sums[t, i] += samples[k].airtime_pct
        counts[t, i] += 1
    if stray and strict:
        raise DataError(
            f"{stray} usage sample(s) fall outside the estimation days "
            f"{days[0].isoformat()}..{days[-1].isoformat()}")

    values = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return UsageSeries(neighborhood.home_ids, axis, values)


def co_usage(series: UsageSeries) -> PainMatrix:
    """``U[i, j] = ln(1 + sum_t u[t, i] u[t, j])``; symmetric, diagonal kept."""
    u = series.values
    if u.size == 0:
        raise DataError("usage series is empty")
    return PainMatrix(np.log1p(u.T @ u), series.home_ids, ROLE_CO_USAGE)


def snr_matrix(scans: Sequence[ScanObservation], mac_map: MacMap,
               neighborhood: Neighborhood) -> PainMatrix:
    """Mean SNR (dB) at which each home's AP hears each other home's AP."""
    index = neighborhood.index()
    bad = _unknown_homes((s.scanner_home_id for s in scans), index)
    if bad:
        raise DataError(f"scans reference unknown scanner home(s): {bad}")
    bad = _unknown_homes(mac_map.values(), index)
    if bad:
        raise DataError(f"MAC map references unknown home(s): {bad}")

    totals: dict[tuple[int, int], list[float]] = defaultdict(list)
    for k in sorted(range(len(scans)), key=lambda k: scans[k].timestamp):
        obs = scans[k]
        home = mac_map.get(obs.sensed_mac)
        if home is None:
            continue  # external AP
        i, j = index[obs.scanner_home_id], index[home]
        if i != j:
            totals[i, j].append(obs.snr_db)

    s = np.zeros((neighborhood.n, neighborhood.n))
    for (i, j), vals in totals.items():
        acc = 0.0
        for v in vals:
            acc += v
        s[i, j] = acc / len(vals)
    return PainMatrix(s, neighborhood.home_ids, ROLE_SNR)


def binarize_sensing(s: PainMatrix, cfg: EstimationConfig) -> PainMatrix:
    v = s.values
    if cfg.symmetrize:
        v = 0.5 * (v + v.T)
    sb = (v >= cfg.snr_threshold_db).astype(float)
    np.fill_diagonal(sb, 0.0)
    return PainMatrix(sb, s.home_ids, ROLE_SENSING)


def potential_pain(u: PainMatrix, sb: PainMatrix) -> PainMatrix:
    if u.values.shape != sb.values.shape:
        raise DimensionError(
            f"co-usage matrix is {u.n}x{u.n} but sensing matrix is {sb.n}x{sb.n}")
    if sb.role != ROLE_SENSING:
        sb = PainMatrix(sb.values, sb.home_ids, ROLE_SENSING)
    return PainMatrix(sb.values * u.values, u.home_ids, ROLE_PAIN)


@dataclass(frozen=True)
class Estimate:
    series: UsageSeries
    u: PainMatrix
    s: PainMatrix
    sb: PainMatrix
    p: PainMatrix


def estimate(samples: Sequence[UsageSample], scans: Sequence[ScanObservation],
             mac_map: MacMap, cfg: EstimationConfig, neighborhood: Neighborhood,
             days: Sequence[date] | None = None) -> Estimate:
    """Run the whole chain."""
    series = build_usage_series(samples, cfg, neighborhood, days)
    u = co_usage(series)
    s = snr_matrix(scans, mac_map, neighborhood)
    sb = binarize_sensing(s, cfg)
    return Estimate(series, u, s, sb, potential_pain(u, sb))


def local_dates(samples: Iterable[UsageSample], cfg: EstimationConfig) -> list[date]:
    return sorted({cfg.local(s.timestamp).date() for s in samples})
