"""Sampling pollinator trips and aggregating them into traffic reports.

Draw order inside one stage (each draw consumes the next uniform of the trip
seed; see :mod:`pollinate.rng`):

1. pool-vs-direct, only when the current personality has a pool enabled
   (``u < pick_probability`` means the pool is used);
2. platform, by inverse CDF over the landing distribution, platforms in
   landscape order;
3. dwell accrues (no draw);
4. hop-vs-return, by inverse CDF over ``[return, personality_1, ...]``;
5. after a hop, and only while ``stage <= depth_cutoff``, continuation with
   ``u < alpha_stage``.

A hop at stage ``depth_cutoff + 1`` ends the trip with ``DepthCutoff``
without consuming a continuation draw.
"""

from __future__ import annotations

import bisect
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng
from .errors import InvalidTripCount, NoAlternativePlatform, NoPoolConfigured
from .landscape import (
    Landscape,
    continuation_probability,
    hop_distribution,
    landing_distribution,
)

DEFAULT_DEPTH_CUTOFF = 64
SCHEMA_VERSION = 1

RETURNED = "ReturnedAndQuit"
CONTINUATION_FAILED = "ContinuationFailed"
DEPTH_CUTOFF = "DepthCutoff"
TERMINAL_REASONS = (RETURNED, CONTINUATION_FAILED, DEPTH_CUTOFF)

_CHUNK = 1 << 17


@dataclass(frozen=True)
class StageRecord:
    stage_index: int
    personality_id: str
    platform_id: str
    dwell_seconds: float
    via_pool: bool = False
    hop_target: str | None = None


@dataclass(frozen=True)
class TripRecord:
    seed: int
    stages: tuple
    terminal_reason: str

    @property
    def total_time(self) -> float:
        total = 0.0
        for st in self.stages:
            total += st.dwell_seconds
        return total

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "terminal_reason": self.terminal_reason,
            "total_seconds": self.total_time,
            "stages": [asdict(s) for s in self.stages],
        }


@dataclass(frozen=True)
class PlatformTraffic:
    landings: int
    total_seconds: float
    share_of_landings: float


@dataclass(frozen=True)
class TrafficReport:
    platforms: dict
    trips: int
    mean_trip_seconds: float
    standard_error: float
    terminal_counts: dict = field(default_factory=dict)
    mean_stages: float = 0.0
    master_seed: int | None = None
    depth_cutoff: int | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "generator": {"name": rng.GENERATOR_NAME, "version": rng.GENERATOR_VERSION},
            "master_seed": self.master_seed,
            "depth_cutoff": self.depth_cutoff,
            "trips": self.trips,
            "mean_trip_seconds": self.mean_trip_seconds,
            "standard_error": self.standard_error,
            "mean_stages": self.mean_stages,
            "terminal_counts": dict(self.terminal_counts),
            "platforms": {k: asdict(v) for k, v in self.platforms.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


class TripTables:
    """Probability tables of a landscape, laid out for index-based sampling."""

    def __init__(self, landscape: Landscape, depth_cutoff: int = DEFAULT_DEPTH_CUTOFF):
        landscape.check()
        if depth_cutoff < 0:
            raise ValueError("depth_cutoff must be >= 0")
        self.landscape = landscape
        self.depth_cutoff = int(depth_cutoff)
        self.platform_ids = [p.id for p in landscape.platforms]
        self.personality_ids = [m.id for m in landscape.personalities]
        N, M = len(self.platform_ids), len(self.personality_ids)

        self.dwell = np.array([p.dwell_time for p in landscape.platforms], dtype=float)
        self.landing_cdf = np.ones((M, N, N))
        self.has_alt = np.zeros((M, N), dtype=bool)
        for mi, m in enumerate(landscape.personalities):
            for si, s in enumerate(self.platform_ids):
                if s not in m.presence:
                    continue
                try:
                    dist = landing_distribution(landscape, m.id, s)
                except NoAlternativePlatform:
                    continue
                probs = np.array([dist.get(pid, 0.0) for pid in self.platform_ids])
                self.landing_cdf[mi, si] = _cdf(probs)
                self.has_alt[mi, si] = True

        # outcome 0 is the return to the pollinator, outcome k is personality k-1
        self.hop_cdf = np.ones((N, M, M + 1))
        for ni, n in enumerate(self.platform_ids):
            for mi, m in enumerate(self.personality_ids):
                probs, p0 = hop_distribution(landscape, n, m)
                vec = np.array([p0] + [probs.get(pid, 0.0) for pid in self.personality_ids])
                self.hop_cdf[ni, mi] = _cdf(vec)

        self.pool_draw = np.zeros(M, dtype=bool)
        self.pick = np.zeros(M)
        self.multiplier = np.ones(M)
        for mi, m in enumerate(landscape.personalities):
            if m.pool is not None and m.pool.enabled:
                self.pool_draw[mi] = True
                self.pick[mi] = m.pool.pick_probability
                self.multiplier[mi] = m.pool.dwell_multiplier

        self.alpha = np.zeros(self.depth_cutoff + 2)
        for x in range(1, self.depth_cutoff + 1):
            self.alpha[x] = continuation_probability(landscape.schedule, x)

    def start_indices(self, personality: str, platform: str):
        mi = self.landscape.personality_index[personality]
        si = self.landscape.platform_index[platform]
        # raises NoAlternativePlatform / PersonalityNotPresent for a bad start pair
        landing_distribution(self.landscape, personality, platform)
        return mi, si


def _cdf(probs: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    pos = np.flatnonzero(probs > 0.0)
    if pos.size:
        cdf[pos[-1]:] = 1.0
    return cdf


def sample_trip(landscape, start_personality, start_platform, seed,
                depth_cutoff=DEFAULT_DEPTH_CUTOFF, tables=None) -> TripRecord:
    """Sample one trip; the record is a pure function of the inputs."""
    t = tables if tables is not None else TripTables(landscape, depth_cutoff)
    m, s = t.start_indices(start_personality, start_platform)
    stream = rng.UniformStream(seed)
    stages = []
    x = 1
    while True:
        if not t.has_alt[m, s]:
            reason = RETURNED
            break
        via_pool = False
        if t.pool_draw[m]:
            via_pool = stream.next() < t.pick[m]
        n = bisect.bisect_right(t.landing_cdf[m, s], stream.next())
        dwell = t.dwell[n] * (t.multiplier[m] if via_pool else 1.0)
        k = bisect.bisect_right(t.hop_cdf[n, m], stream.next())
        target = None if k == 0 else k - 1
        stages.append(StageRecord(
            stage_index=x,
            personality_id=t.personality_ids[m],
            platform_id=t.platform_ids[n],
            dwell_seconds=float(dwell),
            via_pool=bool(via_pool),
            hop_target=None if target is None else t.personality_ids[target],
        ))
        if target is None:
            reason = RETURNED
            break
        if x > t.depth_cutoff:
            reason = DEPTH_CUTOFF
            break
        if not stream.next() < t.alpha[x]:
            reason = CONTINUATION_FAILED
            break
        m, s, x = target, n, x + 1
    return TripRecord(seed=int(seed) & rng.MASK64, stages=tuple(stages), terminal_reason=reason)


def iter_trip_records(landscape, start_personality, start_platform, n_trips, master_seed,
                      depth_cutoff=DEFAULT_DEPTH_CUTOFF):
    tables = TripTables(landscape, depth_cutoff)
    for i in range(n_trips):
        yield sample_trip(landscape, start_personality, start_platform,
                          rng.trip_seed(master_seed, i), tables=tables)


def write_trace(path, records) -> int:
    """Write trip records as JSON lines; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict()) + "\n")
            count += 1
    return count


# ---------------------------------------------------------------------------
# batch sampling


@dataclass
class _ChunkResult:
    times: np.ndarray
    stages: np.ndarray
    direct: np.ndarray  # landings per platform, not via pool
    pooled: np.ndarray  # landings per (platform, personality) via pool
    reasons: np.ndarray  # counts in TERMINAL_REASONS order


def _simulate_chunk(t: TripTables, m0: int, s0: int, seeds: np.ndarray) -> _ChunkResult:
    size = seeds.shape[0]
    N, M = len(t.platform_ids), len(t.personality_ids)
    times = np.zeros(size)
    n_stages = np.zeros(size, dtype=np.int64)
    counter = np.zeros(size, dtype=np.uint64)
    m = np.full(size, m0, dtype=np.int64)
    s = np.full(size, s0, dtype=np.int64)
    direct = np.zeros(N, dtype=np.int64)
    pooled = np.zeros((N, M), dtype=np.int64)
    reasons = np.zeros(3, dtype=np.int64)

    active = np.arange(size)
    x = 1
    while active.size:
        cm, cs = m[active], s[active]
        ok = t.has_alt[cm, cs]
        reasons[0] += np.count_nonzero(~ok)
        active, cm, cs = active[ok], cm[ok], cs[ok]
        if not active.size:
            break
        seeds_a = seeds[active]

        via_pool = np.zeros(active.size, dtype=bool)
        drawn = t.pool_draw[cm]
        if drawn.any():
            u = rng.uniform_at_array(seeds_a[drawn], counter[active[drawn]])
            counter[active[drawn]] += np.uint64(1)
            via_pool[drawn] = u < t.pick[cm[drawn]]

        u = rng.uniform_at_array(seeds_a, counter[active])
        counter[active] += np.uint64(1)
        n = (t.landing_cdf[cm, cs] <= u[:, None]).sum(axis=1)

        dwell = t.dwell[n] * np.where(via_pool, t.multiplier[cm], 1.0)
        times[active] += dwell
        n_stages[active] += 1
        direct += np.bincount(n[~via_pool], minlength=N)
        if via_pool.any():
            np.add.at(pooled, (n[via_pool], cm[via_pool]), 1)

        u = rng.uniform_at_array(seeds_a, counter[active])
        counter[active] += np.uint64(1)
        k = (t.hop_cdf[n, cm] <= u[:, None]).sum(axis=1)

        returned = k == 0
        reasons[0] += np.count_nonzero(returned)
        hopped = ~returned
        active, n, k = active[hopped], n[hopped], k[hopped]
        if x > t.depth_cutoff:
            reasons[2] += active.size
            break
        u = rng.uniform_at_array(seeds[active], counter[active])
        counter[active] += np.uint64(1)
        cont = u < t.alpha[x]
        reasons[1] += np.count_nonzero(~cont)
        active, n, k = active[cont], n[cont], k[cont]
        m[active] = k - 1
        s[active] = n
        x += 1
    return _ChunkResult(times, n_stages, direct, pooled, reasons)


def _run_range(t, m0, s0, master_seed, start, stop):
    parts = []
    for lo in range(start, stop, _CHUNK):
        hi = min(stop, lo + _CHUNK)
        parts.append(_simulate_chunk(t, m0, s0, rng.trip_seeds(master_seed, lo, hi)))
    return _merge(parts)


def _merge(parts):
    return _ChunkResult(
        times=np.concatenate([p.times for p in parts]),
        stages=np.concatenate([p.stages for p in parts]),
        direct=sum(p.direct for p in parts),
        pooled=sum(p.pooled for p in parts),
        reasons=sum(p.reasons for p in parts),
    )


def simulate_trip_times(landscape, start_personality, start_platform, n_trips, master_seed,
                        depth_cutoff=DEFAULT_DEPTH_CUTOFF) -> np.ndarray:
    """Per-trip total seconds, in trip-index order."""
    t = TripTables(landscape, depth_cutoff)
    m0, s0 = t.start_indices(start_personality, start_platform)
    return _run_range(t, m0, s0, master_seed, 0, n_trips).times


def _report(t: TripTables, res: _ChunkResult, master_seed) -> TrafficReport:
    n = res.times.shape[0]
    mean = math.fsum(res.times) / n
    if n > 1:
        var = math.fsum((res.times - mean) ** 2) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    total_landings = int(res.direct.sum() + res.pooled.sum())
    platforms = {}
    for ni, pid in enumerate(t.platform_ids):
        direct = int(res.direct[ni])
        pooled = res.pooled[ni]
        landings = direct + int(pooled.sum())
        seconds = t.dwell[ni] * (direct + math.fsum(pooled * t.multiplier))
        share = landings / total_landings if total_landings else 0.0
        platforms[pid] = PlatformTraffic(landings, float(seconds), share)
    return TrafficReport(
        platforms=platforms,
        trips=n,
        mean_trip_seconds=mean,
        standard_error=se,
        terminal_counts={r: int(c) for r, c in zip(TERMINAL_REASONS, res.reasons)},
        mean_stages=float(res.stages.sum()) / n,
        master_seed=int(master_seed),
        depth_cutoff=t.depth_cutoff,
    )


def _worker(args):
    return _run_range(*args)


def run_monte_carlo(landscape, start_personality, start_platform, n_trips, master_seed,
                    depth_cutoff=DEFAULT_DEPTH_CUTOFF, n_jobs=1) -> TrafficReport:
    """Aggregate ``n_trips`` sampled trips into a :class:`TrafficReport`.

    Trip ``i`` uses ``rng.trip_seed(master_seed, i)``. Work is split into
    contiguous index ranges; results are concatenated in index order and
    reduced with exact summation, so ``n_jobs`` never changes the output.
    """
    if not isinstance(n_trips, (int, np.integer)) or n_trips < 1:
        raise InvalidTripCount(f"n_trips must be a positive integer, got {n_trips!r}")
    t = TripTables(landscape, depth_cutoff)
    m0, s0 = t.start_indices(start_personality, start_platform)
    if n_jobs is None or n_jobs < 1:
        n_jobs = os.cpu_count() or 1
    n_jobs = min(int(n_jobs), int(n_trips))
    if n_jobs == 1:
        res = _run_range(t, m0, s0, master_seed, 0, n_trips)
    else:
        bounds = np.linspace(0, n_trips, n_jobs + 1).astype(int)
        jobs = [(t, m0, s0, master_seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            res = _merge(list(ex.map(_worker, jobs)))
    return _report(t, res, master_seed)


def derive_stream_seed(master_seed: int, stream: int) -> int:
    return rng.splitmix64_at(rng.mix64(master_seed & rng.MASK64), stream)


def run_pool_comparison(landscape, start, n_trips, master_seed,
                        depth_cutoff=DEFAULT_DEPTH_CUTOFF, n_jobs=1):
    """Reports with every pool disabled and with pools as configured.

    The two runs use independent seed streams derived from ``master_seed``.
    """
    if not any(m.pool is not None and m.pool.enabled for m in landscape.personalities):
        raise NoPoolConfigured("no personality has an enabled pool")
    personality, platform = start
    off = run_monte_carlo(landscape.with_pools_disabled(), personality, platform, n_trips,
                          derive_stream_seed(master_seed, 0), depth_cutoff, n_jobs)
    on = run_monte_carlo(landscape, personality, platform, n_trips,
                         derive_stream_seed(master_seed, 1), depth_cutoff, n_jobs)
    return off, on
