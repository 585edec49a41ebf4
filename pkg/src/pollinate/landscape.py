"""The social-media field: platforms, personalities and choice probabilities.

Objects here are plain frozen dataclasses. Construction never raises; use
:func:`validate_landscape` to get diagnostics or :meth:`Landscape.check` to
raise on the first invalid configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Mapping, Sequence

from .errors import (
    InvalidLandscape,
    NoAlternativePlatform,
    PersonalityNotPresent,
    UnknownPersonality,
    UnknownPlatform,
)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class OsmPlatform:
    id: str
    name: str = ""
    traffic_weight: float = 1.0
    dwell_time: float = 1.0


@dataclass(frozen=True)
class PoolConfig:
    enabled: bool = False
    pick_probability: float = 0.0
    dwell_multiplier: float = 1.0

    @property
    def active(self) -> bool:
        return self.enabled and self.pick_probability > 0.0


@dataclass(frozen=True)
class Personality:
    id: str
    presence: frozenset
    attraction: Mapping[str, float] = field(default_factory=dict)
    name: str = ""
    pool: PoolConfig | None = None

    def __post_init__(self):
        if not isinstance(self.presence, frozenset):
            object.__setattr__(self, "presence", frozenset(self.presence))
        object.__setattr__(self, "attraction", dict(self.attraction))

    def weight_on(self, platform_id: str) -> float:
        return float(self.attraction.get(platform_id, 0.0))

    @property
    def pool_active(self) -> bool:
        return self.pool is not None and self.pool.active


@dataclass(frozen=True)
class ContinuationSchedule:
    """Probability of extending a trip by one more stage.

    ``geometric`` gives alpha_x = base ** x; ``explicit`` lists alpha_1,
    alpha_2, ... and is zero past the end of the list.
    """

    kind: str = "geometric"
    base: float = 0.0
    values: tuple = ()

    @classmethod
    def geometric(cls, base: float) -> "ContinuationSchedule":
        return cls(kind="geometric", base=float(base))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "ContinuationSchedule":
        return cls(kind="explicit", values=tuple(float(v) for v in values))

    def alpha(self, stage_x: int) -> float:
        return continuation_probability(self, stage_x)

    @property
    def last_nonzero_stage(self) -> int | None:
        """Largest x with alpha_x > 0, or None when there is no such bound."""
        if self.kind == "geometric":
            return 0 if self.base == 0.0 else None
        nz = [i + 1 for i, v in enumerate(self.values) if v > 0.0]
        return nz[-1] if nz else 0


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class Landscape:
    platforms: tuple
    personalities: tuple
    return_weight: float = 1.0
    schedule: ContinuationSchedule = ContinuationSchedule()

    def __post_init__(self):
        object.__setattr__(self, "platforms", tuple(self.platforms))
        object.__setattr__(self, "personalities", tuple(self.personalities))

    @cached_property
    def platform_index(self) -> dict:
        return {p.id: i for i, p in enumerate(self.platforms)}

    @cached_property
    def personality_index(self) -> dict:
        return {m.id: i for i, m in enumerate(self.personalities)}

    def platform(self, platform_id: str) -> OsmPlatform:
        try:
            return self.platforms[self.platform_index[platform_id]]
        except KeyError:
            raise UnknownPlatform(platform_id) from None

    def personality(self, personality_id: str) -> Personality:
        try:
            return self.personalities[self.personality_index[personality_id]]
        except KeyError:
            raise UnknownPersonality(personality_id) from None

    @property
    def n_platforms(self) -> int:
        return len(self.platforms)

    @property
    def n_personalities(self) -> int:
        return len(self.personalities)

    def check(self) -> "Landscape":
        diags = validate_landscape(self)
        if diags:
            raise InvalidLandscape(diags)
        return self

    def with_dwell(self, platform_id: str, dwell_time: float) -> "Landscape":
        idx = self.platform_index[platform_id]
        platforms = list(self.platforms)
        platforms[idx] = replace(platforms[idx], dwell_time=dwell_time)
        return replace(self, platforms=tuple(platforms))

    def with_schedule(self, schedule: ContinuationSchedule) -> "Landscape":
        return replace(self, schedule=schedule)

    def with_pools_disabled(self) -> "Landscape":
        people = tuple(
            replace(m, pool=replace(m.pool, enabled=False)) if m.pool else m
            for m in self.personalities
        )
        return replace(self, personalities=people)

    def scale_dwell(self, factor: float) -> "Landscape":
        platforms = tuple(replace(p, dwell_time=p.dwell_time * factor) for p in self.platforms)
        return replace(self, platforms=platforms)


def landing_distribution(landscape: Landscape, personality: str, origin_platform: str) -> dict:
    """Probability that the pollinator lands the user on each other platform.

    Proportional to traffic weight over the personality's presence, with the
    origin platform excluded.
    """
    person = landscape.personality(personality)
    landscape.platform(origin_platform)
    if origin_platform not in person.presence:
        raise PersonalityNotPresent(f"{personality!r} is not present on {origin_platform!r}")
    targets = [p for p in landscape.platforms if p.id in person.presence and p.id != origin_platform]
    total = sum(p.traffic_weight for p in targets)
    if not targets or total <= 0.0:
        raise NoAlternativePlatform(
            f"{personality!r} has no alternative platform from {origin_platform!r}"
        )
    return {p.id: p.traffic_weight / total for p in targets}


def hop_distribution(landscape: Landscape, platform: str, exclude_personality: str | None):
    """Within-platform hop probabilities and the implicit return probability.

    Returns ``(probs, p0)`` where ``probs`` maps every other personality
    present on ``platform`` to w / (w0 + sum w) and ``p0`` is w0 over the
    same denominator.
    """
    landscape.platform(platform)
    others = [
        m for m in landscape.personalities
        if platform in m.presence and m.id != exclude_personality
    ]
    w0 = float(landscape.return_weight)
    denom = w0 + sum(m.weight_on(platform) for m in others)
    probs = {m.id: m.weight_on(platform) / denom for m in others}
    return probs, w0 / denom


def continuation_probability(schedule: ContinuationSchedule, stage_x: int) -> float:
    if stage_x < 1:
        raise ValueError(f"stage_x must be >= 1, got {stage_x}")
    if schedule.kind == "geometric":
        return schedule.base ** stage_x
    if schedule.kind == "explicit":
        if stage_x <= len(schedule.values):
            return schedule.values[stage_x - 1]
        return 0.0
    raise ValueError(f"unknown schedule kind {schedule.kind!r}")


def _check_schedule(schedule: ContinuationSchedule) -> list:
    out = []
    if schedule.kind == "geometric":
        if not 0.0 <= schedule.base < 1.0:
            out.append(Diagnostic("ScheduleOutOfRange", f"geometric base {schedule.base} not in [0, 1)"))
    elif schedule.kind == "explicit":
        vals = schedule.values
        bad = [v for v in vals if not 0.0 <= v < 1.0]
        if bad:
            out.append(Diagnostic("ScheduleOutOfRange", f"explicit values {bad} not in [0, 1)"))
        for i in range(1, len(vals)):
            # trailing zeros are allowed; every nonzero step must strictly decrease
            if vals[i - 1] <= vals[i] and (vals[i] > 0.0 or vals[i - 1] > 0.0):
                out.append(Diagnostic(
                    "NonDecreasingSchedule",
                    f"alpha_{i} = {vals[i - 1]} is not greater than alpha_{i + 1} = {vals[i]}",
                ))
                break
    else:
        out.append(Diagnostic("UnknownScheduleKind", f"unknown schedule kind {schedule.kind!r}"))
    return out


def validate_landscape(landscape: Landscape) -> list:
    """Return one :class:`Diagnostic` per violated invariant (empty when valid)."""
    diags = []
    add = lambda code, msg: diags.append(Diagnostic(code, msg))  # noqa: E731

    ids = [p.id for p in landscape.platforms]
    if len(ids) < 2:
        add("TooFewPlatforms", f"need at least 2 platforms, got {len(ids)}")
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        add("DuplicatePlatformId", f"duplicate platform ids {dupes}")
    for p in landscape.platforms:
        if not p.traffic_weight >= 0.0:
            add("NegativeTrafficWeight", f"platform {p.id!r} traffic_weight {p.traffic_weight}")
        if not p.dwell_time > 0.0:
            add("NonPositiveDwellTime", f"platform {p.id!r} dwell_time {p.dwell_time}")
    if landscape.platforms and not any(p.traffic_weight > 0.0 for p in landscape.platforms):
        add("NoPositiveTraffic", "every platform has zero traffic_weight")

    pids = [m.id for m in landscape.personalities]
    dupes = sorted({i for i in pids if pids.count(i) > 1})
    if dupes:
        add("DuplicatePersonalityId", f"duplicate personality ids {dupes}")
    known = set(ids)
    for m in landscape.personalities:
        if not m.presence:
            add("EmptyPresence", f"personality {m.id!r} has no presence")
        unknown = sorted(m.presence - known)
        if unknown:
            add("UnknownPresencePlatform", f"personality {m.id!r} present on unknown {unknown}")
        outside = sorted(set(m.attraction) - m.presence)
        if outside:
            add("AttractionOutsidePresence", f"personality {m.id!r} has weights for {outside}")
        neg = sorted(k for k, w in m.attraction.items() if not w >= 0.0)
        if neg:
            add("NegativeAttraction", f"personality {m.id!r} has negative weights on {neg}")
        if m.pool is not None:
            if not 0.0 <= m.pool.pick_probability <= 1.0:
                add("InvalidPickProbability",
                    f"personality {m.id!r} pick_probability {m.pool.pick_probability}")
            if not m.pool.dwell_multiplier >= 1.0:
                add("InvalidDwellMultiplier",
                    f"personality {m.id!r} dwell_multiplier {m.pool.dwell_multiplier}")

    if not landscape.return_weight > 0.0:
        add("ZeroReturnWeight", f"return weight must be > 0, got {landscape.return_weight}")
    diags.extend(_check_schedule(landscape.schedule))
    return diags


# ---------------------------------------------------------------------------
# dict / JSON round trip


def schedule_from_dict(d: Any) -> ContinuationSchedule:
    if isinstance(d, (int, float)):
        return ContinuationSchedule.geometric(d)
    kind = d.get("kind", "geometric")
    if kind == "geometric":
        return ContinuationSchedule.geometric(d.get("base", 0.0))
    if kind == "explicit":
        return ContinuationSchedule.explicit(d.get("values", []))
    return ContinuationSchedule(kind=kind)


def schedule_to_dict(s: ContinuationSchedule) -> dict:
    if s.kind == "explicit":
        return {"kind": "explicit", "values": list(s.values)}
    return {"kind": s.kind, "base": s.base}


def landscape_from_dict(d: Mapping) -> Landscape:
    platforms = [
        OsmPlatform(
            id=str(p["id"]),
            name=p.get("name", str(p["id"])),
            traffic_weight=float(p.get("traffic_weight", 1.0)),
            dwell_time=float(p.get("dwell_time", 1.0)),
        )
        for p in d["platforms"]
    ]
    personalities = []
    for m in d["personalities"]:
        presence = [str(x) for x in m.get("presence", [])]
        attraction = m.get("attraction", {})
        if isinstance(attraction, (int, float)):
            attraction = {pid: float(attraction) for pid in presence}
        pool = m.get("pool")
        if pool is not None:
            pool = PoolConfig(
                enabled=bool(pool.get("enabled", True)),
                pick_probability=float(pool.get("pick_probability", 0.0)),
                dwell_multiplier=float(pool.get("dwell_multiplier", 1.0)),
            )
        personalities.append(Personality(
            id=str(m["id"]),
            name=m.get("name", str(m["id"])),
            presence=frozenset(presence),
            attraction={str(k): float(v) for k, v in attraction.items()},
            pool=pool,
        ))
    return Landscape(
        platforms=tuple(platforms),
        personalities=tuple(personalities),
        return_weight=float(d.get("return_weight", 1.0)),
        schedule=schedule_from_dict(d.get("schedule", {"kind": "geometric", "base": 0.0})),
    )


def landscape_to_dict(landscape: Landscape) -> dict:
    out_people = []
    for m in landscape.personalities:
        entry = {
            "id": m.id,
            "name": m.name,
            "presence": sorted(m.presence),
            "attraction": {k: m.attraction[k] for k in sorted(m.attraction)},
        }
        if m.pool is not None:
            entry["pool"] = {
                "enabled": m.pool.enabled,
                "pick_probability": m.pool.pick_probability,
                "dwell_multiplier": m.pool.dwell_multiplier,
            }
        out_people.append(entry)
    return {
        "platforms": [
            {"id": p.id, "name": p.name, "traffic_weight": p.traffic_weight, "dwell_time": p.dwell_time}
            for p in landscape.platforms
        ],
        "personalities": out_people,
        "return_weight": landscape.return_weight,
        "schedule": schedule_to_dict(landscape.schedule),
    }


def scenario_s1(base: float = 0.0, pool: PoolConfig | None = None, dwell_a: float = 50.0) -> Landscape:
    """Three-platform reference landscape used throughout the tests.

    Platforms A (traffic 1), B (traffic 3, 100 s) and C (traffic 1, 200 s);
    personalities P and Q are both on all three with hop weight 1, so from
    either one the hop and return probabilities are 1/2 each.
    """
    platforms = (
        OsmPlatform("A", "A", traffic_weight=1.0, dwell_time=dwell_a),
        OsmPlatform("B", "B", traffic_weight=3.0, dwell_time=100.0),
        OsmPlatform("C", "C", traffic_weight=1.0, dwell_time=200.0),
    )
    everywhere = frozenset({"A", "B", "C"})
    ones = {"A": 1.0, "B": 1.0, "C": 1.0}
    people = (
        Personality("P", everywhere, ones, name="P", pool=pool),
        Personality("Q", everywhere, ones, name="Q", pool=pool),
    )
    return Landscape(platforms, people, return_weight=1.0,
                     schedule=ContinuationSchedule.geometric(base))
