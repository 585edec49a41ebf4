"""Expected trip time: recursive and collapsed evaluators, enumeration oracle,
and the marginal effect of a platform's dwell time.

``expected_time_recursive`` follows the operational trip semantics of
:mod:`pollinate.trips` and is checked against ``enumerate_trips`` (exhaustive)
and Monte Carlo. ``expected_time_collapsed`` evaluates the closed form

    sum_n sum_m p_mn p_n T_n  +  sum_x alpha_x sum_n sum_m p_mn**2 T_n

term by term. The two do not agree in general; ``compare_evaluators`` reports
the gap.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import InstanceTooLarge, InvalidStep, NoAlternativePlatform
from .landscape import (
    Landscape,
    continuation_probability,
    hop_distribution,
    landing_distribution,
)
from .trips import CONTINUATION_FAILED, DEFAULT_DEPTH_CUTOFF, RETURNED

MAX_PATHS = 10**7
FINAL_STAGE = "FinalStage"


@dataclass(frozen=True)
class ExpectationResult:
    value_seconds: float
    cutoff_used: int | None
    truncation_bound: float
    evaluator: str = "recursive"

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SensitivityResult:
    platform_id: str
    derivative: float
    method: str
    diagnostics: tuple = ()

    def to_dict(self):
        d = asdict(self)
        d["diagnostics"] = list(self.diagnostics)
        return d


@dataclass(frozen=True)
class PathEntry:
    steps: tuple  # (personality, platform, via_pool, hop_target) per stage
    probability: float
    seconds: float
    terminal: str


def _dwell_factor(person) -> float:
    pool = person.pool
    if pool is None or not pool.enabled:
        return 1.0
    return 1.0 - pool.pick_probability + pool.pick_probability * pool.dwell_multiplier


def alpha_tail(schedule, after: int, limit: int = 100_000) -> float:
    """sum over j > ``after`` of alpha_1 * ... * alpha_j (reach probability bound)."""
    prod, total = 1.0, 0.0
    for j in range(1, limit):
        prod *= continuation_probability(schedule, j)
        if prod == 0.0 or prod < 1e-300:
            break
        if j > after:
            total += prod
    return total


def _truncation_bound(landscape, cutoff):
    mult = max(
        (m.pool.dwell_multiplier for m in landscape.personalities if m.pool and m.pool.enabled),
        default=1.0,
    )
    top = max(p.dwell_time for p in landscape.platforms) * mult
    return top * alpha_tail(landscape.schedule, cutoff)


def expected_time_recursive(landscape: Landscape, start_personality: str, start_platform: str,
                            depth_cutoff: int = DEFAULT_DEPTH_CUTOFF) -> ExpectationResult:
    """Exact expected total dwell of a trip, truncated after ``depth_cutoff`` extensions."""
    landscape.check()
    if depth_cutoff < 0:
        raise ValueError("depth_cutoff must be >= 0")
    landing_distribution(landscape, start_personality, start_platform)

    plats = [p.id for p in landscape.platforms]
    people = [m.id for m in landscape.personalities]
    N, M = len(plats), len(people)
    dwell = np.array([p.dwell_time for p in landscape.platforms])
    factor = np.array([_dwell_factor(m) for m in landscape.personalities])

    # land[m, s, n]: landing probability; zero rows where m has no alternative from s
    land = np.zeros((M, N, N))
    for mi, m in enumerate(landscape.personalities):
        for si, s in enumerate(plats):
            if s not in m.presence:
                continue
            try:
                dist = landing_distribution(landscape, m.id, s)
            except NoAlternativePlatform:
                continue
            land[mi, si] = [dist.get(n, 0.0) for n in plats]
    # hop[n, m, m2]: probability of hopping from m to m2 on platform n
    hop = np.zeros((N, M, M))
    for ni, n in enumerate(plats):
        for mi, m in enumerate(people):
            probs, _ = hop_distribution(landscape, n, m)
            hop[ni, mi] = [probs.get(m2, 0.0) for m2 in people]

    stage_value = dwell[None, :] * factor[:, None]  # [m, n]
    E = np.zeros((M, N))  # value of stage cutoff+2 onwards
    for k in range(depth_cutoff + 1, 0, -1):
        a = continuation_probability(landscape.schedule, k) if k <= depth_cutoff else 0.0
        if a > 0.0:
            # follow[n, m] = sum_m2 hop[n, m, m2] * E[m2, n]
            follow = np.einsum("nab,bn->na", hop, E)
            inner = stage_value + a * follow.T
        else:
            inner = stage_value
        # correctly rounded landing sums keep the result independent of summation order
        terms = land * inner[:, None, :]
        E = np.array([[math.fsum(terms[m, s]) for s in range(N)] for m in range(M)])

    mi, si = landscape.personality_index[start_personality], landscape.platform_index[start_platform]
    return ExpectationResult(
        value_seconds=float(E[mi, si]),
        cutoff_used=int(depth_cutoff),
        truncation_bound=_truncation_bound(landscape, depth_cutoff),
        evaluator="recursive",
    )


def count_paths(landscape: Landscape, start_personality: str, start_platform: str,
                depth_cutoff: int) -> int:
    """Number of positive-probability paths ``enumerate_trips`` would emit."""
    memo = {}

    def count(x, m, s):
        key = (x, m, s)
        if key in memo:
            return memo[key]
        person = landscape.personality(m)
        try:
            land = landing_distribution(landscape, m, s)
        except NoAlternativePlatform:
            return 1
        pool = person.pool
        branches = 1
        if pool is not None and pool.enabled:
            branches = int(pool.pick_probability > 0) + int(pool.pick_probability < 1)
        total = 0
        for n, pn in land.items():
            if pn <= 0.0:
                continue
            if x > depth_cutoff:
                total += 1
                continue
            hops, p0 = hop_distribution(landscape, n, m)
            a = continuation_probability(landscape.schedule, x)
            sub = int(p0 > 0)
            for m2, ph in hops.items():
                if ph <= 0.0:
                    continue
                sub += int(a < 1.0)
                if a > 0.0:
                    sub += count(x + 1, m2, n)
            total += sub
        memo[key] = total * branches
        return memo[key]

    return count(1, start_personality, start_platform)


def enumerate_trips(landscape: Landscape, start, depth_cutoff: int, max_paths: int = MAX_PATHS):
    """Every positive-probability trip path up to ``depth_cutoff`` extensions.

    Returns ``(ExpectationResult, paths)``. At the last permitted stage the hop
    decision cannot change the trip time, so paths end at that landing.
    """
    landscape.check()
    personality, platform = start
    landing_distribution(landscape, personality, platform)
    n_paths = count_paths(landscape, personality, platform, depth_cutoff)
    if n_paths > max_paths:
        raise InstanceTooLarge(f"{n_paths} paths exceed the limit of {max_paths}")

    paths = []
    dwell = {p.id: p.dwell_time for p in landscape.platforms}

    def walk(x, m, s, prob, seconds, steps):
        person = landscape.personality(m)
        try:
            land = landing_distribution(landscape, m, s)
        except NoAlternativePlatform:
            paths.append(PathEntry(steps, prob, seconds, RETURNED))
            return
        pool = person.pool
        if pool is not None and pool.enabled:
            modes = [(True, pool.pick_probability, pool.dwell_multiplier),
                     (False, 1.0 - pool.pick_probability, 1.0)]
        else:
            modes = [(False, 1.0, 1.0)]
        for via_pool, pm, mult in modes:
            if pm <= 0.0:
                continue
            for n, pn in land.items():
                if pn <= 0.0:
                    continue
                p_land = prob * pm * pn
                t_land = seconds + dwell[n] * mult
                if x > depth_cutoff:
                    paths.append(PathEntry(steps + ((m, n, via_pool, None),), p_land, t_land,
                                           FINAL_STAGE))
                    continue
                hops, p0 = hop_distribution(landscape, n, m)
                if p0 > 0.0:
                    paths.append(PathEntry(steps + ((m, n, via_pool, None),), p_land * p0,
                                           t_land, RETURNED))
                a = continuation_probability(landscape.schedule, x)
                for m2, ph in hops.items():
                    if ph <= 0.0:
                        continue
                    here = steps + ((m, n, via_pool, m2),)
                    if a < 1.0:
                        paths.append(PathEntry(here, p_land * ph * (1.0 - a), t_land,
                                               CONTINUATION_FAILED))
                    if a > 0.0:
                        walk(x + 1, m2, n, p_land * ph * a, t_land, here)

    walk(1, personality, platform, 1.0, 0.0, ())
    value = math.fsum(p.probability * p.seconds for p in paths)
    result = ExpectationResult(
        value_seconds=value,
        cutoff_used=int(depth_cutoff),
        truncation_bound=_truncation_bound(landscape, depth_cutoff),
        evaluator="enumeration",
    )
    return result, paths


def _alpha_sum(schedule, stage_cutoff):
    """(sum of alpha_x for x <= stage_cutoff, omitted tail)."""
    if stage_cutoff is None:
        if schedule.kind == "geometric":
            a = schedule.base
            return a / (1.0 - a), 0.0
        return math.fsum(schedule.values), 0.0
    head = math.fsum(continuation_probability(schedule, x) for x in range(1, stage_cutoff + 1))
    if schedule.kind == "geometric":
        a = schedule.base
        tail = a ** (stage_cutoff + 1) / (1.0 - a) if a > 0.0 else 0.0
    else:
        tail = math.fsum(schedule.values[stage_cutoff:])
    return head, tail


def _collapsed_terms(landscape, start_personality, start_platform, landing=None):
    """Per-platform (p_n, sum_m p_mn, sum_m p_mn**2) over the landing support."""
    if landing is None:
        landing = landing_distribution(landscape, start_personality, start_platform)
    terms = {}
    for n, pn in landing.items():
        hops, _ = hop_distribution(landscape, n, start_personality)
        terms[n] = (pn, math.fsum(hops.values()), math.fsum(v * v for v in hops.values()))
    return terms


def _collapsed_value(landscape, start_personality, start_platform, stage_cutoff, landing, num):
    terms = _collapsed_terms(landscape, start_personality, start_platform, landing)
    dwell = {p.id: num(p.dwell_time) for p in landscape.platforms}
    a_sum, a_tail = _alpha_sum(landscape.schedule, stage_cutoff)
    first = sum((num(pn) * num(s1) * dwell[n] for n, (pn, s1, _) in terms.items()), num(0))
    squares = sum((num(s2) * dwell[n] for n, (_, _, s2) in terms.items()), num(0))
    return first + num(a_sum) * squares, num(a_tail) * squares


def expected_time_collapsed(landscape: Landscape, start_personality: str, start_platform: str,
                            stage_cutoff: int | None = None, landing=None) -> ExpectationResult:
    """Evaluate the collapsed closed form for expected trip time.

    ``stage_cutoff=None`` sums the whole schedule (the exact series for a
    geometric one). ``landing`` overrides the platform weights p_n.
    """
    landscape.check()
    if stage_cutoff is not None and stage_cutoff < 0:
        raise ValueError("stage_cutoff must be >= 0")
    value, tail = _collapsed_value(landscape, start_personality, start_platform, stage_cutoff,
                                   landing, float)
    return ExpectationResult(
        value_seconds=value,
        cutoff_used=stage_cutoff,
        truncation_bound=tail,
        evaluator="collapsed",
    )


def compare_evaluators(landscape, start_personality, start_platform,
                       depth_cutoff=DEFAULT_DEPTH_CUTOFF) -> dict:
    rec = expected_time_recursive(landscape, start_personality, start_platform, depth_cutoff)
    col = expected_time_collapsed(landscape, start_personality, start_platform, depth_cutoff)
    return {
        "recursive": rec.value_seconds,
        "collapsed": col.value_seconds,
        "divergence": rec.value_seconds - col.value_seconds,
        "depth_cutoff": depth_cutoff,
        "recursive_truncation_bound": rec.truncation_bound,
        "collapsed_truncation_bound": col.truncation_bound,
    }


def marginal_sensitivity(landscape: Landscape, platform_i: str, start_personality: str,
                         start_platform: str, stage_cutoff: int | None = None) -> SensitivityResult:
    """Analytic derivative of the collapsed form with respect to one dwell time.

    p_i * sum_m p_mi + (sum_x alpha_x) * sum_m p_mi**2, zero for platforms
    outside the landing support.
    """
    landscape.check()
    landscape.platform(platform_i)
    terms = _collapsed_terms(landscape, start_personality, start_platform)
    a_sum, _ = _alpha_sum(landscape.schedule, stage_cutoff)
    pi, s1, s2 = terms.get(platform_i, (0.0, 0.0, 0.0))
    hops, _ = hop_distribution(landscape, platform_i, start_personality)
    diags = []
    if not (pi > 0.0 and any(v > 0.0 for v in hops.values())):
        diags.append("PositivityPreconditionFailed")
    return SensitivityResult(platform_i, pi * s1 + a_sum * s2, "analytic", tuple(diags))


def finite_difference_sensitivity(landscape: Landscape, platform_i: str, step_seconds: float,
                                  evaluator: str, start_personality: str, start_platform: str,
                                  cutoff: int | None = None, exact: bool = True) -> SensitivityResult:
    """Central difference of an evaluator with respect to ``platform_i``'s dwell time.

    The quotient uses the representable step ``(T + h) - (T - h)``. With
    ``exact=True`` the collapsed form is evaluated in rational arithmetic at
    the perturbed inputs, so no cancellation error enters for small ``h``.
    """
    if not step_seconds > 0.0:
        raise InvalidStep(f"step_seconds must be > 0, got {step_seconds}")
    t = landscape.platform(platform_i).dwell_time
    t_hi, t_lo = t + step_seconds, t - step_seconds
    hi_ls, lo_ls = landscape.with_dwell(platform_i, t_hi), landscape.with_dwell(platform_i, t_lo)
    if evaluator == "collapsed":
        if exact:
            hi_ls.check()
            lo_ls.check()
            hi = _collapsed_value(hi_ls, start_personality, start_platform, cutoff, None, Fraction)[0]
            lo = _collapsed_value(lo_ls, start_personality, start_platform, cutoff, None, Fraction)[0]
            slope = (hi - lo) / (Fraction(t_hi) - Fraction(t_lo))
            return SensitivityResult(platform_i, float(slope), "finite-difference")
        hi = expected_time_collapsed(hi_ls, start_personality, start_platform, cutoff).value_seconds
        lo = expected_time_collapsed(lo_ls, start_personality, start_platform, cutoff).value_seconds
    elif evaluator == "recursive":
        depth = DEFAULT_DEPTH_CUTOFF if cutoff is None else cutoff
        hi = expected_time_recursive(hi_ls, start_personality, start_platform, depth).value_seconds
        lo = expected_time_recursive(lo_ls, start_personality, start_platform, depth).value_seconds
    else:
        raise ValueError(f"unknown evaluator {evaluator!r}")
    return SensitivityResult(platform_i, (hi - lo) / (t_hi - t_lo), "finite-difference")
