"""Two-type media-length preferences and exposure-driven homogenisation.

A user type prefers media of length ``preferred_length`` seconds with
tolerance ``width``; engagement with a piece of length L is a unimodal kernel
peaking at 1. Consuming media pulls the preferred length toward what was
consumed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateInterval,
    EmptyProfiles,
    InvalidLearningRate,
    NonPositiveLength,
)


@dataclass(frozen=True)
class EngagementProfile:
    type_label: str
    preferred_length: float
    width: float

    def __post_init__(self):
        if not (self.preferred_length > 0 and self.width > 0):
            raise ValueError(
                f"preferred_length and width must be > 0, got {self.preferred_length}, {self.width}"
            )


@dataclass(frozen=True)
class MedianLengthResult:
    length: float
    joint_engagement: float
    grid_resolution: float


def gaussian_kernel(length, mu, sigma):
    return np.exp(-((length - mu) ** 2) / (2.0 * sigma**2))


def triangular_kernel(length, mu, sigma):
    # same variance as the gaussian of width sigma; zero outside its support
    half = sigma * math.sqrt(6.0)
    return np.maximum(0.0, 1.0 - np.abs(length - mu) / half)


KERNELS = {"gaussian": gaussian_kernel, "triangular": triangular_kernel}


def engagement(profile: EngagementProfile, length_seconds, kernel="gaussian"):
    arr = np.asarray(length_seconds, dtype=float)
    if np.any(~(arr > 0)):
        raise NonPositiveLength(f"media length must be > 0, got {length_seconds!r}")
    out = KERNELS[kernel](arr, profile.preferred_length, profile.width)
    return float(out) if out.ndim == 0 else out


def joint_engagement(profiles, length_seconds, kernel="gaussian"):
    return sum(engagement(p, length_seconds, kernel) for p in profiles)


def default_interval(profiles, resolution):
    lo = min(p.preferred_length - 3 * p.width for p in profiles)
    hi = max(p.preferred_length + 3 * p.width for p in profiles)
    return max(lo, resolution), hi


def median_media_length(profiles, search_interval=None, grid_resolution=0.01,
                        kernel="gaussian") -> MedianLengthResult:
    """Grid argmax of summed engagement; ties go to the shortest length."""
    profiles = list(profiles)
    if not profiles:
        raise EmptyProfiles("need at least one engagement profile")
    if not grid_resolution > 0:
        raise ValueError(f"grid_resolution must be > 0, got {grid_resolution}")
    lo, hi = search_interval if search_interval is not None else default_interval(
        profiles, grid_resolution)
    if not (0 < lo < hi):
        raise DegenerateInterval(f"search interval ({lo}, {hi}) is empty or non-positive")
    mus = [p.preferred_length for p in profiles]
    if min(mus) < lo or max(mus) > hi:
        raise DegenerateInterval(f"search interval ({lo}, {hi}) does not cover {mus}")
    n = int(math.floor((hi - lo) / grid_resolution + 1e-9))
    grid = lo + grid_resolution * np.arange(n + 1)
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    values = joint_engagement(profiles, grid, kernel)
    best = int(np.argmax(values))
    return MedianLengthResult(float(grid[best]), float(values[best]), float(grid_resolution))


def exposure_update(profile: EngagementProfile, consumed_length: float,
                    learning_rate: float) -> EngagementProfile:
    if not 0.0 <= learning_rate <= 1.0:
        raise InvalidLearningRate(f"learning_rate must be in [0, 1], got {learning_rate}")
    if not consumed_length > 0:
        raise NonPositiveLength(f"consumed length must be > 0, got {consumed_length}")
    mu = profile.preferred_length
    return replace(profile, preferred_length=mu + learning_rate * (consumed_length - mu))


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    mu_a: float
    mu_b: float

    @property
    def gap(self) -> float:
        return abs(self.mu_a - self.mu_b)


def convergence_sim(profile_a, profile_b, shared_pool_lengths, learning_rate, steps):
    """Both types consume every pool item, in order, once per step.

    Returns the trajectory including step 0. Each consumption multiplies the
    gap between the two preferred lengths by ``1 - learning_rate``.
    """
    if not 0.0 <= learning_rate <= 1.0:
        raise InvalidLearningRate(f"learning_rate must be in [0, 1], got {learning_rate}")
    pool = list(shared_pool_lengths)
    a, b = profile_a, profile_b
    out = [TrajectoryPoint(0, a.preferred_length, b.preferred_length)]
    for step in range(1, steps + 1):
        for length in pool:
            a = exposure_update(a, length, learning_rate)
            b = exposure_update(b, length, learning_rate)
        out.append(TrajectoryPoint(step, a.preferred_length, b.preferred_length))
    return out


def trajectory_to_csv(trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "mu_a", "mu_b", "gap"])
    for pt in trajectory:
        w.writerow([pt.step, repr(pt.mu_a), repr(pt.mu_b), repr(pt.gap)])
    return buf.getvalue()
