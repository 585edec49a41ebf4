import numpy as np

from pollinate.landscape import (
    ContinuationSchedule,
    Landscape,
    OsmPlatform,
    Personality,
    PoolConfig,
    landing_distribution,
)


def random_landscape(seed, max_platforms=4, max_people=3, pools=True, min_dwell=5.0):
    """A random valid landscape plus a valid start pair ``(personality, platform)``."""
    g = np.random.default_rng(seed)
    n = int(g.integers(2, max_platforms + 1))
    m = int(g.integers(1, max_people + 1))
    ids = [f"N{i}" for i in range(n)]
    platforms = tuple(
        OsmPlatform(pid, pid, traffic_weight=float(g.uniform(0.1, 5.0)),
                    dwell_time=float(g.uniform(min_dwell, 500.0)))
        for pid in ids
    )
    people = []
    for j in range(m):
        if j == 0:
            presence = set(ids)  # the start personality can always leave its origin
        else:
            k = int(g.integers(1, n + 1))
            presence = set(g.choice(ids, size=k, replace=False).tolist())
        weights = {p: float(g.choice([0.0, g.uniform(0.0, 3.0)], p=[0.2, 0.8])) for p in presence}
        pool = None
        if pools and g.random() < 0.4:
            pool = PoolConfig(True, float(g.uniform(0, 1)), float(g.uniform(1, 3)))
        people.append(Personality(f"M{j}", frozenset(presence), weights, pool=pool))
    if g.random() < 0.7:
        schedule = ContinuationSchedule.geometric(float(g.uniform(0.0, 0.9)))
    else:
        length = int(g.integers(1, 5))
        vals = np.sort(g.uniform(0.0, 0.95, size=length))[::-1]
        schedule = ContinuationSchedule.explicit(vals.tolist())
    ls = Landscape(platforms, tuple(people), float(g.uniform(0.2, 2.0)), schedule)
    start = ("M0", ids[int(g.integers(0, n))])
    landing_distribution(ls, *start)
    return ls, start


# published revenue table cells are rounded; the two columns below are printed to
# this many decimals (currency deltas to 3, the rest to 2, %MT to 4 as a fraction)
PRINTED_DECIMALS = {"ln_time": 2, "pct_mt": 4, "depth": 2, "cwri": 2, "mwri": 2,
                    "d_cwri": 3, "d_mwri": 3}
PUBLISHED_TOLERANCE = {"ln_time": 0.02, "pct_mt": 0.05, "depth": 0.05, "cwri": 0.05,
                    "mwri": 0.05, "d_cwri": 0.05, "d_mwri": 0.05}


def cell_matches(column, computed, published):
    """Relative tolerance, except cells printed with a single significant digit
    or less (e.g. 0.000, 0.001), which can only be compared at printed precision."""
    decimals = PRINTED_DECIMALS[column]
    unit = 10.0 ** -decimals
    if abs(published) < 10 * unit:
        return abs(computed - published) <= 0.5 * unit + 1e-12
    return abs(computed - published) <= PUBLISHED_TOLERANCE[column] * abs(published)


def published_mismatches(table, published):
    bad = []
    for row, ref in zip(table, published):
        assert row.platform == ref["platform"]
        for col in PRINTED_DECIMALS:
            got = getattr(row, col)
            if not cell_matches(col, got, ref[col]):
                bad.append((row.platform, col, got, ref[col]))
    return bad
