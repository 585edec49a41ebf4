import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_landscape
from pollinate.errors import InstanceTooLarge, InvalidStep, UnknownPlatform
from pollinate.expectation import (
    compare_evaluators,
    enumerate_trips,
    expected_time_collapsed,
    expected_time_recursive,
    finite_difference_sensitivity,
    marginal_sensitivity,
)
from pollinate.landscape import (
    ContinuationSchedule,
    Landscape,
    OsmPlatform,
    Personality,
    PoolConfig,
    landing_distribution,
    scenario_s1,
)


class TestRecursive:
    def test_direct_only_s1(self, s1):
        assert expected_time_recursive(s1, "P", "A").value_seconds == 125.0

    def test_cutoff_zero_matches_no_extension(self, s1_half):
        assert expected_time_recursive(s1_half, "P", "A", 0).value_seconds == 125.0

    def test_matches_enumeration_s1(self, s1_half):
        rec = expected_time_recursive(s1_half, "P", "A", 3).value_seconds
        enum, _ = enumerate_trips(s1_half, ("P", "A"), 3)
        assert rec == pytest.approx(enum.value_seconds, rel=1e-12)

    def test_s1_half_by_hand_one_extension(self, s1_half):
        # E1 = 125 + a1 * sum_n p_n * p_hop * E2(Q, n), E2 = direct expectation of Q from n
        e2 = {"B": 0.5 * 50 + 0.5 * 200, "C": 0.25 * 50 + 0.75 * 100}
        want = 125 + 0.5 * (0.75 * 0.5 * e2["B"] + 0.25 * 0.5 * e2["C"])
        assert expected_time_recursive(s1_half, "P", "A", 1).value_seconds == pytest.approx(want, rel=1e-14)

    def test_truncation_bound_shrinks(self, s1_half):
        bounds = [expected_time_recursive(s1_half, "P", "A", c).truncation_bound for c in range(8)]
        assert all(b1 > b2 for b1, b2 in zip(bounds, bounds[1:]))

    def test_pool_factor_enters(self):
        ls = scenario_s1(0.0, pool=PoolConfig(True, 1.0, 2.0))
        assert expected_time_recursive(ls, "P", "A").value_seconds == 250.0


class TestEnumeration:
    def test_cutoff_zero_paths_are_landings(self, s1_half):
        res, paths = enumerate_trips(s1_half, ("P", "A"), 0)
        landing = landing_distribution(s1_half, "P", "A")
        assert {p.steps[0][1]: p.probability for p in paths} == landing
        assert len(paths) == len(landing)

    def test_too_large(self, s1_half):
        with pytest.raises(InstanceTooLarge):
            enumerate_trips(s1_half, ("P", "A"), 30)

    def test_with_pools(self):
        ls = scenario_s1(0.5, pool=PoolConfig(True, 0.3, 2.0))
        enum, paths = enumerate_trips(ls, ("P", "A"), 3)
        assert math.fsum(p.probability for p in paths) == pytest.approx(1.0, abs=1e-12)
        rec = expected_time_recursive(ls, "P", "A", 3).value_seconds
        assert rec == pytest.approx(enum.value_seconds, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 3))
    def test_mass_and_equivalence(self, seed, cutoff):
        ls, start = random_landscape(seed, max_platforms=3, max_people=3)
        enum, paths = enumerate_trips(ls, start, cutoff)
        assert math.fsum(p.probability for p in paths) == pytest.approx(1.0, abs=1e-12)
        rec = expected_time_recursive(ls, *start, cutoff).value_seconds
        assert rec == pytest.approx(enum.value_seconds, rel=1e-12)


class TestCollapsed:
    def test_direct_only_s1(self, s1):
        assert expected_time_collapsed(s1, "P", "A").value_seconds == 62.5

    def test_zero_hop_weights(self):
        plats = (OsmPlatform("A", dwell_time=5), OsmPlatform("B", dwell_time=7))
        ls = Landscape(plats, (Personality("P", {"A", "B"}, {"A": 0, "B": 0}),), 1.0,
                       ContinuationSchedule.geometric(0.5))
        assert expected_time_collapsed(ls, "P", "A").value_seconds == 0.0

    def test_geometric_half_series(self, s1_half):
        # a/(1-a) = 1, so the second term is sum_n sum_m p_mn^2 T_n = 0.25*100 + 0.25*200
        res = expected_time_collapsed(s1_half, "P", "A")
        assert res.value_seconds == 62.5 + 75.0

    def test_truncated_sum_converges(self, s1_half):
        full = expected_time_collapsed(s1_half, "P", "A").value_seconds
        part = expected_time_collapsed(s1_half, "P", "A", stage_cutoff=3)
        assert part.value_seconds == pytest.approx(62.5 + 75.0 * (0.5 + 0.25 + 0.125))
        assert part.value_seconds + part.truncation_bound == pytest.approx(full)

    def test_landing_override(self, s1):
        res = expected_time_collapsed(s1, "P", "A", landing={"B": 0.5, "C": 0.5})
        assert res.value_seconds == 0.5 * 0.5 * 100 + 0.5 * 0.5 * 200

    def test_compare(self, s1):
        out = compare_evaluators(s1, "P", "A")
        assert (out["recursive"], out["collapsed"], out["divergence"]) == (125.0, 62.5, 62.5)
        json.dumps(out)


class TestSensitivity:
    def test_s1_b(self, s1):
        res = marginal_sensitivity(s1, "B", "P", "A")
        assert res.derivative == 0.375 and res.diagnostics == ()

    def test_zero_hops(self):
        plats = (OsmPlatform("A"), OsmPlatform("B"))
        ls = Landscape(plats, (Personality("P", {"A", "B"}, {}),))
        res = marginal_sensitivity(ls, "B", "P", "A")
        assert res.derivative == 0.0
        assert "PositivityPreconditionFailed" in res.diagnostics

    def test_unknown_platform(self, s1):
        with pytest.raises(UnknownPlatform):
            marginal_sensitivity(s1, "Z", "P", "A")

    def test_recursive_fd_differs_from_closed_form(self, s1):
        fd = finite_difference_sensitivity(s1, "B", 0.5, "recursive", "P", "A")
        assert fd.derivative == pytest.approx(0.75, rel=1e-12)

    @pytest.mark.parametrize("h", [1e-6, 1e-3, 0.1, 1.0])
    def test_collapsed_fd_step_independent(self, s1_half, h):
        fd = finite_difference_sensitivity(s1_half, "C", h, "collapsed", "P", "A")
        an = marginal_sensitivity(s1_half, "C", "P", "A")
        assert fd.derivative == pytest.approx(an.derivative, rel=1e-9)

    def test_invalid_step(self, s1):
        with pytest.raises(InvalidStep):
            finite_difference_sensitivity(s1, "B", 0.0, "collapsed", "P", "A")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_linear_in_dwell_times(seed, c):
    ls, start = random_landscape(seed)
    scaled = ls.scale_dwell(c)
    for f in (lambda x: expected_time_recursive(x, *start, 10),
              lambda x: expected_time_collapsed(x, *start)):
        assert f(scaled).value_seconds == pytest.approx(c * f(ls).value_seconds, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_truncation(seed):
    ls, start = random_landscape(seed)
    prev = None
    for cut in range(8):
        res = expected_time_recursive(ls, *start, cut)
        if prev is not None:
            assert res.value_seconds >= prev.value_seconds - 1e-9
            assert res.value_seconds - prev.value_seconds <= prev.truncation_bound * (1 + 1e-12) + 1e-12
        prev = res


def test_float_fd_with_unit_step(s1_half):
    fd = finite_difference_sensitivity(s1_half, "C", 1.0, "collapsed", "P", "A", exact=False)
    an = marginal_sensitivity(s1_half, "C", "P", "A")
    assert fd.derivative == pytest.approx(an.derivative, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_positivity(seed):
    ls, (person, origin) = random_landscape(seed)
    landing = landing_distribution(ls, person, origin)
    from pollinate.landscape import hop_distribution
    for p in ls.platforms:
        hops, _ = hop_distribution(ls, p.id, person)
        res = marginal_sensitivity(ls, p.id, person, origin)
        if landing.get(p.id, 0) > 0 and max(hops.values(), default=0) > 0:
            assert res.derivative > 0 and not res.diagnostics
        else:
            assert res.diagnostics == ("PositivityPreconditionFailed",)
