import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusrot.deviation import (
    equally_spaced_directions,
    norm_bound_from_pair,
    probe_support_bound,
    probe_support_deviations,
    refine_hull_by_deviation,
    tail_slope,
)
from torusrot.errors import ArgumentError
from torusrot.hull import ConvexPolygon, estimate_rotation_set, signed_distance
from torusrot.maps import Translation, TwoShear, make_lift
from torusrot.orbit import GridSpec, orbit_deltas

SHEAR = make_lift(TwoShear(1.2, 1.2))


@pytest.fixture(scope="module")
def shear_estimate():
    return estimate_rotation_set(SHEAR, GridSpec(32), [100, 200, 400])


def test_equally_spaced_directions():
    assert equally_spaced_directions(4) == [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    with pytest.raises(ArgumentError):
        equally_spaced_directions(0)


def test_tail_slope_against_polyfit():
    rng = np.random.default_rng(2)
    ns = np.arange(100, 1100, 100)
    vals = 0.3 * ns + rng.normal(size=ns.size)
    assert tail_slope(ns, vals, 1.0) == pytest.approx(np.polyfit(ns, vals, 1)[0], rel=1e-12)
    assert tail_slope(ns, vals, 0.5) == pytest.approx(np.polyfit(ns[5:], vals[5:], 1)[0], rel=1e-12)
    assert tail_slope(ns, vals, window=(300, 700)) == pytest.approx(np.polyfit(ns[2:7], vals[2:7], 1)[0], rel=1e-12)
    assert tail_slope([1, 2, 3], [5.0, 5.0, 5.0]) == 0.0
    with pytest.raises(ArgumentError):
        tail_slope(ns, vals, window=(150, 190))


def test_translation_deviation_is_zero():
    lift = make_lift(Translation(0.25, 0.75))
    point = ConvexPolygon([(0.25, 0.75)])
    reps = probe_support_deviations(lift, point, equally_spaced_directions(8), GridSpec(4), [8, 16, 32, 64])
    for r in reps:
        assert all(d == 0.0 for _, d in r.samples)
        assert r.tail_slope == 0.0 and r.sup_observed == 0.0


def test_translation_inward_shift_gives_exact_slope():
    lift = make_lift(Translation(0.25, 0.75))
    point = ConvexPolygon([(0.25, 0.75)])
    reps = probe_support_deviations(lift, point, [0.0, math.pi / 2], GridSpec(4), [8, 16, 32], inward_shift=0.125)
    for r in reps:
        assert r.tail_slope == 0.125
        assert [d for _, d in r.samples] == [1.0, 2.0, 4.0]


@settings(max_examples=10, deadline=None)
@given(delta=st.floats(0.0, 0.5), theta=st.floats(0.0, 2 * math.pi))
def test_inward_shift_adds_delta_to_slope(shear_estimate, delta, theta):
    sched = [100, 200, 400]
    kw = dict(grid=GridSpec(32), n_schedule=sched, fit_fraction=1.0, threads=1)
    base = probe_support_deviations(SHEAR, shear_estimate, [theta], **kw)[0]
    moved = probe_support_deviations(SHEAR, shear_estimate, [theta], inward_shift=delta, **kw)[0]
    assert moved.tail_slope - base.tail_slope == pytest.approx(delta, abs=1e-9)


def test_deviation_matches_direct_computation(shear_estimate):
    sched = [100, 200, 400]
    theta = 0.7
    rep = probe_support_deviations(SHEAR, shear_estimate, [theta], GridSpec(32), sched)[0]
    d = orbit_deltas(SHEAR, GridSpec(32).points(), sched)
    ux, uy = rep.v_perp
    assert (ux, uy) == pytest.approx((math.cos(theta), math.sin(theta)))
    for k, (n, dn) in enumerate(rep.samples):
        direct = np.max(d[k] @ np.array([ux, uy]) - n * (rep.omega[0] * ux + rep.omega[1] * uy))
        assert dn == pytest.approx(direct, abs=1e-9)
    # the estimate hull is built at n=400 so the last sample sits at (almost) 0
    assert abs(rep.samples[-1][1]) < 1e-9


def test_probe_argument_checks(shear_estimate):
    with pytest.raises(ArgumentError):
        probe_support_deviations(SHEAR, shear_estimate, [], GridSpec(4), [1, 2])
    with pytest.raises(ArgumentError):
        probe_support_deviations(SHEAR, shear_estimate, [0.0], GridSpec(4), [2, 1])
    with pytest.raises(ArgumentError):
        probe_support_deviations(SHEAR, shear_estimate, [0.0], GridSpec(4), [1, 2], fit_fraction=0.0)


def test_refined_hull_contains_reference_cloud(shear_estimate):
    thetas = equally_spaced_directions(16)
    refined = refine_hull_by_deviation(SHEAR, shear_estimate, thetas, GridSpec(32), 800)
    avg = orbit_deltas(SHEAR, GridSpec(32).points(), [800])[0] / 800
    for p in avg:
        assert signed_distance(refined, p) >= -1e-12
    assert len(refined) <= 16
    with pytest.raises(ArgumentError):
        refine_hull_by_deviation(SHEAR, shear_estimate, thetas, GridSpec(32), 100)


def test_support_bound_zero_for_translation_and_fixed_point():
    T = make_lift(Translation(0.25, 0.75))
    r = probe_support_bound(T, (0.125, 0.5), (0.25, 0.75), (1.0, 0.0), 500)
    assert r.max_abs_deviation == 0.0 and r.two_sided
    r = probe_support_bound(SHEAR, (0.5, 0.5), (0.0, 0.0), (0.6, 0.8), 500, two_sided=False)
    assert r.max_abs_deviation == 0.0


def test_support_bound_stays_small_in_an_island():
    lift = make_lift(TwoShear(0.1, 0.1))
    s = 1 / math.sqrt(2)
    two = probe_support_bound(lift, (0.52, 0.01), (0.0, 0.0), (s, s), 5000)
    one = probe_support_bound(lift, (0.52, 0.01), (0.0, 0.0), (s, s), 5000, two_sided=False)
    assert two.max_abs_deviation < 0.1
    assert one.max_abs_deviation <= two.max_abs_deviation


def test_support_bound_warns_on_mismatched_measure():
    T = make_lift(Translation(0.25, 0.75))
    with pytest.warns(UserWarning, match="support of the measure"):
        probe_support_bound(T, (0.1, 0.1), (0.0, 0.0), (1.0, 0.0), 100)
    with pytest.raises(ArgumentError):
        probe_support_bound(T, (0.1, 0.1), (0.25, 0.75), (1.0, 1.0), 100)


@settings(max_examples=25, deadline=None)
@given(
    t1=st.floats(0.0, math.pi),
    gap=st.floats(0.1, math.pi - 0.1),
)
def test_norm_bound_dominates_observed(t1, gap):
    lift = make_lift(TwoShear(0.1, 0.1))
    v1 = (math.cos(t1), math.sin(t1))
    v2 = (math.cos(t1 + gap), math.sin(t1 + gap))
    bound, observed = norm_bound_from_pair(lift, (0.52, 0.01), (0.0, 0.0), v1, v2, 300)
    assert observed <= bound * (1 + 1e-12)
    with pytest.raises(ArgumentError):
        norm_bound_from_pair(lift, (0.52, 0.01), (0.0, 0.0), v1, v1, 10)


def test_report_json_shape(shear_estimate):
    rep = probe_support_deviations(SHEAR, shear_estimate, [0.0], GridSpec(8), [10, 20])[0]
    js = rep.to_json()
    assert set(js) == {"theta", "omega", "v_perp", "samples", "sup_observed", "tail_slope"}
    assert js["samples"][0][0] == 10
