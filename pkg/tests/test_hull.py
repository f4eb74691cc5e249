import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusrot.errors import ArgumentError, EmptyIntersectionError
from torusrot.hull import (
    TAU_SUP,
    BoundaryClass,
    ConvexPolygon,
    classify_boundary_point,
    contains_with_margin,
    convex_hull,
    default_m_hat,
    estimate_rotation_set,
    halfplane_polygon,
    hausdorff,
    point_distance,
    scale_translate,
    signed_distance,
    support_function_estimate,
    supporting_line,
)
from torusrot.maps import Translation, TwoShear, make_lift
from torusrot.orbit import GridSpec

SQUARE = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
TRIANGLE = ConvexPolygon([(0, 0), (1, 0), (0, 1)])


def brute_inside(poly, p, tol):
    """Oracle: p is left of (or on) every directed edge, checked with raw cross products."""
    v = poly.as_array()
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -tol * np.hypot(*(b - a)):
            return False
    return True


def is_strictly_convex_ccw(poly):
    v = poly.as_array()
    n = len(v)
    for i in range(n):
        a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if cross <= 0:
            return False
    return True


def test_examples():
    assert convex_hull([(0, 0)]).vertices == ((0.0, 0.0),)
    tri = convex_hull([(0, 0), (1, 0), (0, 1), (0.25, 0.25)])
    assert tri.vertices == ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    with pytest.raises(ArgumentError):
        convex_hull([])
    with pytest.raises(ArgumentError):
        convex_hull([(0, math.nan)])


def test_collinear_and_duplicate_points():
    seg = convex_hull([(0, 0), (1, 1), (2, 2), (0.5, 0.5), (2, 2)])
    assert seg.vertices == ((0.0, 0.0), (2.0, 2.0))
    sq = convex_hull([(0, 0), (0.5, 0), (1, 0), (1, 0.5), (1, 1), (0, 1), (0, 0.5)])
    assert sq.vertices == SQUARE.vertices
    assert convex_hull([(0.3, 0.3)] * 5).vertices == ((0.3, 0.3),)


def test_sliver_keeps_far_endpoints():
    # lexicographic order (0,0), (0,2), (tiny,1) disagrees with the order along the line
    tiny = 2.225073858507e-311
    assert convex_hull([(0, 0), (0, 2), (tiny, 1)]).vertices == ((0.0, 0.0), (0.0, 2.0))
    assert convex_hull([(0, 0), (1e-14, 1), (0, 2), (-1e-14, 3)]).vertices == ((-1e-14, 3.0), (0.0, 0.0))


def test_random_disk_cloud_contained_and_idempotent():
    rng = np.random.default_rng(42)
    r = np.sqrt(rng.random(10**4))
    t = rng.random(10**4) * 2 * np.pi
    pts = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    hull = convex_hull(pts)
    assert is_strictly_convex_ccw(hull)
    assert all(brute_inside(hull, p, TAU_SUP) for p in pts)
    assert convex_hull(hull.vertices) == hull
    # every vertex is an input point
    s = {tuple(p) for p in pts.tolist()}
    assert all(v in s for v in hull.vertices)


coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
point_lists = st.lists(st.tuples(coords, coords), min_size=1, max_size=60)


@settings(max_examples=200, deadline=None)
@given(point_lists)
def test_hull_properties(points):
    hull = convex_hull(points)
    for p in points:
        assert signed_distance(hull, p) >= -TAU_SUP * (1 + hull.diameter)
    assert convex_hull(hull.vertices) == hull
    if len(hull) >= 3:
        assert hull.area > 0
        assert hull.vertices[0] == min(hull.vertices)


def test_areas_and_support():
    assert SQUARE.area == 1.0 and TRIANGLE.area == 0.5
    assert SQUARE.support((0, 1)) == 1.0
    assert SQUARE.diameter == pytest.approx(math.sqrt(2))


def test_signed_and_point_distance():
    assert signed_distance(SQUARE, (0.5, 0.5)) == 0.5
    assert signed_distance(SQUARE, (2.0, 0.5)) == -1.0
    assert signed_distance(SQUARE, (2.0, 2.0)) == pytest.approx(-math.sqrt(2))
    assert point_distance(SQUARE, (0.5, 0.5)) == 0.0
    seg = ConvexPolygon([(0, 0), (1, 0)])
    assert signed_distance(seg, (0.5, 0.0)) == 0.0
    assert signed_distance(seg, (0.5, 2.0)) == -2.0


def sample_boundary(poly, k=400):
    if len(poly) == 1:
        return poly.as_array()
    out = []
    for a, b in poly.edges():
        s = np.linspace(0, 1, k)[:, None]
        out.append(np.array(a) * (1 - s) + np.array(b) * s)
    return np.vstack(out)


def _inside_mask(poly, pts):
    v = poly.as_array()
    ok = np.ones(len(pts), dtype=bool)
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        ok &= (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0]) >= 0
    return ok


def _one_sided(A, B):
    # distance to a convex set is convex, so its max over A sits on A's boundary
    pa = sample_boundary(A, 500)
    d = np.full(len(pa), np.inf)
    vb = B.as_array()
    for a, b in zip(vb, np.roll(vb, -1, axis=0)):
        ab = b - a
        t = np.clip(((pa - a) @ ab) / (ab @ ab), 0.0, 1.0)
        d = np.minimum(d, np.hypot(*(pa - (a + t[:, None] * ab)).T))
    d[_inside_mask(B, pa)] = 0.0
    return d.max()


def test_hausdorff_against_dense_sampling():
    rng = np.random.default_rng(1)
    for _ in range(10):
        A = convex_hull(rng.normal(size=(12, 2)))
        B = convex_hull(rng.normal(size=(9, 2)) + 0.3)
        oracle = max(_one_sided(A, B), _one_sided(B, A))
        assert hausdorff(A, B) == pytest.approx(oracle, abs=5e-3)
    assert hausdorff(SQUARE, SQUARE) == 0.0


def test_supporting_line_examples():
    top = supporting_line(SQUARE, math.pi / 2)
    assert top.omega[1] == 1.0 and top.v_perp == pytest.approx((0, 1), abs=1e-16)
    assert top.omega == (0.0, 1.0)  # tie on the top edge goes to the smaller x
    pt = ConvexPolygon([(0.3, 0.7)])
    assert supporting_line(pt, 1.234).omega == (0.3, 0.7)
    diag = supporting_line(TRIANGLE, math.pi / 4)
    assert diag.omega == (0.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(coords, coords), min_size=3, max_size=40))
def test_supporting_line_property(points):
    hull = convex_hull(points)
    V = hull.as_array()
    for theta in np.linspace(0, 2 * np.pi, 360, endpoint=False):
        line = supporting_line(hull, theta)
        assert abs(line.v[0] * line.v_perp[0] + line.v[1] * line.v_perp[1]) <= 1e-12
        w = (V - np.array(line.omega)) @ np.array(line.v_perp)
        assert w.max() <= TAU_SUP


def test_boundary_classification():
    assert classify_boundary_point(SQUARE, (0, 0)) is BoundaryClass.VERTEX
    assert classify_boundary_point(SQUARE, (0.5, 0)) is BoundaryClass.EDGE_INTERIOR
    assert classify_boundary_point(SQUARE, (0.5, 0.5)) is BoundaryClass.NOT_BOUNDARY
    with pytest.raises(ArgumentError):
        classify_boundary_point(ConvexPolygon([(0, 0), (1, 0)]), (0.5, 0))


def test_contains_with_margin():
    assert contains_with_margin(SQUARE, (0.5, 0.5), 0.4)
    assert not contains_with_margin(SQUARE, (0.5, 0.5), 0.6)
    assert contains_with_margin(TRIANGLE, (0, 0), 0.0)
    assert not contains_with_margin(TRIANGLE, (-0.01, 0), 0.0)
    pt = ConvexPolygon([(0, 0)])
    assert not contains_with_margin(pt, (0, 0), 0.1)
    assert contains_with_margin(pt, (0, 0), 0.0)
    with pytest.raises(ArgumentError):
        contains_with_margin(SQUARE, (0, 0), -1)


def test_scale_translate_examples():
    assert scale_translate(SQUARE, 1, (0, 0)) == SQUARE
    assert scale_translate(ConvexPolygon([(1 / 3, 2 / 3)]), 30, (10, 20)).vertices == ((0.0, 0.0),)
    big = scale_translate(SQUARE, 2, (1, 1))
    assert big.vertices == ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0))
    with pytest.raises(ArgumentError):
        scale_translate(SQUARE, 0, (0, 0))


@settings(max_examples=300, deadline=None)
@given(
    x=st.floats(-3, 3, allow_nan=False),
    y=st.floats(-3, 3, allow_nan=False),
    q=st.integers(1, 1000),
)
def test_scale_translate_roundtrip_nearest_lattice(x, y, q):
    """Re-centring at the nearest lattice vector inverts within one ulp."""
    t = (round(q * x), round(q * y))
    poly = ConvexPolygon([(x, y)])
    img = scale_translate(poly, q, t)
    back = scale_translate(img, 1, (-t[0], -t[1])).vertices[0]
    for orig, b in zip((x, y), back):
        assert abs(b / q - orig) <= math.ulp(orig)


@settings(max_examples=300, deadline=None)
@given(
    x=st.floats(-3, 3, allow_nan=False),
    q=st.integers(1, 1000),
    t=st.integers(-3000, 3000),
)
def test_scale_translate_roundtrip_general(x, q, t):
    # with an arbitrary shift the image carries the absolute precision of max(|q x|, |t|)
    img = scale_translate(ConvexPolygon([(x, 0.0)]), q, (t, 0))
    back = scale_translate(img, 1, (-t, 0)).vertices[0][0] / q
    scale = max(math.ulp(x), math.ulp(max(abs(q * x), abs(t))) / q)
    assert abs(back - x) <= 2 * scale


def test_halfplane_polygon():
    normals = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    poly = halfplane_polygon(normals, [1, 1, 0, 0], (-5, -5, 5, 5))
    assert poly.vertices == SQUARE.vertices
    with pytest.raises(EmptyIntersectionError):
        halfplane_polygon([(1, 0), (-1, 0)], [0, -1], (-5, -5, 5, 5))
    clipped = halfplane_polygon([(1, 1)], [0], (-1, -1, 1, 1))
    assert clipped.area == pytest.approx(2.0)


@pytest.mark.parametrize("res, sched", [(1, [1, 2]), (5, [1, 2, 4]), (16, [3, 10, 40, 100])])
def test_rotation_set_of_translation_is_a_point(res, sched):
    est = estimate_rotation_set(make_lift(Translation(0.25, 0.75)), GridSpec(res), sched, threads=1)
    assert len(est.hull) == 1
    v = est.hull.vertices[0]
    assert abs(v[0] - 0.25) <= 1e-12 and abs(v[1] - 0.75) <= 1e-12
    assert all(d <= 1e-12 for d in est.hausdorff_diag)


def test_rotation_set_of_shear_translation_is_a_point():
    est = estimate_rotation_set(make_lift(TwoShear(0, 0, 0.25, 0.75)), GridSpec(8), [1, 2, 4], threads=1)
    assert est.hull.vertices == ((0.25, 0.75),)


def test_estimate_structure():
    lift = make_lift(TwoShear(1.2, 1.2))
    est = estimate_rotation_set(lift, GridSpec(24), [50, 100, 200], threads=1)
    assert len(est.hausdorff_diag) == 2 and min(est.hausdorff_diag) >= 0
    assert est.hull == convex_hull(est.cloud)
    # tails are nested: each later tail hull lies inside the earlier one
    for outer, inner in zip(est.tail_hulls, est.tail_hulls[1:]):
        assert all(signed_distance(outer, v) >= -1e-12 for v in inner.vertices)
    with pytest.raises(ArgumentError):
        estimate_rotation_set(lift, GridSpec(4), [10])
    with pytest.raises(ArgumentError):
        estimate_rotation_set(lift, GridSpec(4), [10, 10])


def test_support_function_estimate():
    T = make_lift(Translation(0.25, 0.75))
    u = (0.6, 0.8)
    for n in (1, 10, 100):
        lo, hi = support_function_estimate(T, u, GridSpec(4), n, threads=1)
        assert hi == pytest.approx(0.25 * 0.6 + 0.75 * 0.8, abs=1e-15)
        assert lo <= hi
    S = make_lift(TwoShear(1.2, 1.2))
    one = GridSpec(1)
    lo, hi = support_function_estimate(S, (0.0, 1.0), one, 20, threads=1)
    from torusrot.orbit import displacement

    assert hi == displacement(S, one.points()[0], 20).delta[1] / 20
    with pytest.raises(ArgumentError):
        support_function_estimate(S, (1.0, 1.0), one, 5)


def test_support_envelope_shrinks_with_n():
    S = make_lift(TwoShear(1.2, 1.2))
    g = GridSpec(64)
    m_hat = default_m_hat(S, g)
    lo1, hi1 = support_function_estimate(S, (0.0, 1.0), g, 1000, m_hat, threads=1)
    lo4, hi4 = support_function_estimate(S, (0.0, 1.0), g, 4000, m_hat, threads=1)
    assert hi4 <= hi1 + m_hat / 1000  # longer averages cannot exceed the short-run envelope
    assert hi4 < hi1
    assert hi4 - lo4 < hi1 - lo1


@pytest.mark.xfail(strict=True, reason="default m_hat = 2 sup|phi| is smaller than the true deviation constant")
def test_support_brackets_overlap_with_default_m_hat():
    S = make_lift(TwoShear(1.2, 1.2))
    g = GridSpec(64)
    m_hat = default_m_hat(S, g)
    lo1, _ = support_function_estimate(S, (0.0, 1.0), g, 1000, m_hat, threads=1)
    _, hi4 = support_function_estimate(S, (0.0, 1.0), g, 4000, m_hat, threads=1)
    assert lo1 <= hi4
