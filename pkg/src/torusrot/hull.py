"""Convex geometry for rotation-set estimates.

Polygons are counter-clockwise vertex tuples starting at the
lexicographically smallest vertex. One vertex is a point polygon, two a
segment. Tolerances are fixed module constants and every predicate uses
them explicitly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, EmptyIntersectionError
from .orbit import GridSpec, orbit_deltas

TAU_COL = 1e-12  # normalized cross product below which three points count as collinear
TAU_DUP = 1e-12  # distance below which two vertices are the same
TAU_SUP = 1e-9  # slack for support/containment predicates


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices)
        )
        if not self.vertices:
            raise ArgumentError("a polygon needs at least one vertex")

    def __len__(self):
        return len(self.vertices)

    @property
    def is_degenerate(self):
        return len(self.vertices) < 3

    def as_array(self):
        return np.array(self.vertices, dtype=float).reshape(-1, 2)

    @property
    def area(self):
        if len(self.vertices) < 3:
            return 0.0
        v = self.as_array()
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    @property
    def diameter(self):
        v = self.as_array()
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def support(self, u):
        """Support function ``max <p, u>`` over the vertices."""
        v = self.as_array()
        return float(np.max(v @ np.asarray(u, dtype=float)))

    def edges(self):
        n = len(self.vertices)
        if n < 2:
            return []
        if n == 2:
            return [(self.vertices[0], self.vertices[1])]
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _passes_straight(o, a, b):
    """True if ``o -> a -> b`` turns by less than ``TAU_COL`` (radians, about)."""
    ux, uy = a[0] - o[0], a[1] - o[1]
    vx, vy = b[0] - a[0], b[1] - a[1]
    scale = math.hypot(ux, uy) * math.hypot(vx, vy)
    if scale == 0:
        return True
    # the sine alone cannot tell straight on from a reversal at a thin spike
    return ux * vx + uy * vy > 0 and _cross(o, a, b) <= TAU_COL * scale


def convex_hull(points) -> ConvexPolygon:
    """Minimal counter-clockwise hull by Andrew's monotone chain.

    The chain uses the plain orientation sign; near-duplicates and vertices
    whose turn is within ``TAU_COL`` are removed afterwards. Such a vertex
    lies between its neighbours, so no extreme point is lost (tolerant
    popping inside the chain can drop one when the sort order disagrees
    with the order along a nearly vertical line).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ArgumentError("convex_hull needs at least one point")
    if not np.all(np.isfinite(pts)):
        raise ArgumentError("points must be finite")
    pts = np.unique(pts, axis=0)  # sorted lexicographically
    if len(pts) == 1 or np.ptp(pts, axis=0).max() <= TAU_DUP:
        return ConvexPolygon([tuple(pts[0])])
    P = [tuple(p) for p in pts.tolist()]

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    hull = chain(P)[:-1] + chain(reversed(P))[:-1]
    verts = []
    for p in hull:
        if not verts or math.hypot(p[0] - verts[-1][0], p[1] - verts[-1][1]) > TAU_DUP:
            verts.append(p)
    while len(verts) > 1 and math.hypot(verts[0][0] - verts[-1][0], verts[0][1] - verts[-1][1]) <= TAU_DUP:
        verts.pop()
    removed = True
    while removed and len(verts) >= 3:
        removed = False
        n = len(verts)
        for i in range(n):
            if _passes_straight(verts[i - 1], verts[i], verts[(i + 1) % n]):
                del verts[i]
                removed = True
                break
    if len(verts) == 2 and verts[1] < verts[0]:
        verts.reverse()
    k = verts.index(min(verts))
    return ConvexPolygon(verts[k:] + verts[:k])


# --------------------------------------------------------------------------
# distances


def _segment_distance(p, a, b):
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def edge_distances(poly: ConvexPolygon, p):
    """Signed distances from ``p`` to each edge line, positive on the inner side."""
    out = []
    for a, b in poly.edges():
        L = math.hypot(b[0] - a[0], b[1] - a[1])
        out.append(_cross(a, b, p) / L)
    return out


def signed_distance(poly: ConvexPolygon, p) -> float:
    """Distance to the boundary, positive inside and negative outside.

    Degenerate polygons have empty interior, so the result is minus the
    distance to the point or segment (zero on it).
    """
    p = (float(p[0]), float(p[1]))
    if len(poly) == 1:
        v = poly.vertices[0]
        return -math.hypot(p[0] - v[0], p[1] - v[1])
    if len(poly) == 2:
        return -_segment_distance(p, *poly.vertices)
    inside = min(edge_distances(poly, p))
    if inside >= 0.0:
        return inside
    return -min(_segment_distance(p, a, b) for a, b in poly.edges())


def point_distance(poly: ConvexPolygon, p) -> float:
    """Euclidean distance from ``p`` to the closed polygon."""
    return max(0.0, -signed_distance(poly, p))


def hausdorff(A: ConvexPolygon, B: ConvexPolygon) -> float:
    """Hausdorff distance of two convex polygons.

    Distance to a convex set is convex, so each one-sided distance is
    attained at a vertex.
    """
    ab = max(point_distance(B, a) for a in A.vertices)
    ba = max(point_distance(A, b) for b in B.vertices)
    return max(ab, ba)


# --------------------------------------------------------------------------
# supporting lines and boundary structure


@dataclass(frozen=True)
class SupportLine:
    omega: tuple
    v: tuple
    v_perp: tuple


def supporting_line(poly: ConvexPolygon, theta: float) -> SupportLine:
    """Supporting line with outward normal ``(cos theta, sin theta)``.

    ``omega`` is a vertex of maximal support value; values within TAU_SUP of
    the maximum tie, and ties go to the lexicographically smallest vertex.
    """
    n = (math.cos(theta), math.sin(theta))
    values = [x * n[0] + y * n[1] for x, y in poly.vertices]
    top = max(values)
    omega = min(v for v, h in zip(poly.vertices, values) if h >= top - TAU_SUP)
    return SupportLine(omega, (n[1], -n[0]), n)


class BoundaryClass(enum.Enum):
    VERTEX = "Vertex"
    EDGE_INTERIOR = "EdgeInterior"
    NOT_BOUNDARY = "NotBoundary"


def classify_boundary_point(poly: ConvexPolygon, p) -> BoundaryClass:
    if poly.is_degenerate:
        raise ArgumentError("boundary classification needs a polygon with interior")
    p = (float(p[0]), float(p[1]))
    for v in poly.vertices:
        if math.hypot(p[0] - v[0], p[1] - v[1]) <= TAU_DUP:
            return BoundaryClass.VERTEX
    for a, b in poly.edges():
        if _segment_distance(p, a, b) <= TAU_SUP:
            return BoundaryClass.EDGE_INTERIOR
    return BoundaryClass.NOT_BOUNDARY


def contains_with_margin(poly: ConvexPolygon, p, margin: float = 0.0) -> bool:
    """True iff ``p`` is at least ``margin`` inside every edge (closed at margin 0)."""
    if margin < 0:
        raise ArgumentError("margin must be >= 0")
    if poly.is_degenerate:
        if margin > 0:
            return False
        return point_distance(poly, p) <= TAU_SUP
    return min(edge_distances(poly, p)) >= margin - (TAU_SUP if margin == 0 else 0.0)


def scale_translate(poly: ConvexPolygon, q: int, t) -> ConvexPolygon:
    """Image of ``poly`` under ``v -> q v - t``.

    Plain float arithmetic: ``30 * fl(1/3)`` rounds to exactly 10, so
    rational points whose image is a lattice point land on it exactly.
    """
    if int(q) != q or q < 1:
        raise ArgumentError("q must be an integer >= 1")
    q = float(int(q))
    tx, ty = float(t[0]), float(t[1])
    return ConvexPolygon([(q * x - tx, q * y - ty) for x, y in poly.vertices])


def halfplane_polygon(normals, offsets, box) -> ConvexPolygon:
    """Intersection of ``{p : <p, u_k> <= h_k}`` with the box ``(xmin, ymin, xmax, ymax)``.

    Sutherland-Hodgman clipping of the box by each half-plane.
    """
    xmin, ymin, xmax, ymax = box
    poly = [(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)]
    for u, h in zip(normals, offsets):
        ux, uy = float(u[0]), float(u[1])
        out = []
        for i, a in enumerate(poly):
            b = poly[(i + 1) % len(poly)]
            fa = a[0] * ux + a[1] * uy - h
            fb = b[0] * ux + b[1] * uy - h
            if fa <= 0:
                out.append(a)
            if (fa < 0 < fb) or (fb < 0 < fa):
                s = fa / (fa - fb)
                out.append((a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])))
        poly = out
        if not poly:
            raise EmptyIntersectionError("half-plane intersection is empty")
    return convex_hull(poly)


# --------------------------------------------------------------------------
# rotation-set estimation


@dataclass(frozen=True)
class RotationSetEstimate:
    hull: ConvexPolygon
    n_schedule: tuple
    hausdorff_diag: tuple
    grid: GridSpec
    tail_hulls: tuple = field(default=(), repr=False)
    cloud: np.ndarray = field(default=None, repr=False, compare=False)


def _check_schedule(n_schedule, min_len=2):
    sched = [int(n) for n in n_schedule]
    if len(sched) < min_len:
        raise ArgumentError(f"n_schedule needs at least {min_len} entries")
    if any(n < 1 for n in sched) or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ArgumentError("n_schedule must be strictly increasing positive integers")
    return tuple(sched)


def estimate_rotation_set(lift, grid: GridSpec, n_schedule, threads=None) -> RotationSetEstimate:
    """Tail-hull estimate of the rotation set.

    For every schedule entry ``n_i`` the tail cloud collects the averages
    ``(F^n(x) - x) / n`` over the grid for all scheduled ``n >= n_i``. The
    estimate is the hull of the last tail; the diagnostics are Hausdorff
    distances between successive tail hulls.
    """
    sched = _check_schedule(n_schedule)
    deltas = orbit_deltas(lift, grid.points(), sched, threads=threads)
    averages = deltas / np.asarray(sched, dtype=float)[:, None, None]
    tails = [None] * len(sched)
    tails[-1] = convex_hull(averages[-1])
    for i in range(len(sched) - 2, -1, -1):
        own = convex_hull(averages[i])
        tails[i] = convex_hull(list(own.vertices) + list(tails[i + 1].vertices))
    diag = tuple(hausdorff(a, b) for a, b in zip(tails, tails[1:]))
    return RotationSetEstimate(tails[-1], sched, diag, grid, tuple(tails), averages[-1])


def default_m_hat(lift, grid: GridSpec) -> float:
    """Twice the largest displacement norm over the grid."""
    pts = grid.points()
    dx, dy = lift.displacement_field(pts[:, 0], pts[:, 1])
    return 2.0 * float(np.max(np.hypot(dx, dy)))


def support_function_estimate(lift, u, grid: GridSpec, n: int, m_hat=None, threads=None):
    """Bracket ``[hi - m_hat / n, hi]`` for the support value in direction ``u``.

    ``hi`` is the exact grid maximum of ``<(F^n(x) - x) / n, u>``.
    """
    if abs(math.hypot(u[0], u[1]) - 1.0) > 1e-12:
        raise ArgumentError("direction must be a unit vector")
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if m_hat is None:
        m_hat = default_m_hat(lift, grid)
    d = orbit_deltas(lift, grid.points(), [n], threads=threads)[0]
    hi = float(np.max((d[:, 0] * u[0] + d[:, 1] * u[1]) / n))
    return (hi - m_hat / n, hi)
