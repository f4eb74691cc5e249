"""Periodic orbits with prescribed rotation vector.

A point ``x`` with ``F^q(x) = x + t`` projects to a period-``q`` orbit on
the torus with rotation vector ``t / q``. Roots of ``G(x) = F^q(x) - x - t``
are found by damped Newton iteration from a grid of seeds.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import ArgumentError
from .hull import RotationSetEstimate, contains_with_margin
from .maps import project_torus
from .orbit import GridSpec, orbit_deltas

EPS_CLS = 1e-9
MAX_HALVINGS = 20


class Stability(enum.Enum):
    SADDLE = "Saddle"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    SINK = "Sink"
    SOURCE = "Source"


@dataclass(frozen=True)
class SearchConfig:
    seed_grid: GridSpec = field(default_factory=lambda: GridSpec(16))
    newton_tol: float = 1e-12
    max_newton_iters: int = 50
    dedupe_radius: float = 1e-6

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ArgumentError("newton_tol must be > 0")
        if not self.dedupe_radius > 0:
            raise ArgumentError("dedupe_radius must be > 0")
        if self.max_newton_iters < 0:
            raise ArgumentError("max_newton_iters must be >= 0")


@dataclass(frozen=True)
class PeriodicOrbitRecord:
    point: tuple
    q: int
    t: tuple
    rotation_vector: tuple
    residual: float
    classification: Stability | None = None
    trace: float | None = None
    determinant: float | None = None
    eigenvalues: tuple | None = None

    @property
    def exact_rotation_vector(self):
        return (Fraction(self.t[0], self.q), Fraction(self.t[1], self.q))

    def to_json(self):
        ev = None
        if self.eigenvalues is not None:
            ev = [[z.real, z.imag] for z in self.eigenvalues]
        return {
            "point": list(self.point),
            "q": self.q,
            "t": list(self.t),
            "rotation_vector": list(self.rotation_vector),
            "residual": self.residual,
            "classification": None if self.classification is None else self.classification.value,
            "trace": self.trace,
            "determinant": self.determinant,
            "eigenvalues": ev,
        }


def _residual_and_jacobian(lift, x, q, t):
    """``G(x)`` and ``D F^q(x)`` for an array of points ``(K, 2)``.

    Iterates on torus representatives with lattice bookkeeping, the same
    scheme as the orbit engine.
    """
    start = project_torus(x)[0]
    base = start
    J = np.broadcast_to(np.eye(2), (len(x), 2, 2)).copy()
    acc = np.zeros_like(start)
    for _ in range(q):
        J = lift.jacobian(base[:, 0], base[:, 1]) @ J
        fx, fy = lift(base[:, 0], base[:, 1])
        base, k = project_torus(np.stack([fx, fy], axis=1))
        acc += k
    G = (base - start) + (acc - np.asarray(t, dtype=float))
    return G, J


def _newton(lift, x0, q, t, tol, max_iters):
    """Vectorized damped Newton with post-convergence polishing.

    Returns ``(x, residual, ok, diagnostics)``; ``x`` is reduced to
    ``[0, 1)^2`` at every step, which does not change ``G``.
    """
    x = project_torus(np.array(x0, dtype=float))[0]
    K = len(x)
    G, J = _residual_and_jacobian(lift, x, q, t)
    r = np.hypot(G[:, 0], G[:, 1])
    live = np.isfinite(r)
    converged = live & (r <= tol)
    diag = []
    polishing = converged.copy()
    for _ in range(max_iters + 8):
        work = live & (~converged | polishing) & (r > 0)
        if not work.any():
            break
        M = J - np.eye(2)
        det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
        scale = np.abs(M).max(axis=(1, 2)) ** 2
        singular = work & ~(np.abs(det) > 1e-14 * np.maximum(scale, 1e-300))
        for i in np.flatnonzero(singular & ~converged):
            diag.append(f"singular Newton matrix at seed {tuple(np.round(x0[i], 12))}")
        live &= ~(singular & ~converged)
        polishing &= ~singular
        work &= ~singular
        if not work.any():
            break
        dx = np.empty_like(x)
        dx[:, 0] = -(M[:, 1, 1] * G[:, 0] - M[:, 0, 1] * G[:, 1]) / np.where(work, det, 1.0)
        dx[:, 1] = -(-M[:, 1, 0] * G[:, 0] + M[:, 0, 0] * G[:, 1]) / np.where(work, det, 1.0)
        lam = np.ones(K)
        pending = work.copy()
        newx, newG, newJ, newr = x.copy(), G.copy(), J.copy(), r.copy()
        for _h in range(MAX_HALVINGS + 1):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            trial = project_torus(x[idx] + lam[idx, None] * dx[idx])[0]
            tG, tJ = _residual_and_jacobian(lift, trial, q, t)
            tr = np.hypot(tG[:, 0], tG[:, 1])
            better = np.isfinite(tr) & (tr < r[idx])
            acc = idx[better]
            newx[acc], newG[acc], newJ[acc], newr[acc] = trial[better], tG[better], tJ[better], tr[better]
            pending[acc] = False
            # converged points only accept full steps while polishing
            stop = idx[~better & (polishing[idx] | converged[idx])]
            pending[stop] = False
            lam[pending] *= 0.5
        stalled = work & pending
        polishing &= ~(work & (newr >= r))
        polishing[stalled] = False
        live &= ~(stalled & ~converged)
        x, G, J, r = newx, newG, newJ, newr
        newly = live & ~converged & (r <= tol)
        converged |= newly
        polishing |= newly
        polishing &= r > 0
    ok = live & converged
    return x, r, ok, diag


def _torus_dist(p, pts):
    d = np.abs(pts - p)
    d = np.minimum(d, 1.0 - d)
    return np.hypot(d[..., 0], d[..., 1])


def _orbit_points(lift, p, q):
    pts = [np.asarray(p, dtype=float)]
    cur = pts[0]
    for _ in range(q - 1):
        fx, fy = lift(cur[0], cur[1])
        cur = project_torus(np.array([float(fx), float(fy)]))[0]
        pts.append(cur)
    return np.array(pts)


def find_periodic(lift, q: int, t, cfg: SearchConfig | None = None, diagnostics=None):
    """Distinct periodic orbits with ``F^q(x) = x + t``, one record per orbit.

    Each orbit is represented by its lexicographically smallest point in
    ``[0, 1)^2``. Records are sorted by representative and classified.
    """
    if int(q) != q or q < 1:
        raise ArgumentError("q must be an integer >= 1")
    q = int(q)
    t = (int(t[0]), int(t[1]))
    cfg = cfg or SearchConfig()
    seeds = cfg.seed_grid.points()
    x, r, ok, diag = _newton(lift, seeds, q, t, cfg.newton_tol, cfg.max_newton_iters)
    if diagnostics is not None:
        diagnostics.extend(diag)
    roots = x[ok]
    order = np.lexsort((roots[:, 1], roots[:, 0]))
    reps, orbits = [], []
    for p in roots[order]:
        if any(_torus_dist(p, orb).min() <= cfg.dedupe_radius for orb in orbits):
            continue
        orb = _orbit_points(lift, p, q)
        orbits.append(orb)
        k = np.lexsort((orb[:, 1], orb[:, 0]))[0]
        reps.append(orb[k])
    if not reps:
        return []
    reps = np.array(reps)
    # moving to another orbit point can cost a few ulps; polish again
    reps, _, _, _ = _newton(lift, reps, q, t, cfg.newton_tol, 0)
    res = orbit_deltas(lift, reps, [q], threads=1)[0] - np.asarray(t, dtype=float)
    res = np.hypot(res[:, 0], res[:, 1])
    rv = (t[0] / q, t[1] / q)
    records = []
    for p, rr in zip(reps, res):
        if rr > cfg.newton_tol:
            if diagnostics is not None:
                diagnostics.append(f"dropped root {tuple(p)} with residual {rr:.3g}")
            continue
        rec = PeriodicOrbitRecord((float(p[0]), float(p[1])), q, t, rv, float(rr))
        records.append(classify(rec, lift))
    records.sort(key=lambda rec: rec.point)
    return records


def period_jacobian(lift, point, q):
    _, J = _residual_and_jacobian(lift, np.asarray(point, dtype=float).reshape(1, 2), q, (0, 0))
    return J[0]


def classify(record: PeriodicOrbitRecord, lift) -> PeriodicOrbitRecord:
    """Fill in trace, determinant, eigenvalues and linear type of ``D F^q``."""
    J = period_jacobian(lift, record.point, record.q)
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    root = cmath.sqrt(tr * tr - 4.0 * det)
    l1, l2 = (tr + root) / 2.0, (tr - root) / 2.0
    if abs(det - 1.0) <= 1e-6:
        if abs(tr) > 2.0 + EPS_CLS:
            kind = Stability.SADDLE
        elif abs(tr) < 2.0 - EPS_CLS:
            kind = Stability.ELLIPTIC
        else:
            kind = Stability.PARABOLIC
    else:
        m1, m2 = sorted((abs(l1), abs(l2)))
        if m1 < 1.0 - EPS_CLS and m2 > 1.0 + EPS_CLS:
            kind = Stability.SADDLE
        elif m2 < 1.0 - EPS_CLS:
            kind = Stability.SINK
        elif m1 > 1.0 + EPS_CLS:
            kind = Stability.SOURCE
        elif abs(l1.imag) > 0:
            kind = Stability.ELLIPTIC
        else:
            kind = Stability.PARABOLIC
    return replace(record, classification=kind, trace=tr, determinant=det, eigenvalues=(l1, l2))


@dataclass(frozen=True)
class RealizationResult:
    found: bool
    q: int
    t: tuple
    records: tuple
    inside_hull: bool | None
    diagnostic: str = ""


def rational_parts(r):
    """``(q, (p, s))`` with ``r = (p/q, s/q)`` and ``q`` minimal."""
    rx, ry = Fraction(r[0]).limit_denominator(10**12), Fraction(r[1]).limit_denominator(10**12)
    if isinstance(r[0], (int, Fraction)):
        rx = Fraction(r[0])
    if isinstance(r[1], (int, Fraction)):
        ry = Fraction(r[1])
    q = math.lcm(rx.denominator, ry.denominator)
    return q, (int(rx * q), int(ry * q))


def realize_rational(lift, rotset, r, cfg: SearchConfig | None = None, margin: float = 0.0):
    """Search for a periodic orbit with rotation vector ``r``.

    An empty result for ``r`` inside the hull is reported as a limit of the
    seed grid, not as evidence against realization.
    """
    q, t = rational_parts(r)
    records = find_periodic(lift, q, t, cfg)
    inside = None
    if rotset is not None:
        hull = rotset.hull if isinstance(rotset, RotationSetEstimate) else rotset
        point = (t[0] / q, t[1] / q)
        if hull.is_degenerate and margin == 0:
            inside = contains_with_margin(hull, point, 0.0)
        else:
            inside = (not hull.is_degenerate) and contains_with_margin(hull, point, margin)
    note = ""
    if not records:
        if inside:
            note = "no orbit found although r lies inside the estimate; try a finer seed grid"
            warnings.warn(note, stacklevel=2)
        elif inside is False:
            note = "r lies outside the rotation-set estimate"
    return RealizationResult(bool(records), q, t, tuple(records), inside, note)
