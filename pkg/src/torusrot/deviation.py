"""Directional deviation probes against supporting lines of the rotation set.

For a supporting line through ``omega`` with outward normal ``v_perp`` the
quantity ``D_n = max_x <F^n(x) - x - n omega, v_perp>`` stays bounded in
``n`` when ``omega`` is a true support point. A linear trend in ``D_n``
measures how far the estimated support value is off in that direction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .hull import (
    ConvexPolygon,
    RotationSetEstimate,
    convex_hull,
    halfplane_polygon,
    supporting_line,
)
from .orbit import GridSpec, orbit_deltas, orbit_path


@dataclass(frozen=True)
class DeviationReport:
    theta: float
    omega: tuple
    v_perp: tuple
    samples: tuple  # ((n, D_n), ...)
    sup_observed: float
    tail_slope: float

    def to_json(self):
        return {
            "theta": self.theta,
            "omega": list(self.omega),
            "v_perp": list(self.v_perp),
            "samples": [[n, d] for n, d in self.samples],
            "sup_observed": self.sup_observed,
            "tail_slope": self.tail_slope,
        }


@dataclass(frozen=True)
class SupportBoundReport:
    rho_mu: tuple
    max_abs_deviation: float
    n_max: int
    two_sided: bool

    def to_json(self):
        return {
            "rho_mu": list(self.rho_mu),
            "max_abs_deviation": self.max_abs_deviation,
            "n_max": self.n_max,
            "two_sided": self.two_sided,
        }


def equally_spaced_directions(count: int):
    if count < 1:
        raise ArgumentError("direction count must be >= 1")
    return [2.0 * math.pi * k / count for k in range(count)]


def _hull_of(rotset):
    if isinstance(rotset, RotationSetEstimate):
        return rotset.hull
    if isinstance(rotset, ConvexPolygon):
        return rotset
    raise ArgumentError("expected a RotationSetEstimate or ConvexPolygon")


def tail_slope(ns, values, fit_fraction=0.5, window=None):
    """Least-squares slope of ``values`` against ``ns``.

    Uses the explicit ``window=(lo, hi)`` of ``n`` if given, else the last
    ``fit_fraction`` of the samples (at least two).
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        lo, hi = window
        mask = (ns >= lo) & (ns <= hi)
    else:
        k = max(2, int(math.ceil(fit_fraction * len(ns))))
        mask = np.zeros(len(ns), dtype=bool)
        mask[-k:] = True
    if mask.sum() < 2:
        raise ArgumentError("the fit window needs at least two schedule entries")
    x, y = ns[mask], values[mask]
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def probe_support_deviations(
    lift,
    rotset,
    thetas,
    grid: GridSpec,
    n_schedule,
    fit_fraction: float = 0.5,
    inward_shift: float = 0.0,
    window=None,
    threads=None,
):
    """One :class:`DeviationReport` per direction in ``thetas``.

    ``inward_shift`` moves every ``omega`` by ``-inward_shift * v_perp``;
    it adds exactly ``inward_shift`` to each tail slope and serves as a
    sensitivity control.
    """
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise ArgumentError("need at least one direction")
    sched = [int(n) for n in n_schedule]
    if len(sched) < 2 or any(n < 1 for n in sched) or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ArgumentError("n_schedule must be strictly increasing positive integers (>= 2 entries)")
    if not 0.0 < fit_fraction <= 1.0:
        raise ArgumentError("fit_fraction must lie in (0, 1]")
    hull = _hull_of(rotset)
    deltas = orbit_deltas(lift, grid.points(), sched, threads=threads)
    ns = np.asarray(sched, dtype=float)
    reports = []
    for theta in thetas:
        line = supporting_line(hull, theta)
        ux, uy = line.v_perp
        ox = line.omega[0] - inward_shift * ux
        oy = line.omega[1] - inward_shift * uy
        proj = deltas[..., 0] * ux + deltas[..., 1] * uy  # (K, N)
        d = proj.max(axis=1) - ns * (ox * ux + oy * uy)
        reports.append(
            DeviationReport(
                theta,
                (ox, oy),
                line.v_perp,
                tuple((n, float(v)) for n, v in zip(sched, d)),
                float(d.max()),
                tail_slope(ns, d, fit_fraction, window),
            )
        )
    return reports


def refine_hull_by_deviation(lift, rotset, thetas, grid: GridSpec, n_ref: int, threads=None):
    """Circumscribed polygon ``{p : <p, u_theta> <= hi_theta}`` from grid support values.

    ``hi_theta`` is the grid maximum of ``<(F^n(x) - x) / n, u_theta>`` at
    ``n = n_ref``. The half-planes are clipped to the cloud's bounding box
    grown by 1.
    """
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise ArgumentError("need at least one direction")
    if isinstance(rotset, RotationSetEstimate) and n_ref < max(rotset.n_schedule):
        raise ArgumentError("n_ref must be at least the largest scheduled n")
    hull = _hull_of(rotset)
    avg = orbit_deltas(lift, grid.points(), [int(n_ref)], threads=threads)[0] / float(n_ref)
    normals = [(math.cos(t), math.sin(t)) for t in thetas]
    offsets = [float(np.max(avg[:, 0] * ux + avg[:, 1] * uy)) for ux, uy in normals]
    v = np.vstack([hull.as_array(), avg])
    lo, hi = v.min(axis=0) - 1.0, v.max(axis=0) + 1.0
    return halfplane_polygon(normals, offsets, (lo[0], lo[1], hi[0], hi[1]))


def _deviation_series(lift, x, rho_mu, n_max):
    if n_max < 1:
        raise ArgumentError("n_max must be >= 1")
    path = orbit_path(lift, x, int(n_max))[1:]
    ns = np.arange(1, n_max + 1, dtype=float)[:, None]
    drift = math.hypot(*(path[-1] / n_max - np.asarray(rho_mu, dtype=float)))
    if drift > 10.0 / n_max:
        warnings.warn(
            f"orbit average differs from rho_mu by {drift:.3g} (> 10/n_max);"
            " the start point may not lie in the support of the measure",
            stacklevel=3,
        )
    return path - ns * np.asarray(rho_mu, dtype=float)


def probe_support_bound(lift, x, rho_mu, v_perp, n_max: int, two_sided: bool = True):
    """Largest deviation ``<F^n(x) - x - n rho_mu, v_perp>`` over ``1 <= n <= n_max``.

    Two-sided reports the maximum absolute value, one-sided the signed maximum.
    """
    if abs(math.hypot(v_perp[0], v_perp[1]) - 1.0) > 1e-12:
        raise ArgumentError("v_perp must be a unit vector")
    w = _deviation_series(lift, x, rho_mu, int(n_max))
    proj = w[:, 0] * v_perp[0] + w[:, 1] * v_perp[1]
    value = float(np.max(np.abs(proj)) if two_sided else np.max(proj))
    return SupportBoundReport((float(rho_mu[0]), float(rho_mu[1])), value, int(n_max), bool(two_sided))


def norm_bound_from_pair(lift, x, rho_mu, v1, v2, n_max: int):
    """Full-norm deviation bound from two non-parallel directional bounds.

    With ``M`` the matrix of rows ``v1, v2`` any vector ``w`` satisfies
    ``|w| <= |M^-1|_2 * |M w|``, so two bounded projections bound the norm.
    Returns ``(bound, observed)`` where ``observed`` is the directly
    measured ``max_n |F^n(x) - x - n rho_mu|``.
    """
    M = np.array([v1, v2], dtype=float)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) <= 1e-12:
        raise ArgumentError("directions must not be parallel")
    w = _deviation_series(lift, x, rho_mu, int(n_max))
    proj = w @ M.T
    inv_norm = float(np.linalg.norm(np.linalg.inv(M), 2))
    bound = inv_norm * float(np.max(np.hypot(proj[:, 0], proj[:, 1])))
    observed = float(np.max(np.hypot(w[:, 0], w[:, 1])))
    return bound, observed
