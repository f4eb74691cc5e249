"""Orbit iteration with exact lattice bookkeeping.

Points are iterated on the torus representative in ``[0, 1)^2`` while the
integer jumps of every step are accumulated separately. Float magnitudes
stay bounded, so the displacement ``F^n(x) - x`` keeps uniform precision in
``n``: rounding touches only the fractional part, never the lattice part.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ArgumentError
from .maps import TorusLift, project_torus


@dataclass(frozen=True)
class LiftedPoint:
    """Torus point ``base`` plus integer ``lattice``; plane position is their sum."""

    base: tuple[float, float]
    lattice: tuple[int, int]

    @classmethod
    def from_plane(cls, p):
        base, k = project_torus(np.asarray(p, dtype=float))
        return cls((float(base[0]), float(base[1])), (int(k[0]), int(k[1])))

    @property
    def plane(self):
        return (self.base[0] + self.lattice[0], self.base[1] + self.lattice[1])


@dataclass(frozen=True)
class DisplacementRecord:
    start: tuple[float, float]
    n: int
    delta: tuple[float, float]
    average: tuple[float, float]


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``resolution x resolution`` seed grid on the unit torus.

    Seeds are ``((i + ox) / res, (j + oy) / res)`` in units of cells, with
    offset defaulting to the cell midpoint. Row-major order: the y index is
    the row, x varies fastest.
    """

    resolution: int
    offset: tuple[float, float] | None = None

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise ArgumentError("grid resolution must be a positive integer")
        if self.offset is not None:
            ox, oy = self.offset
            if not (0.0 <= ox < 1.0 and 0.0 <= oy < 1.0):
                raise ArgumentError("grid offset must lie in [0, 1)^2")

    @property
    def cell_offset(self):
        if self.offset is None:
            return (0.5 / self.resolution, 0.5 / self.resolution)
        return tuple(float(o) for o in self.offset)

    def points(self) -> np.ndarray:
        r = self.resolution
        ox, oy = self.cell_offset
        xs = np.arange(r) / r + ox
        ys = np.arange(r) / r + oy
        X, Y = np.meshgrid(xs, ys)  # rows follow y
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        base, _ = project_torus(pts)
        return np.ascontiguousarray(base)

    def __len__(self):
        return self.resolution * self.resolution


def default_threads():
    return os.cpu_count() or 1


def orbit_deltas(lift: TorusLift, points, checkpoints, threads=None) -> np.ndarray:
    """Displacements ``F^n(p) - p`` for every point and checkpoint ``n``.

    ``points`` is ``(N, 2)`` in the plane, ``checkpoints`` positive integers
    (any order, duplicates allowed). Returns ``(K, N, 2)`` in the order the
    checkpoints were given. Output does not depend on ``threads``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ArgumentError("points must be finite")
    cps = np.asarray(checkpoints, dtype=np.int64).ravel()
    if cps.size == 0:
        return np.empty((0, len(pts), 2))
    if np.any(cps < 1):
        raise ArgumentError("iteration counts must be >= 1")
    uniq, inverse = np.unique(cps, return_inverse=True)
    bases, lattice = project_torus(pts)
    bases = np.ascontiguousarray(bases)
    # residual of the projection, ~1 ulp; keeps delta relative to p itself
    shift = bases + lattice - pts
    threads = default_threads() if threads is None else max(1, int(threads))
    params = lift.shear_params
    if params is not None:
        out = _backend.active.shear_orbits(bases, uniq, *params, threads)
    else:
        out = _backend.python.lift_orbits(lift, bases, uniq, threads)
    if np.any(shift):
        out = out + shift
    return out[inverse]


def displacement(lift: TorusLift, x, n: int) -> DisplacementRecord:
    """Displacement record ``(F^n(x) - x, (F^n(x) - x) / n)`` for one point."""
    if int(n) != n or n < 1:
        raise ArgumentError("n must be an integer >= 1")
    n = int(n)
    d = orbit_deltas(lift, [x], [n], threads=1)[0, 0]
    delta = (float(d[0]), float(d[1]))
    return DisplacementRecord((float(x[0]), float(x[1])), n, delta, (delta[0] / n, delta[1] / n))


def birkhoff_average(lift: TorusLift, x, n: int):
    """Average of the displacement function along ``n`` steps of the orbit of ``x``."""
    return displacement(lift, x, n).average


def batch_displacements(lift: TorusLift, grid: GridSpec, n: int, threads=None):
    """One :class:`DisplacementRecord` per grid seed, row-major."""
    if int(n) != n or n < 1:
        raise ArgumentError("n must be an integer >= 1")
    n = int(n)
    pts = grid.points()
    d = orbit_deltas(lift, pts, [n], threads=threads)[0]
    return [
        DisplacementRecord(
            (float(p[0]), float(p[1])),
            n,
            (float(dx), float(dy)),
            (float(dx) / n, float(dy) / n),
        )
        for p, (dx, dy) in zip(pts, d)
    ]


def directional_deviation(lift: TorusLift, x, n: int, omega, v_perp) -> float:
    """``<F^n(x) - x - n omega, v_perp>`` for a unit normal ``v_perp``."""
    if abs(math.hypot(v_perp[0], v_perp[1]) - 1.0) > 1e-12:
        raise ArgumentError("v_perp must be a unit vector")
    d = displacement(lift, x, n).delta
    return (d[0] - n * omega[0]) * v_perp[0] + (d[1] - n * omega[1]) * v_perp[1]


def orbit_path(lift: TorusLift, x, n: int) -> np.ndarray:
    """Displacements after ``0, 1, ..., n`` steps from ``x``, shape ``(n + 1, 2)``."""
    if n < 0:
        raise ArgumentError("n must be >= 0")
    out = np.zeros((n + 1, 2))
    if n:
        out[1:] = orbit_deltas(lift, [x], np.arange(1, n + 1), threads=1)[:, 0]
    return out
