"""Rotation vectors of invariant measures and the Lebesgue interior check."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .hull import RotationSetEstimate, contains_with_margin, signed_distance
from .orbit import GridSpec, orbit_deltas


class Method(enum.Enum):
    GRID_QUADRATURE = "GridQuadrature"
    MONTE_CARLO = "MonteCarlo"
    ORBIT_AVERAGE = "OrbitAverage"


@dataclass(frozen=True)
class MeasureRotationResult:
    vector: tuple
    method: Method
    error_estimate: float
    sample_count: int
    seed: int | None = None

    def to_json(self):
        return {
            "vector": list(self.vector),
            "method": self.method.value,
            "error": self.error_estimate,
            "samples": self.sample_count,
            "seed": self.seed,
        }


# Samples are summed in fixed-size blocks; the block partials are then added
# with math.fsum, which is exactly rounded, so the total is independent of
# how blocks are scheduled.
_BLOCK = 1 << 16


def _mean_field(lift, xs, ys):
    parts_x, parts_y = [], []
    for i in range(0, len(xs), _BLOCK):
        dx, dy = lift.displacement_field(xs[i : i + _BLOCK], ys[i : i + _BLOCK])
        parts_x.append(math.fsum(dx))
        parts_y.append(math.fsum(dy))
    n = len(xs)
    return math.fsum(parts_x) / n, math.fsum(parts_y) / n


def _midpoint_mean(lift, res):
    g = (np.arange(res) + 0.5) / res
    X, Y = np.meshgrid(g, g)
    return _mean_field(lift, X.ravel(), Y.ravel())


def lebesgue_rotation_vector(lift, method="grid", resolution_or_samples=1024, seed=0):
    """Integral of the displacement function against Lebesgue measure.

    ``method="grid"`` uses the midpoint rule on ``res x res`` cells with an
    error estimate from the half-resolution rule; ``"mc"`` uses seeded
    uniform samples and reports the standard error (Euclidean norm of the
    per-component standard errors).
    """
    method = _method(method)
    count = int(resolution_or_samples)
    if count < 1:
        raise ArgumentError("resolution/sample count must be >= 1")
    report = area_preservation_check(lift, n_samples=256, seed=seed, tol=1e-9)
    if not report.passed:
        warnings.warn(
            f"map is not area preserving on samples (max |det J - 1| = {report.max_det_defect:.3g});"
            " the Lebesgue rotation vector is not an invariant-measure quantity",
            stacklevel=2,
        )
    if method is Method.GRID_QUADRATURE:
        vx, vy = _midpoint_mean(lift, count)
        if count >= 2:
            cx, cy = _midpoint_mean(lift, count // 2)
            err = max(abs(vx - cx), abs(vy - cy))
        else:
            err = float("inf")
        return MeasureRotationResult((vx, vy), method, err, count * count, None)
    if method is Method.MONTE_CARLO:
        rng = np.random.Generator(np.random.PCG64(seed))
        pts = rng.random((count, 2))
        dx, dy = lift.displacement_field(pts[:, 0], pts[:, 1])
        vx, vy = _mean_field(lift, pts[:, 0], pts[:, 1])
        if count > 1:
            se = math.hypot(np.std(dx, ddof=1), np.std(dy, ddof=1)) / math.sqrt(count)
        else:
            se = float("inf")
        return MeasureRotationResult((vx, vy), method, float(se), count, int(seed))
    raise ArgumentError("orbit averages are computed by orbit_rotation_vector")


def monte_carlo_standard_errors(lift, samples, seed=0):
    """Per-component standard errors of the Monte Carlo estimator."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = rng.random((int(samples), 2))
    dx, dy = lift.displacement_field(pts[:, 0], pts[:, 1])
    n = len(pts)
    return float(np.std(dx, ddof=1) / math.sqrt(n)), float(np.std(dy, ddof=1) / math.sqrt(n))


def _method(method):
    if isinstance(method, Method):
        return method
    key = str(method).lower().replace("_", "").replace("-", "")
    aliases = {
        "grid": Method.GRID_QUADRATURE,
        "gridquadrature": Method.GRID_QUADRATURE,
        "quadrature": Method.GRID_QUADRATURE,
        "mc": Method.MONTE_CARLO,
        "montecarlo": Method.MONTE_CARLO,
        "orbit": Method.ORBIT_AVERAGE,
        "orbitaverage": Method.ORBIT_AVERAGE,
    }
    if key not in aliases:
        raise ArgumentError(f"unknown method {method!r}")
    return aliases[key]


def orbit_rotation_vector(lift, x, n: int, tail_fraction: float = 1.0) -> MeasureRotationResult:
    """Birkhoff average of the displacement over the last ``tail_fraction`` of ``n`` steps.

    The error estimate is the distance between the averages over
    ``[n/2, n]`` and ``[0, n]``.
    """
    if n < 10:
        raise ArgumentError("n must be >= 10")
    if not 0.0 < tail_fraction <= 1.0:
        raise ArgumentError("tail_fraction must lie in (0, 1]")
    n = int(n)
    m = max(1, int(math.ceil(tail_fraction * n)))
    half = n // 2
    cps = [c for c in (n - m, half, n) if c > 0]
    d = dict(zip(cps, orbit_deltas(lift, [x], cps, threads=1)[:, 0]))
    zero = np.zeros(2)
    full = d[n]
    tail = (full - d.get(n - m, zero)) / m
    late = (full - d.get(half, zero)) / (n - half)
    err = float(np.hypot(*(late - full / n)))
    return MeasureRotationResult(
        (float(tail[0]), float(tail[1])), Method.ORBIT_AVERAGE, err, m, None
    )


@dataclass(frozen=True)
class AreaReport:
    passed: bool
    max_det_defect: float


def area_preservation_check(lift, n_samples=1000, seed=0, tol=1e-9) -> AreaReport:
    """``max |det DF - 1|`` over seeded uniform samples of the torus."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = rng.random((int(n_samples), 2))
    J = lift.jacobian(pts[:, 0], pts[:, 1])
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    defect = float(np.max(np.abs(det - 1.0)))
    return AreaReport(defect <= tol, defect)


class Verdict(enum.Enum):
    INTERIOR_WITH_MARGIN = "InteriorWithMargin"
    BOUNDARY_INDETERMINATE = "BoundaryIndeterminate"
    OUTSIDE_VIOLATION = "OutsideViolation"


@dataclass(frozen=True)
class InteriorVerdict:
    verdict: Verdict
    margin_used: float
    distance_to_boundary: float
    diagnostic: str = ""


def interior_check(rotset, leb: MeasureRotationResult, margin: float) -> InteriorVerdict:
    """Is the Lebesgue rotation vector interior to the rotation-set estimate?

    The error budget is the measure error plus the last Hausdorff diagnostic
    of the estimate, added linearly. ``margin_used`` is margin plus budget.
    """
    if margin < 0:
        raise ArgumentError("margin must be >= 0")
    hull = rotset.hull if isinstance(rotset, RotationSetEstimate) else rotset
    haus = rotset.hausdorff_diag[-1] if isinstance(rotset, RotationSetEstimate) else 0.0
    budget = float(leb.error_estimate) + float(haus)
    used = margin + budget
    dist = signed_distance(hull, leb.vector)
    if hull.is_degenerate:
        return InteriorVerdict(
            Verdict.BOUNDARY_INDETERMINATE, used, dist, "rotation-set estimate has empty interior"
        )
    if contains_with_margin(hull, leb.vector, used):
        return InteriorVerdict(Verdict.INTERIOR_WITH_MARGIN, used, dist)
    if dist < -budget:
        return InteriorVerdict(
            Verdict.OUTSIDE_VIOLATION,
            used,
            dist,
            "Lebesgue rotation vector lies outside the estimate beyond the error budget",
        )
    return InteriorVerdict(Verdict.BOUNDARY_INDETERMINATE, used, dist)
