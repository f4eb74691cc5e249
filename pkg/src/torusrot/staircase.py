"""Greedy lattice staircases tracking a line direction.

Starting at the origin, each step adds either the horizontal unit vector or
the vertical one, whichever keeps the signed distance to the guide line
smaller (ties go horizontal). The distance then never exceeds 1.

Directions are normalized to ``a >= 0``. For ``b < 0`` the vertical step is
``(0, -1)`` so the path can follow a descending line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _backend
from .errors import ArgumentError, InternalLogicError

H, V = 0, 1


@dataclass(frozen=True)
class Direction:
    """Unit direction ``(a, b)`` with ``a >= 0``, plus the integer form when rational."""

    a: float
    b: float
    exact: tuple | None = None

    @classmethod
    def from_float(cls, a, b):
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ArgumentError("direction must be finite")
        if a == 0.0 and b == 0.0:
            raise ArgumentError("direction must be nonzero")
        if a < 0 or (a == 0.0 and b < 0):
            a, b = -a, -b
        if b == 0.0:
            return cls(1.0, 0.0, (1, 0))
        if a == 0.0:
            return cls(0.0, 1.0, (0, 1))
        r = math.hypot(a, b)
        return cls(a / r, b / r, None)

    @classmethod
    def from_ints(cls, p, q):
        """Exact rational direction through the lattice point ``(p, q)``."""
        if int(p) != p or int(q) != q:
            raise ArgumentError("exact directions need integer components")
        p, q = int(p), int(q)
        if p == 0 and q == 0:
            raise ArgumentError("direction must be nonzero")
        if p < 0 or (p == 0 and q < 0):
            p, q = -p, -q
        g = math.gcd(p, q)
        p, q = p // g, q // g
        r = math.hypot(p, q)
        return cls(p / r, q / r, (p, q))

    @classmethod
    def from_slope(cls, slope):
        """Direction ``(1, slope)``; exact when ``slope`` is a Fraction or int."""
        if isinstance(slope, (int, Fraction)):
            s = Fraction(slope)
            return cls.from_ints(s.denominator, s.numerator)
        return cls.from_float(1.0, float(slope))

    @property
    def v_perp(self):
        return (-self.b, self.a)

    @property
    def vertical_sign(self):
        b = self.exact[1] if self.exact is not None else self.b
        return -1 if b < 0 else 1


@dataclass(frozen=True)
class StaircasePath:
    direction: Direction
    steps: np.ndarray = field(repr=False)  # uint8, 0 horizontal / 1 vertical
    deltas: np.ndarray = field(repr=False)
    rational_period: tuple | None = None
    width_bound: float = 3.0
    int_deltas: tuple | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.steps)

    def step_vectors(self):
        s = self.direction.vertical_sign
        out = np.zeros((len(self.steps), 2), dtype=np.int64)
        out[:, 0] = self.steps == H
        out[:, 1] = s * (self.steps == V)
        return out

    def checkpoints(self):
        """Partial sums ``n_0 + ... + n_i``."""
        return np.cumsum(self.step_vectors(), axis=0)

    def counts(self):
        nv = int(np.count_nonzero(self.steps))
        return len(self.steps) - nv, nv


@dataclass(frozen=True)
class InvariantReport:
    ok: bool
    max_abs_delta: float


def _exact_staircase(p, q, max_steps):
    sign = -1 if q < 0 else 1
    dh, dv = -q, sign * p  # <(-q, p), step> for the steps (1, 0) and (0, sign)
    norm2 = p * p + q * q
    d = 0
    steps, ints = [], []
    sx = sy = 0
    for _ in range(max_steps):
        h, v = d + dh, d + dv
        if abs(h) <= abs(v):
            d = h
            steps.append(H)
            sx += 1
        else:
            d = v
            steps.append(V)
            sy += sign
        ints.append(d)
        if d * d > norm2:
            raise InternalLogicError(f"distance bound violated in exact mode at step {len(steps)}")
        if d == 0:
            return steps, ints, (sx, sy)
    return steps, ints, None


def build_staircase(direction: Direction, max_steps: int, d_gamma: float = 0.0) -> StaircasePath:
    """Greedy staircase of at most ``max_steps`` unit steps along ``direction``.

    Exact directions run in integer arithmetic on the unnormalized normal
    ``(-q, p)`` and stop at the first zero distance, recording the step sum
    as ``rational_period``. Float directions always run ``max_steps`` steps
    and never report a period.
    """
    if int(max_steps) != max_steps or max_steps < 1:
        raise ArgumentError("max_steps must be an integer >= 1")
    if d_gamma < 0:
        raise ArgumentError("d_gamma must be >= 0")
    max_steps = int(max_steps)
    width = 3.0 + 2.0 * float(d_gamma)
    if direction.exact is not None:
        p, q = direction.exact
        steps, ints, period = _exact_staircase(p, q, max_steps)
        if period is None and max_steps >= p + abs(q):
            raise InternalLogicError(
                f"exact direction ({p}, {q}) did not close within {p + abs(q)} steps"
            )
        r = math.hypot(p, q)
        return StaircasePath(
            direction,
            np.asarray(steps, dtype=np.uint8),
            np.asarray(ints, dtype=float) / r,
            period,
            width,
            tuple(ints),
        )
    a, b = direction.a, direction.b
    dh, dv = -b, direction.vertical_sign * a
    steps, deltas = _backend.active.staircase_float(dh, dv, max_steps)
    return StaircasePath(direction, steps, deltas, None, width, None)


def extend_negative(path: StaircasePath, n_steps: int | None = None):
    """Checkpoints ``-(n_0 + ... + n_i)`` on the other side of the start.

    ``n_steps`` defaults to the path length; a closed (periodic) path can be
    extended further by repeating its period.
    """
    n = len(path) if n_steps is None else int(n_steps)
    if n < 0:
        raise ArgumentError("n_steps must be >= 0")
    vecs = path.step_vectors()
    if n > len(vecs):
        if path.rational_period is None:
            raise ArgumentError("only closed paths can be extended beyond their length")
        reps = -(-n // len(vecs))
        vecs = np.tile(vecs, (reps, 1))
    return -np.cumsum(vecs[:n], axis=0)


def distances_to_line(direction: Direction, points):
    """Signed distances ``<v_perp, p>`` of lattice points to the guide line."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if direction.exact is not None:
        p, q = direction.exact
        return (pts[:, 1] * p - pts[:, 0] * q) / math.hypot(p, q)
    return pts[:, 0] * -direction.b + pts[:, 1] * direction.a


def check_invariant(path: StaircasePath) -> InvariantReport:
    """``|delta_i| <= 1`` for every prefix; integer test in exact mode."""
    if path.int_deltas is not None:
        p, q = path.direction.exact
        norm2 = p * p + q * q
        ok = all(d * d <= norm2 for d in path.int_deltas)
        worst = max((abs(d) for d in path.int_deltas), default=0)
        return InvariantReport(ok, worst / math.hypot(p, q))
    worst = float(np.max(np.abs(path.deltas))) if len(path.deltas) else 0.0
    return InvariantReport(worst <= 1.0 + 1e-12, worst)
