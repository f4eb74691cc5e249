"""Lifts to the plane of torus maps homotopic to the identity.

Three families are supported:

* :class:`Translation` ``(x, y) -> (x + alpha, y + beta)``;
* :class:`TwoShear` ``V o H`` with ``H(x, y) = (x + a sin 2 pi y + c1, y)``
  and ``V(x, y) = (x, y + b sin 2 pi x + c2)``, area preserving;
* :class:`Expression`, user formulas parsed by :mod:`torusrot.expr`.

A :class:`TorusLift` evaluates ``F`` and its Jacobian on numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from . import expr as _expr
from ._pykernels import _sin2pi
from .errors import ArgumentError, EvaluationFault, PeriodicityError

TWO_PI = 2.0 * math.pi


def sin2pi(x):
    """``sin(2 pi x)`` with exact argument reduction.

    Reducing ``2x`` to ``[-1/2, 1/2]`` before evaluating makes the zeros at
    half-integers exact, so fixed points of the shear families are exact
    floating-point fixed points. Shares its polynomial with the orbit
    kernels so single-point and batch evaluations agree bitwise.
    """
    return _sin2pi(np.asarray(x, dtype=float))


def cos2pi(x):
    """``cos(2 pi x)`` with the same reduction as :func:`sin2pi`."""
    u = 2.0 * np.asarray(x, dtype=float)
    n = np.rint(u)
    c = np.cos(np.pi * (u - n))
    return np.where(np.fmod(n, 2.0) != 0.0, -c, c)


@dataclass(frozen=True)
class Translation:
    alpha: float
    beta: float


@dataclass(frozen=True)
class TwoShear:
    a: float
    b: float
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c1", "c2"):
            if not math.isfinite(getattr(self, name)):
                raise ArgumentError(f"TwoShear parameter {name} must be finite")


@dataclass(frozen=True)
class Expression:
    expr_x: str
    expr_y: str
    params: Mapping[str, float] = field(default_factory=dict)
    tree_x: _expr.Node = field(default=None, compare=False, repr=False)
    tree_y: _expr.Node = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.tree_x is None:
            object.__setattr__(self, "tree_x", _expr.parse(self.expr_x, self.params))
        if self.tree_y is None:
            object.__setattr__(self, "tree_y", _expr.parse(self.expr_y, self.params))


TorusMapSpec = Union[Translation, TwoShear, Expression]


def parse_map_expr(source_x: str, source_y: str, params=None) -> Expression:
    """Parse the two coordinate formulas of an expression map."""
    params = {k: float(v) for k, v in (params or {}).items()}
    return Expression(source_x, source_y, params)


class TorusLift:
    """Evaluable lift ``F: R^2 -> R^2`` with Jacobian access.

    Instances are immutable and safe to share between threads. Expression
    maps are checked for deck commutation on construction unless
    ``validate=False``.
    """

    __slots__ = ("spec", "_derivs")

    def __init__(self, spec: TorusMapSpec, validate: bool = True):
        object.__setattr__(self, "spec", spec)
        if isinstance(spec, Expression):
            derivs = (
                _expr.derivative(spec.tree_x, "x"),
                _expr.derivative(spec.tree_x, "y"),
                _expr.derivative(spec.tree_y, "x"),
                _expr.derivative(spec.tree_y, "y"),
            )
        elif isinstance(spec, (Translation, TwoShear)):
            derivs = None
        else:
            raise ArgumentError(f"unknown map family {type(spec).__name__}")
        object.__setattr__(self, "_derivs", derivs)
        if validate and isinstance(spec, Expression):
            report = check_periodicity(self, n_samples=64, tol=1e-9)
            if not report.passed:
                raise PeriodicityError(
                    f"expression map is not deck-commuting (max defect {report.max_defect:.3g});"
                    " the formulas must define a map homotopic to the identity"
                )

    def __setattr__(self, name, value):
        raise AttributeError("TorusLift is immutable")

    def __repr__(self):
        return f"TorusLift({self.spec!r})"

    @property
    def shear_params(self):
        """``(a, b, c1, c2)`` for built-in families, else None."""
        s = self.spec
        if isinstance(s, Translation):
            return (0.0, 0.0, float(s.alpha), float(s.beta))
        if isinstance(s, TwoShear):
            return (float(s.a), float(s.b), float(s.c1), float(s.c2))
        return None

    def __call__(self, x, y):
        """Evaluate ``F(x, y)`` elementwise; returns a pair of arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        params = self.shear_params
        if params is not None:
            a, b, c1, c2 = params
            xh = x + (a * sin2pi(y) + c1)
            return xh, y + (b * sin2pi(xh) + c2)
        s = self.spec
        return (
            _expr.evaluate(s.tree_x, x, y, s.expr_x),
            _expr.evaluate(s.tree_y, x, y, s.expr_y),
        )

    def displacement_field(self, x, y):
        """``phi(x, y) = F(x, y) - (x, y)``, computed without cancellation for built-ins."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        params = self.shear_params
        if params is not None:
            a, b, c1, c2 = params
            dx = a * sin2pi(y) + c1
            dy = b * sin2pi(x + dx) + c2
            shape = np.broadcast(x, y).shape
            return np.broadcast_to(dx, shape).copy(), np.broadcast_to(dy, shape).copy()
        fx, fy = self(x, y)
        return fx - x, fy - y

    def jacobian(self, x, y):
        """Jacobian of ``F`` as an array of shape ``x.shape + (2, 2)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        out = np.empty(shape + (2, 2))
        params = self.shear_params
        if params is not None:
            a, b, c1, c2 = params
            # D(V o H) = [[1, A], [B, 1 + A B]], A = 2 pi a cos 2 pi y, B = 2 pi b cos 2 pi xh
            xh = x + (a * sin2pi(y) + c1)
            A = TWO_PI * a * cos2pi(y)
            B = TWO_PI * b * cos2pi(xh)
            out[..., 0, 0] = 1.0
            out[..., 0, 1] = A
            out[..., 1, 0] = B
            out[..., 1, 1] = 1.0 + A * B
            return out
        s = self.spec
        for k, (node, src) in enumerate(
            zip(self._derivs, (s.expr_x, s.expr_x, s.expr_y, s.expr_y))
        ):
            out[..., k // 2, k % 2] = _expr.evaluate(node, x, y, src)
        return out


def make_lift(spec: TorusMapSpec, validate: bool = True) -> TorusLift:
    return TorusLift(spec, validate=validate)


def eval_lift(lift: TorusLift, p) -> tuple[float, float]:
    """Evaluate the lift at a single plane point."""
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ArgumentError("point must be finite")
    fx, fy = lift(x, y)
    return float(fx), float(fy)


def jacobian(lift: TorusLift, p) -> np.ndarray:
    return lift.jacobian(float(p[0]), float(p[1]))


def project_torus(p):
    """Reduce plane coordinates to ``[0, 1)``; returns ``(base, lattice)``.

    Works elementwise on arrays. A reduced coordinate that rounds to 1.0 is
    clamped to 0 and its lattice part incremented, so ``base + lattice``
    still reproduces ``p`` to within one ulp.
    """
    p = np.asarray(p, dtype=float)
    k = np.floor(p)
    base = p - k
    wrap = base >= 1.0
    if np.any(wrap):
        base = np.where(wrap, 0.0, base)
        k = np.where(wrap, k + 1.0, k)
    return base, k


@dataclass(frozen=True)
class PeriodicityReport:
    passed: bool
    max_defect: float


def check_periodicity(lift: TorusLift, n_samples: int = 100, tol: float = 1e-9, seed: int = 0):
    """Check ``F(p + e) = F(p) + e`` for ``e = (1,0), (0,1)`` on seeded samples.

    The defect is the Euclidean norm of the commutation error, maximized
    over samples and both unit translations.
    """
    if n_samples < 1:
        raise ArgumentError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2.0, 2.0, size=(n_samples, 2))
    x, y = pts[:, 0], pts[:, 1]
    fx, fy = lift(x, y)
    worst = 0.0
    for ex, ey in ((1.0, 0.0), (0.0, 1.0)):
        gx, gy = lift(x + ex, y + ey)
        defect = np.hypot(gx - fx - ex, gy - fy - ey)
        worst = max(worst, float(np.max(defect)))
    return PeriodicityReport(worst <= tol, worst)


def finite_difference_jacobian(lift: TorusLift, x, y, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian; the cross-validation oracle for :meth:`TorusLift.jacobian`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.empty(np.broadcast(x, y).shape + (2, 2))
    xp, yp = lift(x + h, y)
    xm, ym = lift(x - h, y)
    out[..., 0, 0] = (xp - xm) / (2 * h)
    out[..., 1, 0] = (yp - ym) / (2 * h)
    xp, yp = lift(x, y + h)
    xm, ym = lift(x, y - h)
    out[..., 0, 1] = (xp - xm) / (2 * h)
    out[..., 1, 1] = (yp - ym) / (2 * h)
    return out


def spec_from_mapping(table: Mapping) -> TorusMapSpec:
    """Build a map spec from a config ``[map]`` table.

    Keys: ``family`` (``translation``, ``two_shear`` or ``expression``) plus
    ``alpha``/``beta``, ``a``/``b``/``c1``/``c2`` or ``expr_x``/``expr_y``
    with an optional ``params`` sub-table.
    """
    from .errors import ConfigError

    if "family" not in table:
        raise ConfigError("missing key: family")
    family = str(table["family"]).lower().replace("-", "_")

    def need(key):
        if key not in table:
            raise ConfigError(f"missing key: {key}")
        return table[key]

    if family == "translation":
        return Translation(float(need("alpha")), float(need("beta")))
    if family in ("two_shear", "twoshear"):
        return TwoShear(
            float(need("a")),
            float(need("b")),
            float(table.get("c1", 0.0)),
            float(table.get("c2", 0.0)),
        )
    if family == "expression":
        return parse_map_expr(str(need("expr_x")), str(need("expr_y")), table.get("params", {}))
    raise ConfigError(f"unknown map family {table['family']!r}")


def spec_to_mapping(spec: TorusMapSpec) -> dict:
    if isinstance(spec, Translation):
        return {"family": "translation", "alpha": spec.alpha, "beta": spec.beta}
    if isinstance(spec, TwoShear):
        return {"family": "two_shear", "a": spec.a, "b": spec.b, "c1": spec.c1, "c2": spec.c2}
    return {
        "family": "expression",
        "expr_x": spec.expr_x,
        "expr_y": spec.expr_y,
        "params": dict(spec.params),
    }


__all__ = [
    "Translation",
    "TwoShear",
    "Expression",
    "TorusLift",
    "TorusMapSpec",
    "EvaluationFault",
    "make_lift",
    "eval_lift",
    "jacobian",
    "parse_map_expr",
    "check_periodicity",
    "project_torus",
    "finite_difference_jacobian",
    "sin2pi",
    "cos2pi",
]
