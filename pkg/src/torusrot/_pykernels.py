"""Pure Python / numpy implementations of the hot loops.

These are the reference kernels; ``_ckernels`` (Cython) mirrors the
built-in family and staircase kernels and is preferred when compiled.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import EvaluationFault

# Fixed block size: the partition of seeds never depends on the worker count.
BLOCK = 4096

# sin(pi r) = r * P(r^2) on |r| <= 1/2, least-squares fit in relative error,
# max error 1.5 ulp. The compiled kernel evaluates the same Horner sequence.
SINPI_COEFFS = (
    3.141592653589793,
    -5.16771278004997,
    2.5501640398773455,
    -0.5992645293207921,
    0.08214588661112783,
    -0.00737043094570703,
    0.000466302805683863,
    -2.191535283115056e-05,
    7.952024771114935e-07,
    -2.2939806367692774e-08,
    5.248439361722456e-10,
)


def sinpi_reduced(r):
    t = r * r
    p = SINPI_COEFFS[10]
    for c in SINPI_COEFFS[9::-1]:
        p = p * t + c
    return r * p


def _sin2pi(x):
    u = 2.0 * x
    n = np.rint(u)
    s = sinpi_reduced(u - n)
    return np.where(np.fmod(n, 2.0) != 0.0, -s, s)


def _reduce(v, lat):
    # second floor catches v - floor(v) rounding up to 1.0
    k = np.floor(v)
    v = v - k
    g = np.floor(v)
    lat += k + g
    return v - g


def _shear_block(bases, checkpoints, a, b, c1, c2):
    x0 = bases[:, 0].copy()
    y0 = bases[:, 1].copy()
    x, y = x0.copy(), y0.copy()
    lx = np.zeros_like(x)
    ly = np.zeros_like(y)
    out = np.empty((len(checkpoints), len(x0), 2))
    k = 0
    for step in range(1, int(checkpoints[-1]) + 1):
        x = _reduce(x + (a * _sin2pi(y) + c1), lx)
        y = _reduce(y + (b * _sin2pi(x) + c2), ly)
        while k < len(checkpoints) and checkpoints[k] == step:
            out[k, :, 0] = (x - x0) + lx
            out[k, :, 1] = (y - y0) + ly
            k += 1
    return out


def _lift_block(lift, bases, checkpoints):
    x0 = bases[:, 0].copy()
    y0 = bases[:, 1].copy()
    x, y = x0.copy(), y0.copy()
    lx = np.zeros_like(x)
    ly = np.zeros_like(y)
    out = np.empty((len(checkpoints), len(x0), 2))
    k = 0
    for step in range(1, int(checkpoints[-1]) + 1):
        try:
            fx, fy = lift(x, y)
        except EvaluationFault as exc:
            hit = np.flatnonzero((x == exc.point[0]) & (y == exc.point[1]))
            i = int(hit[0]) if len(hit) else 0
            raise EvaluationFault(
                f"orbit evaluation failed at step {step}",
                point=(float(x0[i]), float(y0[i])),
                location=exc.location,
            ) from exc
        x = _reduce(np.array(fx, dtype=float), lx)
        y = _reduce(np.array(fy, dtype=float), ly)
        while k < len(checkpoints) and checkpoints[k] == step:
            out[k, :, 0] = (x - x0) + lx
            out[k, :, 1] = (y - y0) + ly
            k += 1
    return out


def _blocked(fn, bases, checkpoints, threads):
    n = len(bases)
    chunks = [bases[i : i + BLOCK] for i in range(0, n, BLOCK)]
    if threads is None or threads <= 1 or len(chunks) == 1:
        parts = [fn(c, checkpoints) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: fn(c, checkpoints), chunks))
    return np.concatenate(parts, axis=1)


def shear_orbits(bases, checkpoints, a, b, c1, c2, threads=1):
    """Lattice-accumulated displacements of the two-shear family.

    ``bases`` is an ``(N, 2)`` array in ``[0, 1)^2``; ``checkpoints`` sorted
    positive step counts. Returns ``(K, N, 2)``.
    """
    return _blocked(
        lambda c, cp: _shear_block(c, cp, a, b, c1, c2), bases, checkpoints, threads
    )


def lift_orbits(lift, bases, checkpoints, threads=1):
    """Same as :func:`shear_orbits` for an arbitrary vectorized lift."""
    return _blocked(lambda c, cp: _lift_block(lift, c, cp), bases, checkpoints, threads)


def staircase_float(dh, dv, max_steps):
    """Greedy staircase on the signed distance ``delta``.

    ``dh``/``dv`` are the distance increments of a horizontal/vertical unit
    step. Ties go to the horizontal step. Returns ``(steps, deltas)`` with
    steps coded 0 for horizontal and 1 for vertical.
    """
    steps = np.empty(max_steps, dtype=np.uint8)
    deltas = np.empty(max_steps)
    d = 0.0
    for i in range(max_steps):
        h = d + dh
        v = d + dv
        if abs(h) <= abs(v):
            d = h
            steps[i] = 0
        else:
            d = v
            steps[i] = 1
        deltas[i] = d
    return steps, deltas
