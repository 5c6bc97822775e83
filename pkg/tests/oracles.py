"""Independent reference computations shared by several test modules."""
import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo, hi, tol=1e-12, max_iter=500):
    """Golden-section maximizer of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def golden_max_log(f, lo, hi):
    """Golden section on a log scale, then a linear polish around the peak."""
    x = math.exp(golden_max(lambda u: f(math.exp(u)), math.log(lo), math.log(hi), tol=1e-13))
    return golden_max(f, x * (1 - 1e-3), x * (1 + 1e-3), tol=1e-15)


def covert_grid_min(c, budget, power_total, steps):
    """Brute-force minimum of sum 1/p over both constraints.

    The objective falls as every power grows, so along each direction ``w``
    of the probability simplex the best point is ``s w`` with the largest
    feasible ``s``. The grid covers the simplex with ``steps`` divisions per
    axis, then a finer local grid around the best point.
    """
    c = np.asarray(c, dtype=float)
    n = c.size

    def best_on(points):
        w = points / points.sum(axis=1, keepdims=True)
        s = np.minimum(power_total / w.sum(axis=1), np.sqrt(budget / (w * w * c).sum(axis=1)))
        p = s[:, None] * w
        obj = (1.0 / p).sum(axis=1)
        i = int(np.argmin(obj))
        return obj[i], w[i]

    axes = np.meshgrid(*[np.arange(1, steps) for _ in range(n - 1)], indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=1).astype(float)
    pts = pts[pts.sum(axis=1) < steps]
    pts = np.column_stack([pts, steps - pts.sum(axis=1)]) / steps
    obj, w = best_on(pts)
    width = 1.0 / steps
    for _ in range(4):
        offs = np.meshgrid(*[np.linspace(-width, width, 21) for _ in range(n - 1)], indexing="ij")
        delta = np.stack([o.ravel() for o in offs], axis=1)
        head = w[: n - 1] + delta
        tail = 1.0 - head.sum(axis=1)
        local = np.column_stack([head, tail])
        local = local[np.all(local > 0, axis=1)]
        o2, w2 = best_on(local)
        if o2 < obj:
            obj, w = o2, w2
        width /= 10.0
    return obj
