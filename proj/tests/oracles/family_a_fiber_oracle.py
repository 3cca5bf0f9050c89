"""Reference values of delta_t for Family A, f_t(z, w) = (z^2, w^2 + t).

The base coordinate does not enter the fiber map, so the inverse-branch
tree over a base point is d' copies of the one-variable tree of w^2 + t.
The partition sums are built directly with numpy from the continued
period-3 points, deep enough (n = 11) that the result is accurate to
about 1e-8.  Run: python3 family_a_fiber_oracle.py
"""
import math

import numpy as np
from scipy.optimize import brentq


def periodic_points(t, n):
    """Repelling period-n points of w^2 + t continued from the roots of unity."""
    m = 2**n - 1
    w = np.exp(2j * np.pi * np.arange(m) / m)
    steps = max(5, math.ceil(abs(t) / 0.01))
    cur = 0.0
    for k in range(1, steps + 1):
        nxt = t * k / steps
        x, der, dt = orbit(w, cur, n)
        w = w - (nxt - cur) * dt / (der - 1)
        cur = nxt
        for _ in range(40):
            x, der, _ = orbit(w, cur, n)
            step = (x - w) / (der - 1)
            w = w - step
            if np.max(np.abs(step)) < 1e-15:
                break
    return w


def orbit(w, t, n):
    x = w.copy()
    der = np.ones_like(w)
    dt = np.zeros_like(w)
    for _ in range(n):
        dt = 2 * x * dt + 1
        der = der * 2 * x
        x = x * x + t
    return x, der, dt


def delta(t, depth=11, k=3, d_prime=2):
    pts = periodic_points(t, k)
    acc = np.zeros(len(pts))
    levels = []
    for _ in range(depth):
        r = np.sqrt(pts - t)
        pts = np.concatenate([r, -r])
        acc = np.concatenate([acc, acc]) + np.log(np.abs(2 * pts))
        levels.append(acc.copy())

    def pressure(s):
        lz = [math.log(np.exp(-s * (lv - lv.min())).sum()) - s * lv.min() for lv in levels[-2:]]
        return lz[1] - lz[0] + math.log(d_prime) * (1 - s)

    return brentq(pressure, 0.5, 1.5, xtol=1e-14)


if __name__ == "__main__":
    for t in [0.02, 0.04, 0.05, 0.06, 0.08, 0.1, 0.08j, -0.08]:
        print(f"delta({t}) = {delta(t):.10f}")
