"""Shared C-infinity bump primitives.

``bump(u) = exp(1/(u - 1))`` for ``u < 1`` and 0 otherwise, as a function of
``u = |z|^2``.  It vanishes with all derivatives at ``u = 1``, which makes
every kernel and test function built from it exactly compactly supported.
"""

from __future__ import annotations

import numpy as np


def _masked(u):
    u = np.asarray(u, dtype=float)
    m = u < 1.0
    t = np.where(m, u - 1.0, -1.0)  # placeholder -1 avoids overflow in exp
    return m, t


def bump(u):
    m, t = _masked(u)
    return np.where(m, np.exp(1.0 / t), 0.0)


def bump_d1(u):
    m, t = _masked(u)
    return np.where(m, np.exp(1.0 / t) * (-1.0 / t ** 2), 0.0)


def bump_d2(u):
    m, t = _masked(u)
    return np.where(m, np.exp(1.0 / t) * (1.0 / t ** 4 + 2.0 / t ** 3), 0.0)


def bump_jet(u, max_deriv):
    """(bump, bump', bump'') with one exponential evaluation; None past max_deriv."""
    m, t = _masked(u)
    e = np.exp(1.0 / t)
    e[~m] = 0.0
    if max_deriv == 0:
        return e, None, None
    inv = 1.0 / t
    inv2 = inv * inv
    d1 = -e * inv2
    if max_deriv == 1:
        return e, d1, None
    return e, d1, e * (inv2 * inv2 + 2.0 * inv2 * inv)


def smoothstep(t):
    """C-infinity transition: 0 for t <= 0, 1 for t >= 1, exp-based between."""
    t = np.asarray(t, dtype=float)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    ts = np.where(mid, t, 0.5)
    f = np.exp(-1.0 / ts)
    g = np.exp(-1.0 / (1.0 - ts))
    out = f / (f + g)
    return np.where(hi, 1.0, np.where(lo, 0.0, out))


def smoothstep_d1(t):
    """Derivative of :func:`smoothstep` (0 outside the open unit interval)."""
    t = np.asarray(t, dtype=float)
    mid = (t > 0.0) & (t < 1.0)
    ts = np.where(mid, t, 0.5)
    f = np.exp(-1.0 / ts)
    g = np.exp(-1.0 / (1.0 - ts))
    d = f * g * (1.0 / ts ** 2 + 1.0 / (1.0 - ts) ** 2) / (f + g) ** 2
    return np.where(mid, d, 0.0)
