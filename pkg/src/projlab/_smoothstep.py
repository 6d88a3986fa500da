"""Polynomial smoothsteps: C^2 and C^4 ramps used for tapers and radial cutoffs."""

import numpy as np


def smoothstep_c2(u):
    """Evaluate s(u) = 6u^5 - 15u^4 + 10u^3 clamped to [0, 1], with derivatives.

    s is monotone from s(0)=0 to s(1)=1 and has vanishing first and second
    derivatives at both ends, so piecewise glues made from it are C^2.
    Returns (s, ds, dds) as arrays broadcast like ``u``; derivatives are 0
    outside [0, 1].
    """
    u = np.asarray(u, dtype=float)
    t = np.clip(u, 0.0, 1.0)
    s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    ds = 30.0 * t * t * (t - 1.0) ** 2
    dds = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
    inside = (u > 0.0) & (u < 1.0)
    ds = np.where(inside, ds, 0.0)
    dds = np.where(inside, dds, 0.0)
    return s, ds, dds


def smoothstep_c4(u):
    """Ninth-order smoothstep: derivatives through fourth order vanish at 0 and 1.

    The extra smoothness keeps sine-coefficient tails of composed functions
    decaying fast, which matters for spectral-Galerkin convergence.
    """
    u = np.asarray(u, dtype=float)
    t = np.clip(u, 0.0, 1.0)
    s = t**5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))
    ds = 630.0 * t**4 * (t - 1.0) ** 4
    dds = 2520.0 * t**3 * (t - 1.0) ** 3 * (2.0 * t - 1.0)
    inside = (u > 0.0) & (u < 1.0)
    ds = np.where(inside, ds, 0.0)
    dds = np.where(inside, dds, 0.0)
    return s, ds, dds
