"""Compiled inner loops: path recursions and compensated accumulations.

All kernels iterate modes outer, time inner, with plain IEEE-754 arithmetic
(no fastmath), so results are bit-reproducible and independent of threading.
The Kahan reductions keep the sufficient statistics accurate over the
~N*M ~ 1e6 terms of a production trajectory.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def euler_paths(u, v, dw, lam_k2, sigma, dt):
    """Fill (N, M+1) state arrays with the explicit update.

    u[k, i+1] = u[k, i] + v[k, i] dt
    v[k, i+1] = v[k, i] - lam k^2 u[k, i] dt + sigma dw[k, i]
    """
    n, m = dw.shape
    for k in range(n):
        for i in range(m):
            u[k, i + 1] = u[k, i] + v[k, i] * dt
            v[k, i + 1] = v[k, i] - lam_k2[k] * u[k, i] * dt + sigma * dw[k, i]


@njit(cache=True)
def exact_paths(u, v, z, cos_t, sin_over_ell, ell_sin, l11, l21, l22):
    """Advance each mode by its exact Gaussian transition.

    Homogeneous part is the rotation (u, v) -> (u cos + v sin/ell,
    -u ell sin + v cos); the noise is the Cholesky image of two standard
    normals per step.
    """
    n = u.shape[0]
    m = z.shape[1]
    for k in range(n):
        for i in range(m):
            nu = l11[k] * z[k, i, 0]
            nv = l21[k] * z[k, i, 0] + l22[k] * z[k, i, 1]
            u[k, i + 1] = cos_t[k] * u[k, i] + sin_over_ell[k] * v[k, i] + nu
            v[k, i + 1] = -ell_sin[k] * u[k, i] + cos_t[k] * v[k, i] + nv


@njit(cache=True)
def exact_paths_with_increments(u, v, dw, z, cos_t, sin_over_ell, ell_sin, chol):
    """Exact transition jointly sampling the step's Brownian increment.

    chol rows hold the lower Cholesky factor (l11, l21, l22, l31, l32, l33)
    of the (state-noise, state-noise, increment) covariance; three standard
    normals are consumed per step.
    """
    n = u.shape[0]
    m = z.shape[1]
    for k in range(n):
        for i in range(m):
            z0 = z[k, i, 0]
            z1 = z[k, i, 1]
            z2 = z[k, i, 2]
            nu = chol[k, 0] * z0
            nv = chol[k, 1] * z0 + chol[k, 2] * z1
            dw[k, i] = chol[k, 3] * z0 + chol[k, 4] * z1 + chol[k, 5] * z2
            u[k, i + 1] = cos_t[k] * u[k, i] + sin_over_ell[k] * v[k, i] + nu
            v[k, i + 1] = -ell_sin[k] * u[k, i] + cos_t[k] * v[k, i] + nv


@njit(cache=True)
def kahan_rows_sq(x):
    """Per-row Kahan-compensated sum of squares."""
    n, m = x.shape
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        s = 0.0
        c = 0.0
        for i in range(m):
            y = x[k, i] * x[k, i] - c
            t = s + y
            c = (t - s) - y
            s = t
        out[k] = s
    return out


@njit(cache=True)
def kahan_rows_prod(a, b):
    """Per-row Kahan-compensated sum of elementwise products."""
    n, m = a.shape
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        s = 0.0
        c = 0.0
        for i in range(m):
            y = a[k, i] * b[k, i] - c
            t = s + y
            c = (t - s) - y
            s = t
        out[k] = s
    return out
