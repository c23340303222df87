"""Pure NumPy implementations of the hot evaluation kernels.

Vectorized over the batch axis.  Kind codes: 0 euclidean, 1 hyperbolic,
2 flat torus.  All arrays are float64; direction tuples have shape
(B, n, m) with m the ambient dimension.
"""

import math

import numpy as np


def _mink(u, v):
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def phi_endpoints(kind, a, periods, x, dirs, r):
    """Endpoints of the piecewise-geodesic path for each direction tuple."""
    dirs = np.asarray(dirs, dtype=float)
    B, n, m = dirs.shape
    if kind == 0:
        return x[None, :] + r * dirs.sum(axis=1)
    if kind == 2:
        return np.mod(x[None, :] + r * dirs.sum(axis=1), periods[None, :])
    ch = math.cosh(a * r)
    sh = math.sinh(a * r)
    z = np.broadcast_to(x, (B, m)).copy()
    D = dirs.copy()
    for k in range(n):
        dk = D[:, k, :]
        znew = ch * z + (sh / a) * dk
        q = _mink(znew, znew)
        znew /= (a * np.sqrt(-q))[:, None]
        if k + 1 < n:
            shift = (a * sh) * z + (ch - 1.0) * dk
            rest = D[:, k + 1:, :]
            c = _mink(rest, dk[:, None, :])
            rest = rest + c[..., None] * shift[:, None, :]
            cc = _mink(rest, znew[:, None, :])
            rest += (a * a) * cc[..., None] * znew[:, None, :]
            nn = _mink(rest, rest)
            rest /= np.sqrt(nn)[..., None]
            D[:, k + 1:, :] = rest
        z = znew
    return z


def _base_transvection(a, x, m):
    """Lorentz transvection carrying the model origin e0/a to ``x``.

    Reductions run left to right and the two rank-one updates are summed
    before touching the identity, so the result matches the compiled kernel
    bit for bit.
    """
    T = np.eye(m)
    s2 = x[1] * x[1]
    for i in range(2, m):
        s2 = s2 + x[i] * x[i]
    s = float(np.sqrt(s2))
    if s < 1e-300:
        return T
    sh0 = a * s
    ch0 = a * x[0]
    e0 = np.zeros(m)
    e0[0] = 1.0
    vhat = np.zeros(m)
    vhat[1:] = x[1:] / s
    t0 = (ch0 - 1.0) * e0 + sh0 * vhat
    t1 = (ch0 - 1.0) * vhat + sh0 * e0
    T += np.outer(e0, t0) + np.outer(vhat, t1)
    return T


def walk_points(kind, a, periods, x, draws, r):
    """Random-walk trajectories driven by pre-drawn ambient normals.

    Returns shape (B, n + 1, m); row 0 is the start point.

    Hyperbolic walks accumulate a Lorentz transvection per step instead of
    projecting draws at the moving point: far from the coordinate origin the
    ambient tangent projection cancels catastrophically (error ~ cosh^2 of
    the distance), while the group composition keeps full relative accuracy
    at any depth.  Each draw's direction is its spatial part read in the
    isometry-transported frame, so the step law is the uniform sphere law.
    """
    draws = np.asarray(draws, dtype=float)
    B, n, m = draws.shape
    out = np.empty((B, n + 1, m))
    out[:, 0, :] = x
    if kind != 1:
        z = np.broadcast_to(x, (B, m)).copy()
        for k in range(n):
            g = draws[:, k, :]
            n2 = g[:, 0] * g[:, 0]
            for i in range(1, m):
                n2 = n2 + g[:, i] * g[:, i]
            if np.any(n2 < 1e-24):
                raise RuntimeError("degenerate tangent draw (all components ~ 0)")
            u = g / np.sqrt(n2)[:, None]
            if kind == 0:
                z = z + r * u
            else:
                z = np.mod(z + r * u, periods[None, :])
            out[:, k + 1, :] = z
        return out
    # math.cosh/math.sinh call the platform libm directly; np.cosh/np.sinh
    # can differ from libm by one ulp at some arguments, which would break
    # bit parity with the compiled kernel
    ch = math.cosh(a * r)
    sh = math.sinh(a * r)
    e0 = np.zeros(m)
    e0[0] = 1.0
    Bm = np.broadcast_to(_base_transvection(a, x, m), (B, m, m)).copy()
    for k in range(n):
        gsp = draws[:, k, :].copy()
        gsp[:, 0] = 0.0
        n2 = gsp[:, 1] * gsp[:, 1]
        for i in range(2, m):
            n2 = n2 + gsp[:, i] * gsp[:, i]
        if np.any(n2 < 1e-24):
            raise RuntimeError("degenerate tangent draw (all components ~ 0)")
        vhat = gsp / np.sqrt(n2)[:, None]
        c0 = Bm[:, :, 0].copy()
        # left-to-right contraction; einsum may reassociate for m >= 4 and
        # break bit parity with the compiled kernel
        bv = Bm[:, :, 1] * vhat[:, 1][:, None]
        for j in range(2, m):
            bv = bv + Bm[:, :, j] * vhat[:, j][:, None]
        t0 = (ch - 1.0) * e0[None, :] + sh * vhat
        t1 = (ch - 1.0) * vhat + sh * e0[None, :]
        Bm += c0[:, :, None] * t0[:, None, :] + bv[:, :, None] * t1[:, None, :]
        out[:, k + 1, :] = Bm[:, :, 0] / a
    return out
