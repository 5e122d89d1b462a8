"""Wirtinger derivatives by central differences with one Richardson level.

For ``z_k = x_k + i y_k``::

    d/dz_k    = (d/dx_k - i d/dy_k) / 2
    d/dzbar_k = (d/dx_k + i d/dy_k) / 2
    d^2/dz_k dzbar_l = (f_xx + i f_xy - i f_yx + f_yy) / 4   (x from k, y from l)

The function ``f`` must map a batch of points of shape ``(B, n)`` to values of
shape ``(B, *S)``; every stencil point is evaluated in a single call. The step
``h`` is a scalar or one step per complex coordinate (shared by its real and
imaginary parts).
"""

import numpy as np


def _real_basis(n):
    # real directions e_{x_1}, ..., e_{x_n}, e_{y_1}, ..., e_{y_n} in C^n
    return np.concatenate([np.eye(n), 1j * np.eye(n)]).astype(complex)


def _real_steps(h, n):
    h = np.broadcast_to(np.asarray(h, dtype=float), (n,))
    return np.concatenate([h, h])


def _richardson(coarse, fine, order=2):
    k = 2.0**order
    return (k * fine - coarse) / (k - 1.0)


def first_derivatives(f, z, h):
    """Return ``(dz, dzbar)`` with the derivative index appended last."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    steps = _real_steps(h, n)
    basis = _real_basis(n) * steps[:, None]
    pts = [z + basis, z - basis, z + basis / 2, z - basis / 2]
    vals = f(np.concatenate(pts))
    two_n = 2 * n
    vals = vals.reshape((4, two_n) + vals.shape[1:])
    scale = steps.reshape((two_n,) + (1,) * (vals.ndim - 2))
    d_h = (vals[0] - vals[1]) / (2 * scale)
    d_h2 = (vals[2] - vals[3]) / scale
    d = _richardson(d_h, d_h2)
    dx, dy = d[:n], d[n:]
    dz = 0.5 * (dx - 1j * dy)
    dzb = 0.5 * (dx + 1j * dy)
    return np.moveaxis(dz, 0, -1), np.moveaxis(dzb, 0, -1)


def _hessian_stencil(z, steps):
    n = z.shape[0]
    basis = _real_basis(n) * steps[:, None]
    two_n = 2 * n
    pts = [z[None, :]]
    for a in range(two_n):
        pts.append((z + basis[a])[None, :])
        pts.append((z - basis[a])[None, :])
    for a in range(two_n):
        for b in range(a + 1, two_n):
            ea, eb = basis[a], basis[b]
            pts.append(np.stack([z + ea + eb, z + ea - eb, z - ea + eb, z - ea - eb]))
    return np.concatenate(pts)


def _hessian_from_values(vals, two_n, steps):
    f0 = vals[0]
    hess = np.empty((two_n, two_n) + f0.shape, dtype=complex)
    pos = 1
    for a in range(two_n):
        fp, fm = vals[pos], vals[pos + 1]
        hess[a, a] = (fp - 2 * f0 + fm) / (steps[a] * steps[a])
        pos += 2
    for a in range(two_n):
        for b in range(a + 1, two_n):
            fpp, fpm, fmp, fmm = vals[pos:pos + 4]
            hess[a, b] = hess[b, a] = (fpp - fpm - fmp + fmm) / (4 * steps[a] * steps[b])
            pos += 4
    return hess


def mixed_second(f, z, h):
    """``d^2 f / dz_k dzbar_l`` with indices ``(k, l)`` appended last."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    two_n = 2 * n
    steps = _real_steps(h, n)
    s1 = _hessian_stencil(z, steps)
    s2 = _hessian_stencil(z, steps / 2)
    vals = f(np.concatenate([s1, s2]))
    half = s1.shape[0]
    hess = _richardson(_hessian_from_values(vals[:half], two_n, steps),
                       _hessian_from_values(vals[half:], two_n, steps / 2))
    xx = hess[:n, :n]
    xy = hess[:n, n:]
    yx = hess[n:, :n]
    yy = hess[n:, n:]
    dd = 0.25 * (xx + 1j * xy - 1j * yx + yy)
    return np.moveaxis(np.moveaxis(dd, 0, -1), 0, -1)
