"""Compiled stochastic Heun integrator for the macrospin LLG-Slonczewski equation.

The equation is integrated in the explicit (Landau-Lifshitz) form

    dm/dt = -g [m x H + alpha m x (m x H)] + c [alpha m x I_s - m x (m x I_s)]

with g = gamma / (1 + alpha^2) and c = 1 / (q N_s (1 + alpha^2)).  The thermal
field is held constant over a step and enters H in both predictor and
corrector, which keeps the scheme Stratonovich-consistent.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _field(mx, my, mz, ex, ey, ez, hk, dx, dy, dz, hx, hy, hz):
    proj = hk * (mx * ex + my * ey + mz * ez)
    return (proj * ex - dx * mx + hx,
            proj * ey - dy * my + hy,
            proj * ez - dz * mz + hz)


@njit(cache=True, inline="always")
def _rhs(mx, my, mz, hx, hy, hz, sx, sy, sz, g, alpha, c):
    ax = my * hz - mz * hy
    ay = mz * hx - mx * hz
    az = mx * hy - my * hx
    bx = my * az - mz * ay
    by = mz * ax - mx * az
    bz = mx * ay - my * ax
    cx = my * sz - mz * sy
    cy = mz * sx - mx * sz
    cz = mx * sy - my * sx
    qx = my * cz - mz * cy
    qy = mz * cx - mx * cz
    qz = mx * cy - my * cx
    return (-g * (ax + alpha * bx) + c * (alpha * cx - qx),
            -g * (ay + alpha * by) + c * (alpha * cy - qy),
            -g * (az + alpha * bz) + c * (alpha * cz - qz))


@njit(cache=True, nogil=True)
def integrate(m, noise, sigma, amps, axis, easy, demag, hext, hk, g, alpha, c, dt,
              first_cross, step0, stop_on_cross):
    """Advance every row of ``m`` (n, 3) in place through ``len(amps)`` steps.

    ``noise`` is (n, steps, 3) standard normals, or (n, 0, 3) at zero temperature.
    ``amps`` holds the spin-current magnitude per step, applied along ``axis``.
    ``first_cross[i]`` records the first global step index at which m.easy < 0
    (it must be initialised to -1); with ``stop_on_cross`` a row stops there.
    """
    n = m.shape[0]
    steps = amps.shape[0]
    use_noise = noise.shape[1] > 0
    ex, ey, ez = easy[0], easy[1], easy[2]
    dx, dy, dz = demag[0], demag[1], demag[2]
    detect = first_cross.shape[0] > 0
    for i in range(n):
        if stop_on_cross and first_cross[i] >= 0:
            continue
        mx, my, mz = m[i, 0], m[i, 1], m[i, 2]
        for k in range(steps):
            hx, hy, hz = hext[0], hext[1], hext[2]
            if use_noise:
                hx += sigma * noise[i, k, 0]
                hy += sigma * noise[i, k, 1]
                hz += sigma * noise[i, k, 2]
            sx = amps[k] * axis[0]
            sy = amps[k] * axis[1]
            sz = amps[k] * axis[2]

            fx, fy, fz = _field(mx, my, mz, ex, ey, ez, hk, dx, dy, dz, hx, hy, hz)
            k1x, k1y, k1z = _rhs(mx, my, mz, fx, fy, fz, sx, sy, sz, g, alpha, c)
            px = mx + k1x * dt
            py = my + k1y * dt
            pz = mz + k1z * dt
            fx, fy, fz = _field(px, py, pz, ex, ey, ez, hk, dx, dy, dz, hx, hy, hz)
            k2x, k2y, k2z = _rhs(px, py, pz, fx, fy, fz, sx, sy, sz, g, alpha, c)
            mx += 0.5 * (k1x + k2x) * dt
            my += 0.5 * (k1y + k2y) * dt
            mz += 0.5 * (k1z + k2z) * dt
            norm = np.sqrt(mx * mx + my * my + mz * mz)
            mx /= norm
            my /= norm
            mz /= norm

            if detect and first_cross[i] < 0 and mx * ex + my * ey + mz * ez < 0.0:
                first_cross[i] = step0 + k
                if stop_on_cross:
                    break
        m[i, 0] = mx
        m[i, 1] = my
        m[i, 2] = mz
