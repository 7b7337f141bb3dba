"""Independent reference computations used as test oracles.

None of these import the package's numerical kernels; they re-derive the
expected behaviour from first principles (dense linear algebra, a generic
ODE solver, closed forms) so a shared bug cannot hide on both sides.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

MU0 = 4e-7 * math.pi
MU_B = 9.2740100783e-24
HBAR = 1.054571817e-34
Q = 1.602176634e-19
GAMMA = 2.0 * MU_B * MU0 / HBAR


# ---------------------------------------------------------------------------
# crossbar: brute-force nodal analysis


def kirchhoff_column_currents(G_plus, G_minus, G_s, dV, spikes):
    """Neuron currents of a dual-row crossbar by a full nodal solve.

    Every row line is an ideal source (+dV / -dV on spiking inputs, 0 V on
    idle ones); each column line is one unknown node tied to ground through
    G_s.  The system is assembled as a generic conductance matrix and
    solved with numpy, without using the closed-form 1/(1+gamma).
    """
    G_plus = np.asarray(G_plus, float)
    G_minus = np.asarray(G_minus, float)
    m, n = G_plus.shape
    s = np.asarray(spikes, float)
    rows_v = np.concatenate([dV * s, -dV * s])  # source node voltages
    G = np.vstack([G_plus, G_minus])  # (2m, n) source-to-column conductances
    gs = np.broadcast_to(np.asarray(G_s, float), (n,))
    # unknowns: column node voltages; KCL at each node
    Y = np.zeros((n, n))
    b = np.zeros(n)
    for j in range(n):
        for k in range(2 * m):
            Y[j, j] += G[k, j]
            b[j] += G[k, j] * rows_v[k]
        Y[j, j] += gs[j]
    v = np.linalg.solve(Y, b)
    return gs * v


# ---------------------------------------------------------------------------
# macrospin: Gilbert-form LLG through a generic adaptive ODE solver


def llg_gilbert_rhs(Ms, Ku2, alpha, easy, demag, n_spins, spin_axis, spin_amp):
    """dm/dt from the implicit Gilbert form solved algebraically for dm/dt.

    (1 + a^2) dm/dt = -g0 m x H - g0 a m x (m x H) + T + a m x T
    with the Slonczewski torque T = -(I_s / (q N)) m x (m x p).
    """
    easy = np.asarray(easy, float)
    demag = np.asarray(demag, float)
    p = np.asarray(spin_axis, float)
    hk = 2 * Ku2 / (MU0 * Ms)

    def f(t, m):
        m = m / np.linalg.norm(m)
        H = hk * (m @ easy) * easy - Ms * demag * m
        mxH = np.cross(m, H)
        T = -(spin_amp / (Q * n_spins)) * np.cross(m, np.cross(m, p))
        rhs = -GAMMA * mxH - GAMMA * alpha * np.cross(m, mxH) + T + alpha * np.cross(m, T)
        return rhs / (1 + alpha * alpha)

    return f


def reference_trajectory(p, m0, duration, spin_axis=(0, 0, -1), spin_amp=0.0, t_eval=None):
    n_spins = p.Ms * p.volume / MU_B
    f = llg_gilbert_rhs(p.Ms, p.Ku2, p.alpha, p.easy_axis, p.demag, n_spins, spin_axis, spin_amp)
    sol = solve_ivp(f, (0, duration), np.asarray(m0, float), method="DOP853",
                    rtol=1e-10, atol=1e-12, t_eval=t_eval)
    m = sol.y.T
    return sol.t, m / np.linalg.norm(m, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# statistics


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def within_sigma(k: int, n: int, p: float, n_sigma: float = 3.0) -> bool:
    return abs(k / n - p) <= n_sigma * binomial_sigma(p, n)


def pearson(a, b) -> float:
    a = np.asarray(a, float).ravel()
    b = np.asarray(b, float).ravel()
    return float(np.corrcoef(a, b)[0, 1])


# ---------------------------------------------------------------------------
# convolutional reference for topology/feedforward checks


def conv2d_valid(x, w):
    """x (C, H, W), w (O, C, k, k) -> (O, H-k+1, W-k+1) by explicit loops."""
    C, H, W = x.shape
    O, _, k, _ = w.shape
    out = np.zeros((O, H - k + 1, W - k + 1))
    for o in range(O):
        for r in range(H - k + 1):
            for c in range(W - k + 1):
                out[o, r, c] = np.sum(x[:, r:r + k, c:c + k] * w[o])
    return out
