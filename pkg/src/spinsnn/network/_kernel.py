"""numba inner loop of the single-layer STDP network (one chunk of images)."""

from __future__ import annotations

import math

import numba as nb
import numpy as np

# layout of the float parameter vector
(P_DV, P_DG, P_GAP, P_GS, P_MOB, P_LEAK, P_DT, P_AP, P_TAUP, P_WINP, P_AM, P_TAUM, P_WINM,
 P_ASIL, P_PMAX, P_TINC, P_TDEC, P_TFLOOR, P_INHIB, P_WTA, P_PROB, P_ECOEF, P_TW, P_NONIDEAL,
 N_PARAMS) = range(25)

# layout of the accumulator vector
(S_READ_EVENTS, S_READ_J, S_DW_WRITE, S_DW_RESET, S_PROG_EVENTS, S_PROG_J, S_POT, S_DEP,
 N_STATS) = range(9)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@nb.njit(cache=True)
def _splitmix(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True)
def _prog_energy(dw, ecoef, egrid, etable):
    # analog pulse: E = ecoef dw^2; binary pulse: interpolate the characterised table
    if egrid.size == 0:
        return ecoef * dw * dw
    a = abs(dw)
    if a <= egrid[0]:
        return etable[0]
    n = egrid.size
    if a >= egrid[n - 1]:
        return etable[n - 1]
    k = np.searchsorted(egrid, a) - 1
    f = (a - egrid[k]) / (egrid[k + 1] - egrid[k])
    return etable[k] + f * (etable[k + 1] - etable[k])


@nb.njit(cache=True)
def _depress(W, k, i, j, dw, prob, pmax, rs):
    old = W[k, i, j]
    if prob:
        dwe = min(dw, pmax)
        rs, u = _splitmix(rs)
        if u < dwe:
            W[k, i, j] = 0.0
    else:
        dwe = dw
        W[k, i, j] = max(old - dw, 0.0)
    return W[k, i, j] - old, dwe, rs


@nb.njit(cache=True)
def run_chunk(W, theta, colsum, spikes, learn, prm, seeds, egrid, etable, counts, stats):
    """Present ``spikes[b]`` (timesteps x inputs) for every image b of the chunk.

    ``W`` stacks K crossbars (K, inputs, neurons) that drive a shared neuron
    node; ``prm[k]`` holds the drive and plasticity constants of array k
    (neuron and timing constants are read from row 0).  W, theta, colsum are
    updated in place when ``learn``; ``counts[b, j]`` receives output spikes
    and ``stats[k]`` the energy-event accumulators of array k.
    """
    n_img, T, n_in = spikes.shape
    K, _, n_out = W.shape
    x = np.empty(n_out)
    last_pre = np.empty(n_in, dtype=np.int64)
    last_post = np.empty(n_out, dtype=np.int64)
    A = np.empty((K, n_out))
    fired = np.zeros(n_out, dtype=np.bool_)
    active = np.empty(n_in, dtype=np.int64)
    p0 = prm[0]
    dG = p0[P_DG]
    gap = p0[P_GAP]
    gs = p0[P_GS]
    dt = p0[P_DT]
    wta = p0[P_WTA] > 0.5
    nonideal = p0[P_NONIDEAL] > 0.5
    tw = p0[P_TW]
    for b in range(n_img):
        rs = np.uint64(seeds[b])
        x[:] = 0.0
        last_pre[:] = -1
        last_post[:] = -1
        for t in range(T):
            na = 0
            for i in range(n_in):
                if spikes[b, t, i]:
                    active[na] = i
                    na += 1
            # pre-after-post depression: first pre-spike following each post-spike
            if learn:
                for kk in range(K):
                    pk = prm[kk]
                    if pk[P_AM] <= 0.0:
                        continue
                    for a in range(na):
                        i = active[a]
                        for j in range(n_out):
                            lp = last_post[j]
                            if lp >= 0 and lp < t and last_pre[i] < lp and (t - lp) * dt <= pk[P_WINM]:
                                dw = pk[P_AM] * math.exp(-(t - lp) * dt / pk[P_TAUM])
                                d, dwe, rs = _depress(W, kk, i, j, dw, pk[P_PROB] > 0.5, pk[P_PMAX], rs)
                                colsum[kk, j] += d
                                stats[kk, S_PROG_EVENTS] += 1.0
                                stats[kk, S_PROG_J] += _prog_energy(dwe, pk[P_ECOEF], egrid, etable)
                                stats[kk, S_DEP] += 1.0
            for a in range(na):
                last_pre[active[a]] = t
            # column currents into the shared neuron node
            for kk in range(K):
                for j in range(n_out):
                    A[kk, j] = 0.0
                for a in range(na):
                    i = active[a]
                    for j in range(n_out):
                        A[kk, j] += W[kk, i, j]
                if na > 0:
                    stats[kk, S_READ_EVENTS] += 2.0 * na * n_out
            if na > 0:
                stats[0, S_DW_WRITE] += n_out
            for j in range(n_out):
                g_tot = 0.0
                num = 0.0
                for kk in range(K):
                    g_tot += 2.0 * n_in * gap + dG * colsum[kk, j]
                    num += prm[kk, P_DV] * dG * A[kk, j]
                gamma = g_tot / gs if nonideal else 0.0
                cur = num / (1.0 + gamma)
                vn = cur / gs if nonideal else 0.0
                if na > 0:
                    for kk in range(K):
                        dV = prm[kk, P_DV]
                        g_act = na * gap + dG * A[kk, j]
                        g_idle = 2.0 * (n_in - na) * gap + dG * (colsum[kk, j] - A[kk, j])
                        stats[kk, S_READ_J] += tw * (g_act * (dV - vn) ** 2 + na * gap * (dV + vn) ** 2
                                                     + g_idle * vn * vn)
                x[j] = max(x[j] + (p0[P_MOB] * cur - p0[P_LEAK]) / theta[j], 0.0)
            # threshold crossing; with inhibition only the furthest wall fires
            win = -1
            for j in range(n_out):
                fired[j] = False
                if x[j] >= 1.0 - 1e-9 and (win < 0 or x[j] > x[win]):
                    win = j
            if win >= 0:
                for j in range(n_out):
                    fire = (j == win) if wta else (x[j] >= 1.0 - 1e-9)
                    if not fire:
                        if wta:
                            x[j] = max(x[j] - p0[P_INHIB], 0.0)
                        continue
                    x[j] = 0.0
                    fired[j] = True
                    counts[b, j] += 1
                    stats[0, S_DW_RESET] += 1.0
                    if not learn:
                        continue
                    last_post[j] = t
                    for kk in range(K):
                        pk = prm[kk]
                        prob = pk[P_PROB] > 0.5
                        s = 0.0
                        for i in range(n_in):
                            lp = last_pre[i]
                            if lp >= 0 and (t - lp) * dt <= pk[P_WINP]:
                                dw = pk[P_AP] * math.exp(-(t - lp) * dt / pk[P_TAUP])
                                if prob:
                                    dwe = min(dw, pk[P_PMAX])
                                    rs, u = _splitmix(rs)
                                    if u < dwe:
                                        W[kk, i, j] = 1.0
                                else:
                                    dwe = dw
                                    W[kk, i, j] = min(W[kk, i, j] + dw, 1.0)
                                stats[kk, S_POT] += 1.0
                            elif pk[P_ASIL] > 0.0:
                                d, dwe, rs = _depress(W, kk, i, j, pk[P_ASIL], prob, pk[P_PMAX], rs)
                                stats[kk, S_DEP] += 1.0
                            else:
                                s += W[kk, i, j]
                                continue
                            stats[kk, S_PROG_EVENTS] += 1.0
                            stats[kk, S_PROG_J] += _prog_energy(dwe, pk[P_ECOEF], egrid, etable)
                            s += W[kk, i, j]
                        colsum[kk, j] = s
            if learn:
                for j in range(n_out):
                    theta[j] = max(p0[P_TFLOOR], theta[j] * p0[P_TDEC] + p0[P_TINC] * fired[j])
