"""Compiled inner loops shared by every module.

Every evaluation that must agree bit-for-bit (single orbits, grid orbits,
seed polishing, scalar ``g`` calls) goes through the functions here.  The
batched kernel performs exactly the same IEEE operations per orbit as the
scalar ones; nothing is compiled with fastmath, so no contraction occurs.
"""

import math

import numpy as np
from numba import njit

KIND_COS = 0
KIND_SAWTOOTH = 1
KIND_SERIES = 2
KIND_ODD_SERIES = 3

TWO_PI = 2.0 * math.pi
SEAM_SNAP = 1e-15
CHUNK = 256

_C = [(-1) ** k / math.factorial(2 * k) for k in range(9)]
_S = [(-1) ** k / math.factorial(2 * k + 1) for k in range(8)]
C0, C1, C2, C3, C4, C5, C6, C7, C8 = _C
S0, S1, S2, S3, S4, S5, S6, S7 = _S


@njit(cache=True, inline="always")
def frac(x):
    r = x - np.floor(x)
    return 0.0 if r >= 1.0 - SEAM_SNAP else r


@njit(cache=True, inline="always")
def two_sum(a, b):
    s = a + b
    bp = s - a
    ap = s - bp
    return s, (a - ap) + (b - bp)


@njit(cache=True, inline="always")
def cos2pi(u):
    # branch-free so the batched loops vectorize; |error| < 1e-15
    r = u - np.floor(u + 0.5)
    t = abs(r)
    flip = t > 0.25
    t = 0.5 - t if flip else t
    use_sin = t > 0.125
    w = 0.25 - t if use_sin else t
    z = TWO_PI * w
    z2 = z * z
    cc = C0 + z2 * (C1 + z2 * (C2 + z2 * (C3 + z2 * (C4 + z2 * (C5 + z2 * (C6 + z2 * (C7 + z2 * C8)))))))
    ss = z * (S0 + z2 * (S1 + z2 * (S2 + z2 * (S3 + z2 * (S4 + z2 * (S5 + z2 * (S6 + z2 * S7)))))))
    v = ss if use_sin else cc
    return -v if flip else v


@njit(cache=True)
def g_eval(kind, coeffs, x):
    if kind == KIND_SAWTOOTH:
        return abs(frac(x) - 0.5) - 0.25
    # cosines are even; folding the sign first makes g(-x) == g(x) bit for bit
    c = cos2pi(abs(x))
    if kind == KIND_COS:
        return c
    b1 = 0.0
    b2 = 0.0
    if kind == KIND_ODD_SERIES:
        # coeffs[k] multiplies T_{2k+1}(c); three-term recurrence in T_2(c)
        tt = 2.0 * (2.0 * c * c - 1.0)
        for k in range(coeffs.shape[0] - 1, -1, -1):
            b0 = coeffs[k] + tt * b1 - b2
            b2 = b1
            b1 = b0
        return c * (b1 - b2)
    # Clenshaw for sum_{n>=1} a_n T_n(c), coeffs[0] = a_1
    tt = 2.0 * c
    for k in range(coeffs.shape[0] - 1, -1, -1):
        b0 = coeffs[k] + tt * b1 - b2
        b2 = b1
        b1 = b0
    return c * b1 - b2


@njit(cache=True)
def g_eval_array(kind, coeffs, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = g_eval(kind, coeffs, xs[i])
    return out


@njit(cache=True, inline="always")
def step_dy(kind, coeffs, a, b, x):
    return a * g_eval(kind, coeffs, x) + b


@njit(cache=True)
def dg_eval(kind, full_coeffs, x):
    """Derivative of g.  Sawtooth kinks return the two-sided secant (0)."""
    u = frac(x)
    if kind == KIND_COS:
        return -TWO_PI * math.sin(TWO_PI * u)
    if kind == KIND_SAWTOOTH:
        if u == 0.0 or u == 0.5:
            h = 1e-7
            return ((abs(frac(u + h) - 0.5) - 0.25) - (abs(frac(u - h) - 0.5) - 0.25)) / (2 * h)
        return 1.0 if u > 0.5 else -1.0
    s = 0.0
    for k in range(full_coeffs.shape[0]):
        n = k + 1
        if full_coeffs[k] != 0.0:
            s -= TWO_PI * n * full_coeffs[k] * math.sin(TWO_PI * n * u)
    return s


@njit(cache=True, inline="always")
def _g_chunk(kind, coeffs, x, out, c, tt, b1, b2, L):
    if kind == KIND_COS:
        for i in range(L):
            out[i] = cos2pi(x[i])
        return
    if kind == KIND_SAWTOOTH:
        for i in range(L):
            out[i] = abs(x[i] - 0.5) - 0.25
        return
    odd = kind == KIND_ODD_SERIES
    for i in range(L):
        cc = cos2pi(x[i])
        c[i] = cc
        tt[i] = 2.0 * (2.0 * cc * cc - 1.0) if odd else 2.0 * cc
        b1[i] = 0.0
        b2[i] = 0.0
    for k in range(coeffs.shape[0] - 1, -1, -1):
        ak = coeffs[k]
        for i in range(L):
            b0 = ak + tt[i] * b1[i] - b2[i]
            b2[i] = b1[i]
            b1[i] = b0
    if odd:
        for i in range(L):
            out[i] = c[i] * (b1[i] - b2[i])
    else:
        for i in range(L):
            out[i] = c[i] * b1[i] - b2[i]


@njit(cache=True, nogil=True)
def orbit_stats(x0s, y0s, n, a, b, kind, coeffs, burn_in, y_escape):
    """Cylinder orbits of y' = y + a*g(x) + b, x' = x + y' mod 1.

    Per initial point returns the displacement y_n - y_0 (carried as a
    compensated hi/lo pair), max |y_k - y_0|, steps taken, and whether
    the orbit crossed ``y_escape`` (when it stops counting).
    """
    m = x0s.shape[0]
    disp = np.empty(m)
    exc = np.empty(m)
    steps = np.empty(m, dtype=np.int64)
    escaped = np.zeros(m, dtype=np.bool_)
    x = np.empty(CHUNK)
    fy0 = np.empty(CHUNK)
    dh = np.empty(CHUNK)
    dl = np.empty(CHUNK)
    big = np.empty(CHUNK)
    done = np.empty(CHUNK, dtype=np.bool_)
    nsteps = np.empty(CHUNK, dtype=np.int64)
    rd = np.empty(CHUNK)
    gv = np.empty(CHUNK)
    c = np.empty(CHUNK)
    tt = np.empty(CHUNK)
    b1 = np.empty(CHUNK)
    b2 = np.empty(CHUNK)
    for start in range(0, m, CHUNK):
        L = min(CHUNK, m - start)
        for i in range(L):
            x[i] = frac(x0s[start + i])
            y0 = y0s[start + i]
            fy0[i] = y0 - np.floor(y0)
            dh[i] = 0.0
            dl[i] = 0.0
        for _ in range(burn_in):
            _g_chunk(kind, coeffs, x, gv, c, tt, b1, b2, L)
            for i in range(L):
                s, e = two_sum(dh[i], a * gv[i] + b)
                dh[i] = s
                dl[i] += e
                x[i] = frac(x[i] + fy0[i] + (s - np.floor(s)) + dl[i])
        for i in range(L):
            # re-anchor the reference height after burn-in
            yb = y0s[start + i] + (dh[i] + dl[i])
            fy0[i] = yb - np.floor(yb)
            dh[i] = 0.0
            dl[i] = 0.0
            big[i] = 0.0
            done[i] = False
            nsteps[i] = n
            rd[i] = 0.0
        remaining = L
        for k in range(n):
            _g_chunk(kind, coeffs, x, gv, c, tt, b1, b2, L)
            hit = 0
            for i in range(L):
                s, e = two_sum(dh[i], a * gv[i] + b)
                dh[i] = s
                lo = dl[i] + e
                dl[i] = lo
                x[i] = frac(x[i] + fy0[i] + (s - np.floor(s)) + lo)
                d = s + lo
                ad = abs(d)
                live = not done[i]
                if live and ad > big[i]:
                    big[i] = ad
                if live and ad > y_escape:
                    done[i] = True
                    nsteps[i] = k + 1
                    rd[i] = d
                    hit += 1
            if hit:
                remaining -= hit
                if remaining == 0:
                    break
        for i in range(L):
            j = start + i
            if done[i]:
                disp[j] = rd[i]
                escaped[j] = True
            else:
                disp[j] = dh[i] + dl[i]
            exc[j] = big[i]
            steps[j] = nsteps[i]
    return disp, exc, steps, escaped


@njit(cache=True)
def cylinder_trajectory(x0, y0, n, a, b, kind, coeffs, torus):
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    x = frac(x0)
    if torus:
        y0 = frac(y0)
    xs[0] = x
    ys[0] = y0
    fy0 = y0 - np.floor(y0)
    dh = 0.0
    dl = 0.0
    for k in range(1, n + 1):
        dh, e = two_sum(dh, step_dy(kind, coeffs, a, b, x))
        dl += e
        x = frac(x + fy0 + (dh - np.floor(dh)) + dl)
        xs[k] = x
        y = y0 + (dh + dl)
        ys[k] = frac(y) if torus else y
    return xs, ys


@njit(cache=True)
def lift_trajectory(x0, y0, n, a, b, kind, coeffs):
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    xs[0] = x0
    ys[0] = y0
    x = x0
    dh = 0.0
    dl = 0.0
    for k in range(1, n + 1):
        dh, e = two_sum(dh, step_dy(kind, coeffs, a, b, x))
        dl += e
        y = y0 + (dh + dl)
        x = x + y
        xs[k] = x
        ys[k] = y
    return xs, ys


@njit(cache=True)
def lift_q_array(xs, ys, q, a, b, kind, coeffs):
    """q-fold plane lift applied pointwise to flat arrays."""
    m = xs.shape[0]
    ox = np.empty(m)
    oy = np.empty(m)
    for i in range(m):
        x = xs[i]
        y = ys[i]
        for _ in range(q):
            y = y + step_dy(kind, coeffs, a, b, x)
            x = x + y
        ox[i] = x
        oy[i] = y
    return ox, oy


@njit(cache=True)
def lift_q_jac(x, y, q, a, b, kind, coeffs, full_coeffs):
    """q-fold lift with the chain-rule Jacobian of the composition."""
    j00 = 1.0
    j01 = 0.0
    j10 = 0.0
    j11 = 1.0
    for _ in range(q):
        d = a * dg_eval(kind, full_coeffs, x)
        # step Jacobian [[1+d, 1], [d, 1]] times accumulated
        n00 = (1.0 + d) * j00 + j10
        n01 = (1.0 + d) * j01 + j11
        n10 = d * j00 + j10
        n11 = d * j01 + j11
        j00, j01, j10, j11 = n00, n01, n10, n11
        y = y + step_dy(kind, coeffs, a, b, x)
        x = x + y
    return x, y, j00, j01, j10, j11
