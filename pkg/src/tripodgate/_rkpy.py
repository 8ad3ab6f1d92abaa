"""Pure-Python Dormand-Prince 5(4) integrator for i dy/dt = H(t) y.

Same algorithm, constants and step control as the compiled ``_rkcore``
extension; used when the extension is not built.
"""

from __future__ import annotations

import numpy as np

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


class IntegrationError(RuntimeError):
    pass


def _rhs(kd, t, y):
    x = t - kd.g_center
    env = kd.g_amp * np.exp(-kd.g_rate * x * x)
    env[np.abs(x) > kd.g_cut] = 0.0
    f = np.ones(len(kd.vals))
    mask = kd.comp >= 0
    f[mask] = env[kd.comp[mask]]
    contrib = kd.vals * f * y[kd.cols]
    dy = np.bincount(kd.rows, contrib.real, minlength=kd.dim) + 1j * np.bincount(kd.rows, contrib.imag, minlength=kd.dim)
    return -1j * dy


def _err_norm(err, y, ynew, tol):
    sc = tol + tol * np.maximum(np.abs(y), np.abs(ynew))
    return float(np.sqrt(np.mean((np.abs(err) / sc) ** 2)))


def dopri_integrate(kd, y0, t_out, tol, h0=0.0, max_steps=50_000_000):
    """Integrate from ``t_out[0]`` through every time in ``t_out``.

    Returns ``(states, n_accepted, n_rejected)`` with one row per output time.
    ``t_out`` must be strictly monotone; it may decrease (backward run).
    """
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=complex)
    n_out = len(t_out)
    states = np.empty((n_out, len(y)), dtype=complex)
    states[0] = y
    if n_out == 1:
        return states, 0, 0
    direction = 1.0 if t_out[-1] > t_out[0] else -1.0
    t = float(t_out[0])
    span = abs(t_out[-1] - t_out[0])
    k1 = _rhs(kd, t, y)
    if h0 <= 0.0:
        scale = float(np.max(np.abs(k1))) + 1.0
        h0 = min(0.01 * span, 0.1 * tol ** 0.2 / scale)
    h = h0
    n_acc = n_rej = 0
    expo = 0.2
    for j in range(1, n_out):
        target = float(t_out[j])
        while direction * (target - t) > 0.0:
            remaining = abs(target - t)
            if remaining <= 1e-15 * max(1.0, abs(t)):
                t = target  # round-off remainder
                break
            last = h >= remaining
            hs = remaining if last else h
            hh = direction * hs
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t={t}")
            if n_acc + n_rej >= max_steps:
                raise IntegrationError(f"maximum number of steps exceeded at t={t}")
            k2 = _rhs(kd, t + C2 * hh, y + hh * (A21 * k1))
            k3 = _rhs(kd, t + C3 * hh, y + hh * (A31 * k1 + A32 * k2))
            k4 = _rhs(kd, t + C4 * hh, y + hh * (A41 * k1 + A42 * k2 + A43 * k3))
            k5 = _rhs(kd, t + C5 * hh, y + hh * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
            k6 = _rhs(kd, t + hh, y + hh * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
            ynew = y + hh * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            tnew = target if last else t + hh
            k7 = _rhs(kd, tnew, ynew)
            err = hh * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
            en = _err_norm(err, y, ynew, tol)
            if not np.isfinite(en):
                raise IntegrationError(f"non-finite error estimate at t={t}")
            if en <= 1.0:
                fac = FAC_MAX if en == 0.0 else min(FAC_MAX, max(FAC_MIN, SAFETY * en ** -expo))
                t, y, k1 = tnew, ynew, k7
                n_acc += 1
                # a step shortened to hit an output time does not shrink h
                h = max(h, hs * fac) if last else hs * fac
            else:
                h = hs * max(FAC_MIN, SAFETY * en ** -expo)
                n_rej += 1
        states[j] = y
    return states, n_acc, n_rej
