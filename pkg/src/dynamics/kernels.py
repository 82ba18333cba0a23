"""
Compiled kernels for the six real equations of motion.

Every kernel takes the packed parameter array produced by
``SystemParams.as_array`` and a ``verbatim`` flag selecting the printed
sign convention (True) or the exact expansion of the complex equations
(False). Outputs are written into caller-provided buffers.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def rhs_into(y, p, verbatim, out):
    ar, ai, b1r, b1i, b2r, b2i = y[0], y[1], y[2], y[3], y[4], y[5]
    w1, w2, kappa, delta, g1, g2 = p[0], p[1], p[2], p[3], p[4], p[5]
    gm1, gm2, jm, c, s, ain, sqk = p[6], p[7], p[8], p[9], p[10], p[11], p[12]

    n = ar * ar + ai * ai
    d = delta + 2.0 * g1 * b1r + 2.0 * g2 * b2r
    half_k = 0.5 * kappa

    out[1] = d * ar - half_k * ai
    if verbatim:
        out[0] = -half_k * ar + d * ai + sqk * ain
        out[2] = w1 * b1i - 0.5 * gm1 * b1r + jm * (b2r * s + b2i * c) - g1 * n
        out[3] = -w1 * b1r - 0.5 * gm1 * b1i - jm * (b2r * c - b2i * s)
        out[4] = w2 * b2i - 0.5 * gm2 * b2r - jm * (b1r * s - b1i * c) - g2 * n
        out[5] = -w2 * b2r - 0.5 * gm2 * b2i - jm * (b1r * c + b1i * s)
    else:
        out[0] = -half_k * ar - d * ai + sqk * ain
        out[2] = w1 * b1i - 0.5 * gm1 * b1r + jm * (b2r * s + b2i * c)
        out[3] = -w1 * b1r - 0.5 * gm1 * b1i - jm * (b2r * c - b2i * s) - g1 * n
        out[4] = w2 * b2i - 0.5 * gm2 * b2r - jm * (b1r * s - b1i * c)
        out[5] = -w2 * b2r - 0.5 * gm2 * b2i - jm * (b1r * c + b1i * s) - g2 * n


@njit(cache=True)
def jacobian_into(y, p, verbatim, out):
    ar, ai, b1r, b2r = y[0], y[1], y[2], y[4]
    w1, w2, kappa, delta, g1, g2 = p[0], p[1], p[2], p[3], p[4], p[5]
    gm1, gm2, jm, c, s = p[6], p[7], p[8], p[9], p[10]

    d = delta + 2.0 * g1 * b1r + 2.0 * g2 * b2r
    half_k = 0.5 * kappa
    sigma = 1.0 if verbatim else -1.0
    for i in range(6):
        for j in range(6):
            out[i, j] = 0.0

    out[0, 0] = -half_k
    out[0, 1] = sigma * d
    out[0, 2] = sigma * 2.0 * g1 * ai
    out[0, 4] = sigma * 2.0 * g2 * ai

    out[1, 0] = d
    out[1, 1] = -half_k
    out[1, 2] = 2.0 * g1 * ar
    out[1, 4] = 2.0 * g2 * ar

    # radiation pressure lands in the real mechanical rows when printed, imaginary rows otherwise
    r1 = 2 if verbatim else 3
    r2 = 4 if verbatim else 5
    out[r1, 0] = -2.0 * g1 * ar
    out[r1, 1] = -2.0 * g1 * ai
    out[r2, 0] = -2.0 * g2 * ar
    out[r2, 1] = -2.0 * g2 * ai

    out[2, 2] = -0.5 * gm1
    out[2, 3] = w1
    out[2, 4] = jm * s
    out[2, 5] = jm * c

    out[3, 2] = -w1
    out[3, 3] = -0.5 * gm1
    out[3, 4] = -jm * c
    out[3, 5] = jm * s

    out[4, 2] = -jm * s
    out[4, 3] = jm * c
    out[4, 4] = -0.5 * gm2
    out[4, 5] = w2

    out[5, 2] = -jm * c
    out[5, 3] = -jm * s
    out[5, 4] = -w2
    out[5, 5] = -0.5 * gm2


@njit(cache=True)
def jvp_into(y, v, p, verbatim, jac, out):
    jacobian_into(y, p, verbatim, jac)
    for i in range(6):
        acc = 0.0
        for j in range(6):
            acc += jac[i, j] * v[j]
        out[i] = acc


@njit(cache=True)
def term_scale(y, p):
    """Largest magnitude among the individual terms of the right-hand side."""
    a = np.sqrt(y[0] * y[0] + y[1] * y[1])
    b = max(np.sqrt(y[2] * y[2] + y[3] * y[3]), np.sqrt(y[4] * y[4] + y[5] * y[5]))
    g = max(abs(p[4]), abs(p[5]))
    scale = 1.0
    scale = max(scale, 0.5 * p[2] * a)
    scale = max(scale, (abs(p[3]) + 4.0 * g * b) * a)
    scale = max(scale, abs(p[12] * p[11]))
    scale = max(scale, (max(abs(p[0]), abs(p[1])) + p[8] + max(p[6], p[7])) * b)
    scale = max(scale, g * a * a)
    return scale


@njit(cache=True)
def _exceeds(y, bound):
    for i in range(y.shape[0]):
        if not abs(y[i]) <= bound:
            return True
    return False


@njit(cache=True)
def _rk4_update(y, p, verbatim, dt, k1, k2, k3, k4, tmp, out):
    rhs_into(y, p, verbatim, k1)
    for i in range(6):
        tmp[i] = y[i] + 0.5 * dt * k1[i]
    rhs_into(tmp, p, verbatim, k2)
    for i in range(6):
        tmp[i] = y[i] + 0.5 * dt * k2[i]
    rhs_into(tmp, p, verbatim, k3)
    for i in range(6):
        tmp[i] = y[i] + dt * k3[i]
    rhs_into(tmp, p, verbatim, k4)
    for i in range(6):
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True)
def integrate_kernel(y0, p, verbatim, dt, n_steps, stride, bound, skip, samples):
    """
    Run ``n_steps`` RK4 steps from ``y0`` recording every ``stride`` steps.

    Samples at step indices below ``skip`` are not stored. Returns the number
    of rows written and the step at which the bound was exceeded (-1 if none).
    """
    y = y0.copy()
    nxt = np.empty(6)
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    rows = 0
    if skip <= 0:
        for i in range(6):
            samples[0, i] = y[i]
        rows = 1
    for step in range(1, n_steps + 1):
        _rk4_update(y, p, verbatim, dt, k1, k2, k3, k4, tmp, nxt)
        if _exceeds(nxt, bound):
            return rows, step
        for i in range(6):
            y[i] = nxt[i]
        if step % stride == 0 and step >= skip:
            for i in range(6):
                samples[rows, i] = y[i]
            rows += 1
    return rows, -1


@njit(cache=True)
def advance_kernel(y, p, verbatim, dt, n_steps, bound):
    """Advance ``y`` in place; returns the diverging step or -1."""
    nxt = np.empty(6)
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    for step in range(1, n_steps + 1):
        _rk4_update(y, p, verbatim, dt, k1, k2, k3, k4, tmp, nxt)
        if _exceeds(nxt, bound):
            return step
        for i in range(6):
            y[i] = nxt[i]
    return -1


@njit(cache=True)
def advance_tangent_kernel(y, v, p, verbatim, dt, n_steps, bound):
    """Advance the state and a tangent vector together with joint RK4 stages."""
    jac = np.empty((6, 6))
    kx = np.empty((4, 6))
    kv = np.empty((4, 6))
    xs = np.empty(6)
    vs = np.empty(6)
    nxt = np.empty(6)
    weights = (0.0, 0.5, 0.5, 1.0)
    for step in range(1, n_steps + 1):
        for stage in range(4):
            h = weights[stage] * dt
            for i in range(6):
                if stage == 0:
                    xs[i] = y[i]
                    vs[i] = v[i]
                else:
                    xs[i] = y[i] + h * kx[stage - 1, i]
                    vs[i] = v[i] + h * kv[stage - 1, i]
            rhs_into(xs, p, verbatim, kx[stage])
            jvp_into(xs, vs, p, verbatim, jac, kv[stage])
        for i in range(6):
            nxt[i] = y[i] + dt / 6.0 * (kx[0, i] + 2.0 * kx[1, i] + 2.0 * kx[2, i] + kx[3, i])
            v[i] = v[i] + dt / 6.0 * (kv[0, i] + 2.0 * kv[1, i] + 2.0 * kv[2, i] + kv[3, i])
        if _exceeds(nxt, bound):
            return step
        for i in range(6):
            y[i] = nxt[i]
    return -1


@njit(cache=True)
def _max_abs(r):
    m = 0.0
    for i in range(r.shape[0]):
        a = abs(r[i])
        if a > m:
            m = a
    return m


@njit(cache=True)
def newton_kernel(y, p, verbatim, tol, max_iter, max_halvings, bound):
    """
    Damped Newton iteration on rhs = 0, refining ``y`` in place.

    Returns (status, iterations, residual) where status is 0 when the
    residual reached ``tol``, 1 when it stalled above it, 2 when the iterate
    left the bound and 3 when the iteration budget ran out.
    """
    r = np.empty(6)
    trial = np.empty(6)
    r_trial = np.empty(6)
    jac = np.empty((6, 6))
    rhs_into(y, p, verbatim, r)
    res = _max_abs(r)
    res_trial = res
    for it in range(max_iter):
        if res <= tol:
            return 0, it, res
        jacobian_into(y, p, verbatim, jac)
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            for i in range(6):
                trial[i] = y[i] + lam * step[i]
            if not _exceeds(trial, bound):
                rhs_into(trial, p, verbatim, r_trial)
                res_trial = _max_abs(r_trial)
                if res_trial < res:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            if _exceeds(trial, bound):
                return 2, it, res
            return 1, it, res
        for i in range(6):
            y[i] = trial[i]
            r[i] = r_trial[i]
        res = res_trial
    if res <= tol:
        return 0, max_iter, res
    return 3, max_iter, res
