"""Fixed-step method-of-steps kernels for y'(t) = M y(t - tau).

The hot loop is compiled with numba when available; setting the environment
variable SURPLUS_CONSENSUS_PURE_NUMPY=1 selects the pure-numpy path instead
(same code, interpreted). `backend()` reports which path is active.
"""

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("SURPLUS_CONSENSUS_PURE_NUMPY", "0") not in ("", "0")

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by SURPLUS_CONSENSUS_PURE_NUMPY")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


def backend():
    return "numba" if _HAVE_NUMBA else "numpy"


@njit(cache=True)
def integrate_delayed(mat, y0, delay_steps, nsteps, dt, blow_threshold):
    """Integrate y' = mat @ y(t - delay_steps*dt) from constant history y0.

    Classical 4th-order one-step scheme; since the right-hand side depends only
    on the delayed state, each step reduces to Simpson quadrature with the
    midpoint value obtained by cubic Hermite interpolation of the stored
    history. Returns (states, derivs, last_valid_index); the run stops early
    when any |state| exceeds blow_threshold or turns non-finite.
    """
    dim = y0.shape[0]
    states = np.empty((nsteps + 1, dim))
    derivs = np.empty((nsteps + 1, dim))
    states[0] = y0
    derivs[0] = mat @ y0
    last = nsteps
    for step in range(nsteps):
        q = step - delay_steps
        k1 = derivs[step]
        if q + 1 <= 0:
            ymid = y0
            ynext_delayed = y0
        else:
            # midpoint of [t_q, t_{q+1}] from values and derivatives at the nodes
            ymid = 0.5 * (states[q] + states[q + 1]) + (dt / 8.0) * (derivs[q] - derivs[q + 1])
            ynext_delayed = states[q + 1]
        kmid = mat @ ymid
        k4 = mat @ ynext_delayed
        states[step + 1] = states[step] + (dt / 6.0) * (k1 + 4.0 * kmid + k4)
        derivs[step + 1] = k4
        bad = False
        for i in range(dim):
            v = states[step + 1, i]
            if not np.isfinite(v) or abs(v) > blow_threshold:
                bad = True
        if bad:
            last = step + 1
            break
    return states, derivs, last


@njit(cache=True)
def integrate_undelayed(mat, y0, nsteps, dt, blow_threshold):
    """Classical RK4 for y' = mat @ y (the tau = 0 reduction)."""
    dim = y0.shape[0]
    states = np.empty((nsteps + 1, dim))
    states[0] = y0
    last = nsteps
    for step in range(nsteps):
        y = states[step]
        k1 = mat @ y
        k2 = mat @ (y + 0.5 * dt * k1)
        k3 = mat @ (y + 0.5 * dt * k2)
        k4 = mat @ (y + dt * k3)
        states[step + 1] = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        bad = False
        for i in range(dim):
            v = states[step + 1, i]
            if not np.isfinite(v) or abs(v) > blow_threshold:
                bad = True
        if bad:
            last = step + 1
            break
    return states, last
