"""Adaptive Dormand-Prince 5(4) stepping between fixed output instants.

A hand-rolled stepper rather than ``scipy.integrate.solve_ivp``: the
time-domain models change their right-hand side at every output instant
(convolution history, coefficient refresh), so each call integrates one
short interval with a warm-started step size and no per-call setup cost.
"""
import math

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A = [np.array(row) for row in _A]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    """Step-size underflow or a non-finite state; ``t`` is the failure time."""

    def __init__(self, message, t):
        super().__init__(f"{message} at t = {t:.6g} s")
        self.t = t


def step_interval(f, t0, y0, t1, h, atol=1e-8, rtol=1e-6, h_min=1e-10):
    """Integrate ``y' = f(t, y)`` from ``t0`` to exactly ``t1``.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, y) -> ndarray``.
    h : float
        Initial step guess; the last accepted proposal is returned for reuse.

    Returns
    -------
    y1 : ndarray
    h_next : float
    n_steps : int
        Accepted steps taken.
    """
    t, y = t0, np.asarray(y0, dtype=float)
    h_prop = h
    k = np.empty((7, y.size))
    k[0] = f(t, y)
    n_steps = 0
    while t < t1:
        # clip to land exactly on t1; a clipped step does not reset the proposal
        clipped = t + h_prop >= t1 - 1e-12 * max(1.0, abs(t1))
        h = t1 - t if clipped else h_prop
        for i in range(1, 7):
            k[i] = f(t + _C[i] * h, y + h * (_A[i] @ k[:i]))
        y_new = y + h * (_B5 @ k)
        e = h * (_E @ k) / (atol + rtol * np.maximum(np.abs(y), np.abs(y_new)))
        err = math.sqrt(e @ e / e.size)
        if not np.isfinite(err):
            raise IntegrationError("non-finite state", t)
        factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err**-0.2))
        if err <= 1.0:
            t = t1 if clipped else t + h
            y = y_new
            k[0] = k[6]
            n_steps += 1
            if not clipped:
                h_prop = h * factor
        else:
            h_prop = h * factor
            if h_prop < h_min:
                raise IntegrationError("step size underflow", t)
    return y, h_prop, n_steps
