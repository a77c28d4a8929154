"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Fixed step integrators for the geodesic and transport equations
"""
import logging

import numpy as np


log = logging.getLogger(__name__)

def step_grid(t0, t1, h):
    """
    Equally spaced time grid from ``t0`` to ``t1`` whose spacing is the
    closest to ``h`` that hits ``t1`` exactly

    :param t0: start time
    :type t0: float
    :param t1: end time
    :type t1: float
    :param h: requested step size
    :type h: float
    :returns: time grid
    :rtype: :class:`numpy.ndarray`
    """
    if h <= 0:
        raise ValueError("'h' needs to be positive")
    count = max(1, int(round(abs(t1 - t0) / h)))
    return np.linspace(t0, t1, count + 1)

def stage_times(times):
    """
    Evaluation times of the classical 4th order scheme for each step

    :param times: time grid
    :type times: :class:`numpy.ndarray`
    :returns: array of shape (steps, 3) holding start, midpoint and end
    :rtype: :class:`numpy.ndarray`
    """
    start = times[:-1]
    end = times[1:]
    return np.stack([start, 0.5 * (start + end), end], axis=-1)

def rk4_step(fn, t, y, h):
    """
    One step of the classical 4th order Runge-Kutta method

    :param fn: right hand side ``fn(t, y)``
    :type fn: callable
    :param t: current time
    :type t: float
    :param y: current state
    :type y: :class:`numpy.ndarray`
    :param h: step size (may be negative)
    :type h: float
    :returns: state at ``t + h``
    :rtype: :class:`numpy.ndarray`
    """
    k1 = fn(t, y)
    k2 = fn(t + h / 2, y + h * k1 / 2)
    k3 = fn(t + h / 2, y + h * k2 / 2)
    k4 = fn(t + h, y + h * k3)
    return y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6

def rk4_integrate(fn, y0, t0, t1, h, stop=None):
    """
    Integrate ``y' = fn(t, y)`` with fixed steps

    The optional ``stop(t, y)`` callback is consulted after every step. When
    it returns a reason the offending state is dropped and the integration
    ends early.

    :param fn: right hand side
    :type fn: callable
    :param y0: initial state
    :type y0: :class:`numpy.ndarray`
    :param t0: start time
    :type t0: float
    :param t1: end time
    :type t1: float
    :param h: step size
    :type h: float
    :param stop: optional stop callback
    :type stop: callable
    :returns: times, states and the stop reason (``None`` if completed)
    :rtype: tuple
    """
    times = step_grid(t0, t1, h)
    y = np.array(y0, dtype=float)
    states = [y]
    reason = None
    for n in range(len(times) - 1):
        y = rk4_step(fn, times[n], y, times[n + 1] - times[n])
        if stop is not None:
            reason = stop(times[n + 1], y)
            if reason:
                log.debug("Integration stopped at t=%s: %s", times[n], reason)
                break
        states.append(y)
    return times[:len(states)], np.array(states), reason

def linear_rk4(coefficients, times, y0):
    """
    Integrate the linear system ``y' = A(t) y`` with fixed steps

    The coefficient matrices are precomputed for every stage, which keeps the
    inner loop free of geometry evaluations.

    :param coefficients: array of shape (steps, 3, d, d) for the stage times
        returned by :func:`stage_times`
    :type coefficients: :class:`numpy.ndarray`
    :param times: time grid (increasing or decreasing)
    :type times: :class:`numpy.ndarray`
    :param y0: initial state of shape (d,) or (d, m)
    :type y0: :class:`numpy.ndarray`
    :returns: states for every grid time
    :rtype: :class:`numpy.ndarray`
    """
    y = np.array(y0, dtype=float)
    states = [y]
    for n, h in enumerate(np.diff(times)):
        start, middle, end = coefficients[n]
        k1 = start @ y
        k2 = middle @ (y + 0.5 * h * k1)
        k3 = middle @ (y + 0.5 * h * k2)
        k4 = end @ (y + h * k3)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        states.append(y)
    return np.array(states)

def euler_maruyama(drift, diffusion, y0, times, dB):
    """
    Euler-Maruyama integration of the Ito equation ``dy = f dt + G dB``
    for a batch of independent paths driven by scalar noise

    Both coefficients are evaluated at the left end of every step.

    :param drift: ``drift(n, t, y)`` for the batch ``y`` of shape (paths, d)
    :type drift: callable
    :param diffusion: ``diffusion(n, t, y)`` returning shape (paths, d)
    :type diffusion: callable
    :param y0: initial states of shape (paths, d)
    :type y0: :class:`numpy.ndarray`
    :param times: time grid
    :type times: :class:`numpy.ndarray`
    :param dB: Brownian increments of shape (paths, steps)
    :type dB: :class:`numpy.ndarray`
    :returns: trajectory of shape (steps + 1, paths, d)
    :rtype: :class:`numpy.ndarray`
    """
    y = np.array(y0, dtype=float)
    if dB.shape != (y.shape[0], len(times) - 1):
        raise ValueError("'dB' must have shape (paths, steps)")
    trajectory = np.empty((len(times),) + y.shape)
    trajectory[0] = y
    for n, h in enumerate(np.diff(times)):
        y = y + drift(n, times[n], y) * h + diffusion(n, times[n], y) * dB[:, n, None]
        trajectory[n + 1] = y
    return trajectory
