import numpy as np
import pytest

from torsionfield.integrators import (euler_maruyama,
                                      linear_rk4,
                                      rk4_integrate,
                                      rk4_step,
                                      stage_times,
                                      step_grid)

def test_step_grid():

    times = step_grid(0.0, 1.0, 0.1)
    assert len(times) == 11
    assert times[0] == 0.0
    assert times[-1] == 1.0

    # spacing adjusts so the end point is hit exactly
    times = step_grid(0.0, 2 * np.pi, 1e-3)
    assert times[-1] == 2 * np.pi
    assert abs(np.diff(times)[0] - 1e-3) < 1e-6

    assert len(step_grid(0.0, 1e-6, 1.0)) == 2

    with pytest.raises(ValueError):
        step_grid(0.0, 1.0, 0.0)

def test_stage_times():

    stages = stage_times(np.array([0.0, 1.0, 3.0]))
    assert stages.shape == (2, 3)
    assert stages[1].tolist() == [1.0, 2.0, 3.0]

def test_rk4_step_exact_for_cubic():

    # y' = 3 t^2 is integrated exactly
    y = rk4_step(lambda t, y: np.array([3 * t ** 2]), 0.0, np.array([0.0]), 2.0)
    assert abs(y[0] - 8.0) < 1e-12

def test_rk4_integrate_order():

    errors = []
    for h in (0.2, 0.1, 0.05):
        times, states, reason = rk4_integrate(lambda t, y: -y, np.array([1.0]), 0.0, 2.0, h)
        assert reason is None
        assert times[-1] == 2.0
        errors.append(abs(states[-1, 0] - np.exp(-2.0)))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(orders - 4.0) < 0.3)

def test_rk4_integrate_stop():

    times, states, reason = rk4_integrate(lambda t, y: np.array([1.0]), np.array([0.0]), 0.0, 1.0, 0.1,
                                          stop=lambda t, y: "limit" if y[0] > 0.45 else None)
    assert reason == "limit"
    assert len(times) == len(states)
    assert states[-1, 0] <= 0.45

def test_linear_rk4_rotation():

    times = step_grid(0.0, np.pi / 2, 1e-2)
    generator = np.array([[0.0, -1.0], [1.0, 0.0]])
    coefficients = np.broadcast_to(generator, (len(times) - 1, 3, 2, 2))
    states = linear_rk4(coefficients, times, np.array([1.0, 0.0]))
    assert states.shape == (len(times), 2)
    assert np.allclose(states[-1], [0.0, 1.0], atol=1e-9)

    # the same grid backwards undoes the rotation
    back = linear_rk4(coefficients, times[::-1], states[-1])
    assert np.allclose(back[-1], [1.0, 0.0], atol=1e-9)

def test_euler_maruyama_zero_noise():

    times = np.linspace(0.0, 1.0, 1001)
    dB = np.zeros((3, 1000))
    trajectory = euler_maruyama(lambda n, t, y: -y, lambda n, t, y: y, np.ones((3, 2)), times, dB)
    assert trajectory.shape == (1001, 3, 2)
    assert np.allclose(trajectory[-1], (1 - 1e-3) ** 1000)

def test_euler_maruyama_shape_check():

    with pytest.raises(ValueError):
        euler_maruyama(lambda n, t, y: y, lambda n, t, y: y, np.ones((3, 2)), np.linspace(0, 1, 11),
                       np.zeros((3, 5)))
