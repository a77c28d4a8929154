import numpy as np
import pytest

from torsionfield.geometry import geodesic_standard, latitude_curve, line_curve
from torsionfield.randomField import DegenerateRealizationError, FieldRealization, FieldSpec, noiseless_realization
from torsionfield.transport import (AlongCurveField,
                                    HolonomyResult,
                                    TransportSolution,
                                    brownian_fundamental_matrix,
                                    brownian_increments,
                                    brownian_transport,
                                    expected_geodesic,
                                    expected_transport,
                                    holonomy,
                                    log_weight_integral,
                                    realized_geodesic,
                                    realized_transport,
                                    recovery_limit_check,
                                    standard_transport,
                                    transport_weights,
                                    wrap_angle)

def test_wrap_angle():

    assert abs(wrap_angle(3 * np.pi) - np.pi) < 1e-12
    assert abs(wrap_angle(-np.pi) - np.pi) < 1e-12
    assert wrap_angle(0.5) == 0.5
    assert abs(wrap_angle(-0.5 - 4 * np.pi) + 0.5) < 1e-12

def test_transport_weights(sphereSpec):

    a, b = transport_weights(None, np.zeros((3, 2)), np.ones((3, 2)))
    assert np.array_equal(a, np.ones(3))
    assert np.array_equal(b, np.zeros(3))
    with pytest.raises(ValueError):
        transport_weights("spec", np.zeros((3, 2)), np.ones((3, 2)))

def test_solution_regime(torus):

    with pytest.raises(ValueError):
        TransportSolution(line_curve([1.0, 1.0], [1.0, 0.0]), [0.0, 1.0], np.zeros((2, 2)), "random")

def test_flat_transport(torus):

    solution = standard_transport(torus, line_curve([1.0, 1.0], [1.0, 0.5], 2.0), (0.3, -0.4), 1e-2)
    assert np.allclose(solution.frames, [0.3, -0.4])
    assert not solution.truncated
    assert solution.header() == ["t", "x1", "x2", "X1", "X2"]
    assert list(solution.rows())[-1][:3] == pytest.approx([2.0, 3.0, 2.0])

@pytest.mark.parametrize("latitude", [np.pi / 3, 1.0, 2.5])
def test_sphere_holonomy(unitSphere, latitude):

    result = holonomy(unitSphere, latitude_curve(unitSphere, latitude))
    predicted = 2 * np.pi * (1 - np.cos(latitude))
    assert abs(wrap_angle(result.angle - predicted)) < 1e-8
    assert abs(result.logScale) < 1e-8
    assert set(result.to_dict()) == {"regime", "angle", "log_scale", "linear_map", "orthonormal_map", "metadata"}

def test_random_holonomy(unitSphere, sphereSpec, sphereRealization):

    curve = latitude_curve(unitSphere, np.pi / 3)
    standard = holonomy(unitSphere, curve)
    # the scale factors are periodic, so a closed loop only rotates
    for regime, source in (("expected", sphereSpec), ("realized", sphereRealization)):
        result = holonomy(unitSphere, curve, regime, source)
        assert isinstance(result, HolonomyResult)
        assert abs(wrap_angle(result.angle - standard.angle)) < 1e-8
        assert abs(result.logScale) < 1e-8

def test_holonomy_errors(unitSphere):

    with pytest.raises(ValueError):
        holonomy(unitSphere, line_curve([1.0, 1.0], [1.0, 0.0], 1.0))
    with pytest.raises(ValueError):
        holonomy(unitSphere, latitude_curve(unitSphere, 1.0), "brownian")

def test_realized_scaling(unitSphere, sphereRealization):

    curve = latitude_curve(unitSphere, 1.0)
    standard = standard_transport(unitSphere, curve, (1.0, 0.0))
    realized = realized_transport(unitSphere, sphereRealization, curve, (1.0, 0.0))
    assert np.allclose(realized.frames, realized.metadata["factor"][:, None] * standard.frames, rtol=0.0, atol=1e-8)
    assert realized.header()[-1] == "eps"
    assert len(next(realized.rows())) == 6
    assert realized.metadata["seed"] == sphereRealization.seed

def test_expected_factor(unitSphere, sphereSpec):

    curve = latitude_curve(unitSphere, 1.0, (0.0, np.pi))
    standard = standard_transport(unitSphere, curve, (0.0, 1.0))
    expected = expected_transport(unitSphere, sphereSpec, curve, (0.0, 1.0))
    factor = expected.metadata["factor"]
    assert np.allclose(expected.frames, factor[:, None] * standard.frames, rtol=0.0, atol=1e-8)
    assert np.allclose(factor, np.exp(-log_weight_integral(sphereSpec, curve, expected.times)), rtol=1e-5)

def test_degenerate_transport(torusSpec, torus):

    coefficients = np.zeros(torusSpec.truncation)
    coefficients[0] = 10.0
    realization = FieldRealization(torusSpec, coefficients, seed=1)
    with pytest.raises(DegenerateRealizationError):
        realized_transport(torus, realization, line_curve([1.0, 1.0], [1.0, 0.0]), (1.0, 0.0))

def test_transport_leaves_chart(halfPlane):

    solution = standard_transport(halfPlane, line_curve([0.0, 1.0], [0.0, -1.0], 2.0), (1.0, 0.0), 1e-2)
    assert solution.metadata["exited"]
    assert solution.truncated
    assert solution.times[-1] < 0.91
    assert np.all(halfPlane.contains(solution.curve.position(solution.times)))

def test_random_geodesics_without_noise(unitSphere, sphereSpec):

    standard = geodesic_standard(unitSphere, [np.pi / 2, 0.0], [0.6, 0.8], 1.0)
    spec = FieldSpec(unitSphere, truncation=sphereSpec.truncation, amplitude=0.0)
    expected = expected_geodesic(unitSphere, spec, [np.pi / 2, 0.0], [0.6, 0.8], 1.0)
    realized = realized_geodesic(unitSphere, noiseless_realization(spec), [np.pi / 2, 0.0], [0.6, 0.8], 1.0)
    assert np.allclose(expected.samples["x"], standard.samples["x"])
    assert np.allclose(realized.samples["x"], standard.samples["x"])
    assert np.allclose(expected.metadata["alpha"], 1.0)

def test_realized_geodesic(manifoldName, setup):

    manifold, _, realization, _ = setup
    geodesic = realized_geodesic(manifold, realization, manifold.defaultPoint, (0.6, 0.8), 1.0)
    assert geodesic.metadata["geodesic1_residual"] < 1e-8
    assert geodesic.metadata["geodesic2_residual"] < 1e-8
    assert len(geodesic.metadata["eps"]) == len(geodesic.samples["t"])

def test_recovery_limit(unitSphere, sphereSpec, sphereRealization):

    curve = latitude_curve(unitSphere, 1.0)
    field = AlongCurveField(lambda t: np.array([np.sin(t), 1.0 + 0.5 * np.cos(t)]),
                            lambda t: np.array([np.cos(t), -0.5 * np.sin(t)]))
    for source in (None, sphereSpec, sphereRealization):
        report = recovery_limit_check(unitSphere, source, curve, field, 0.7)
        assert report.identityId == "transport.recovery_limit"
        assert report.passed, report.extra
        assert np.all(np.diff(report.extra["residuals"]) < 0)

def test_brownian_increments():

    first = brownian_increments(3, 0, 100, 1e-2)
    assert first.shape == (100,)
    assert np.array_equal(first, brownian_increments(3, 0, 100, 1e-2))
    assert not np.array_equal(first, brownian_increments(3, 1, 100, 1e-2))

def test_brownian_zero_noise(unitSphere):

    curve = latitude_curve(unitSphere, 1.0)
    samples, mean = brownian_transport(unitSphere, curve, (1.0, 0.0), h=1e-3, nPaths=4, zeroNoise=True)
    psi = brownian_fundamental_matrix(unitSphere, curve, np.zeros(len(mean.times) - 1), h=1e-3)
    assert len(samples) == 4
    assert np.allclose(mean.frames, psi @ np.array([1.0, 0.0]))
    assert np.allclose(mean.metadata["stderr"], 0.0)
    # Euler steps stay within first order of the RK4 transport
    assert np.allclose(mean.final, standard_transport(unitSphere, curve, (1.0, 0.0)).final, atol=1e-2)

def test_brownian_mean(torus):

    curve = line_curve([1.0, 1.0], [1.0, 0.0], 1.0)
    samples, mean = brownian_transport(torus, curve, (1.0, 2.0), h=1e-2, nPaths=2000, masterSeed=5,
                                       storedPaths=3)
    assert [sample.metadata["path"] for sample in samples] == [0, 1, 2]
    assert mean.regime == "brownian-mean"
    assert mean.metadata["n_paths"] == 2000
    assert mean.metadata["log_norm_variance"] > 0
    # the multiplicative noise is a martingale, so the mean stays at v0
    assert np.all(np.abs(mean.metadata["mean"] - np.array([1.0, 2.0])) <= 5 * mean.metadata["stderr"])

    _, rechunked = brownian_transport(torus, curve, (1.0, 2.0), h=1e-2, nPaths=2000, masterSeed=5, chunkSize=7)
    assert np.allclose(rechunked.frames, mean.frames, rtol=1e-12)

def test_brownian_fundamental_matrix(torus):

    curve = line_curve([1.0, 1.0], [1.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        brownian_fundamental_matrix(torus, curve, np.zeros(3), h=1e-2)
    dB = brownian_increments(5, 0, 100, 1e-2)
    psi = brownian_fundamental_matrix(torus, curve, dB, h=1e-2)
    samples, _ = brownian_transport(torus, curve, (1.0, 2.0), h=1e-2, nPaths=1, masterSeed=5)
    assert np.allclose(samples[0].frames, psi @ np.array([1.0, 2.0]))

def test_brownian_log_norm_variance(torus):

    curve = line_curve([1.0, 1.0], [1.0, 0.0], 1.0)
    _, mean = brownian_transport(torus, curve, (1.0, 2.0), h=1e-2, nPaths=10000, masterSeed=5)
    # log |X(T)| is a sum of log |1 - dB|, whose variance grows like T
    assert abs(mean.metadata["log_norm_variance"] - curve.duration) <= 0.15 * curve.duration

def distanceFromLine(points, p0, direction):
    direction = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
    offsets = np.asarray(points) - np.asarray(p0)
    return np.abs(offsets[:, 0] * direction[1] - offsets[:, 1] * direction[0])

def test_flat_geodesics_stay_straight(torus, torusSpec, torusRealization):

    expected = expected_geodesic(torus, torusSpec, [1.0, 1.0], [1.0, 0.5], 2.0)
    realized = realized_geodesic(torus, torusRealization, [1.0, 1.0], [1.0, 0.5], 2.0)
    for geodesic in (expected, realized):
        assert not geodesic.truncated
        assert np.max(distanceFromLine(geodesic.samples["x"], [1.0, 1.0], [1.0, 0.5])) < 1e-12
        # the damping rescales the speed but never turns the velocity
        velocities = geodesic.samples["v"]
        assert np.max(np.abs(velocities[:, 0] * 0.5 - velocities[:, 1])) < 1e-12

def observedOrders(solve, steps=(0.05, 0.025, 0.0125)):
    reference = solve(steps[-1] / 8).samples["x"][-1]
    errors = np.array([np.linalg.norm(solve(h).samples["x"][-1] - reference) for h in steps])
    return np.log2(errors[:-1] / errors[1:])

def test_random_geodesic_order(unitSphere, sphereSpec, sphereRealization):

    p0, v0 = [1.2, 0.5], [0.6, 0.8]
    expectedOrders = observedOrders(lambda h: expected_geodesic(unitSphere, sphereSpec, p0, v0, 1.0, h))
    realizedOrders = observedOrders(lambda h: realized_geodesic(unitSphere, sphereRealization, p0, v0, 1.0, h))
    assert np.all(np.abs(expectedOrders - 4.0) < 0.5), expectedOrders
    assert np.all(np.abs(realizedOrders - 4.0) < 0.5), realizedOrders

@pytest.mark.parametrize("regime", ["standard", "expected", "realized"])
def test_transport_superposition(unitSphere, sphereSpec, sphereRealization, regime):

    curve = latitude_curve(unitSphere, 1.0)
    transports = {
        "standard": lambda v: standard_transport(unitSphere, curve, v),
        "expected": lambda v: expected_transport(unitSphere, sphereSpec, curve, v),
        "realized": lambda v: realized_transport(unitSphere, sphereRealization, curve, v),
    }
    transport = transports[regime]
    u, w, a = np.array([0.4, -1.0]), np.array([2.0, 0.3]), -1.7
    combined = transport(a * u + w).frames
    assert np.allclose(combined, a * transport(u).frames + transport(w).frames, rtol=0.0, atol=1e-10)
