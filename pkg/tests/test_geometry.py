import numpy as np
import pytest

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import samplePoints
from torsionfield.geometry import (DomainError,
                                   ManifoldModel,
                                   MetricError,
                                   CurvePath,
                                   christoffel_at,
                                   constant_scalar_field,
                                   coordinate_field,
                                   covariant_derivative,
                                   curvature_at,
                                   curvature_symmetry_residuals,
                                   gauss_curvature,
                                   geodesic_standard,
                                   get_manifold,
                                   latitude_curve,
                                   lie_bracket,
                                   line_curve,
                                   metric_compatibility_residual,
                                   random_scalar_field,
                                   random_vector_field,
                                   ricci_at,
                                   sectional_curvature,
                                   sphere)

def test_get_manifold():

    assert get_manifold("sphere", radius=2.0).params["radius"] == 2.0
    # radius only applies to the sphere
    assert get_manifold("flat-torus", radius=2.0).name == "flat-torus"
    with pytest.raises(ValueError):
        get_manifold("klein-bottle")
    with pytest.raises(ValueError):
        sphere(radius=-1.0)

def test_check_points(unitSphere, torus):

    unitSphere.check_points([[1.0, 0.0], [2.0, 12.0]])
    with pytest.raises(DomainError):
        unitSphere.check_points([0.05, 0.0])
    with pytest.raises(ValueError):
        unitSphere.check_points([1.0, 2.0, 3.0])

    # periodic coordinates are never out of range
    assert torus.contains(np.array([-4.0, 40.0]))
    assert np.allclose(torus.wrap([-np.pi, 3 * np.pi]), [np.pi, np.pi])
    assert torus.coordinate_distance([0.0, 0.0], [2 * np.pi, 0.0]) < 1e-12

def test_metric_error():

    degenerate = ManifoldModel("degenerate", (0.0, 0.0), (1.0, 1.0), (False, False),
                               lambda p: np.zeros(np.shape(p)[:-1] + (2, 2)),
                               lambda p: np.zeros(np.shape(p)[:-1] + (2, 2, 2)))
    with pytest.raises(MetricError):
        christoffel_at(degenerate, [0.5, 0.5])

def test_model_self_check(manifoldName, setup):

    manifold, _, _, points = setup
    check = manifold.self_check(points)
    assert check["min_eigenvalue"] > 0
    assert check["symmetry"] == 0.0
    assert check["partials"] < 1e-6

def test_model_self_check_detects_bad_partials():

    # partials of g = diag(1, x^2) with the wrong sign
    broken = ManifoldModel("broken", (0.5, 0.0), (2.0, 1.0), (False, False),
                           lambda p: np.stack([np.stack([np.ones(np.shape(p)[:-1]), np.zeros(np.shape(p)[:-1])], -1),
                                               np.stack([np.zeros(np.shape(p)[:-1]), np.asarray(p)[..., 0] ** 2],
                                                        -1)], -2),
                           lambda p: np.einsum("...,abc->...abc", -2 * np.asarray(p)[..., 0],
                                               np.array([[[0.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]]])))
    check = broken.self_check(np.array([[1.0, 0.5], [1.5, 0.2]]))
    assert check["min_eigenvalue"] > 0
    assert check["partials"] > 1.0

def test_sphere_christoffel(unitSphere):

    theta = 1.1
    gamma = christoffel_at(unitSphere, [theta, 0.3])
    assert abs(gamma[0, 1, 1] + np.sin(theta) * np.cos(theta)) < 1e-12
    assert abs(gamma[1, 0, 1] - 1 / np.tan(theta)) < 1e-12
    assert abs(gamma[1, 1, 0] - 1 / np.tan(theta)) < 1e-12
    assert abs(gamma[0, 0, 0]) < 1e-12

def test_gauss_curvature(torus, halfPlane):

    radius = 2.0
    assert np.allclose(gauss_curvature(sphere(radius), samplePoints(sphere(radius))), 1 / radius ** 2, atol=1e-8)
    assert np.allclose(gauss_curvature(halfPlane, samplePoints(halfPlane)), -1.0, atol=1e-6)
    assert np.allclose(gauss_curvature(torus, samplePoints(torus)), 0.0)

def test_curvature_symmetries(manifoldName, setup):

    manifold, _, _, points = setup
    _, rDown = curvature_at(manifold, points)
    residuals = curvature_symmetry_residuals(rDown)
    assert max(residuals.values()) < 1e-7

def test_ricci(unitSphere, halfPlane):

    points = samplePoints(unitSphere)
    ricci, scalar = ricci_at(unitSphere, points)
    # Ric = K g and S = 2K on surfaces
    assert np.allclose(ricci, unitSphere.metric(points), atol=1e-7)
    assert np.allclose(scalar, 2.0, atol=1e-7)
    _, scalar = ricci_at(halfPlane, samplePoints(halfPlane))
    assert np.allclose(scalar, -2.0, atol=1e-6)

@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 2.6), st.floats(0.0, 6.28), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0),
       st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_sectional_curvature_plane_invariance(theta, phi, a, b, c, d):

    assume(abs(a * d - b * c) > 0.5)
    manifold = sphere()
    u, v = np.array([a, b]), np.array([c, d])
    assert abs(sectional_curvature(manifold, [theta, phi], u, v) - 1.0) < 1e-6

def test_sectional_curvature_degenerate(unitSphere):

    with pytest.raises(ValueError):
        sectional_curvature(unitSphere, [1.0, 0.0], [1.0, 1.0], [2.0, 2.0])

def test_field_partials(manifoldName, setup):

    manifold, _, _, points = setup
    rng = np.random.default_rng(1)
    X, Y = random_vector_field(rng), random_vector_field(rng)
    f = random_scalar_field(rng)
    assert X.partials_error(points) < 1e-7
    assert (X + Y).partials_error(points) < 1e-7
    assert X.scale(-2.5).partials_error(points) < 1e-7
    assert X.times(f).partials_error(points) < 1e-7
    assert f.partials_error(points) < 1e-7
    assert np.allclose((X + Y)(points), X(points) + Y(points))
    assert np.allclose(X.times(f)(points), f(points)[:, None] * X(points))

def test_levi_civita(manifoldName, setup):

    manifold, _, _, points = setup
    rng = np.random.default_rng(2)
    X, Y, Z = (random_vector_field(rng, 0.5), random_vector_field(rng, 0.5),
               random_vector_field(rng, 0.5))
    # torsion free
    torsion = (covariant_derivative(manifold, X, Y, points) - covariant_derivative(manifold, Y, X, points)
               - lie_bracket(X, Y, points))
    assert np.max(np.abs(torsion)) < 1e-10
    # metric compatible up to the finite difference error
    assert np.max(np.abs(metric_compatibility_residual(manifold, X, Y, Z, points))) < 1e-5

def test_coordinate_and_constant_fields(torus):

    points = samplePoints(torus)
    assert np.allclose(coordinate_field(1)(points), [0.0, 1.0])
    assert np.allclose(coordinate_field(0).jacobian(points), 0.0)
    f = constant_scalar_field(3.0)
    assert np.allclose(f(points), 3.0)
    assert np.allclose(f.hessian(points), 0.0)

def test_curves(unitSphere, torus):

    latitude = latitude_curve(unitSphere, np.pi / 3)
    assert latitude.is_closed(unitSphere)
    assert np.allclose(latitude.velocity(np.array([0.0, 1.0])), [[0.0, 1.0], [0.0, 1.0]])
    with pytest.raises(DomainError):
        latitude_curve(unitSphere, 0.01)

    line = line_curve([1.0, 1.0], [1.0, 0.0], 2 * np.pi)
    assert line.is_closed(torus)
    assert not line_curve([1.0, 1.0], [1.0, 0.0], 1.0).is_closed(torus)

    times = np.linspace(0.0, 1.0, 11)
    curve = CurvePath.from_samples(times, np.stack([times, times ** 2], axis=-1),
                                   np.stack([np.ones_like(times), 2 * times], axis=-1))
    assert np.allclose(curve.position(0.55), [0.55, 0.55 ** 2])
    assert curve.duration == 1.0

def test_geodesic_sphere_equator(unitSphere):

    geodesic = geodesic_standard(unitSphere, [np.pi / 2, 0.0], [0.0, 1.0], np.pi, 1e-2)
    assert not geodesic.truncated
    assert np.allclose(geodesic.samples["x"][-1], [np.pi / 2, np.pi], atol=1e-9)
    assert geodesic.metadata["max_speed_drift"] < 1e-9

def test_geodesic_leaves_chart(halfPlane):

    # straight down towards the boundary of the box
    geodesic = geodesic_standard(halfPlane, [0.0, 1.0], [0.0, -1.0], 5.0, 1e-2)
    assert geodesic.metadata["exited"]
    assert geodesic.truncated
    assert np.all(halfPlane.contains(geodesic.samples["x"]))
