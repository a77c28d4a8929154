import numpy as np
import pytest

from torsionfield.geometry import christoffel_at, covariant_derivative, random_scalar_field, random_vector_field
from torsionfield.randomField import noiseless_realization
from torsionfield.stochasticConnection import (christoffel_metric_identity_residual,
                                               connection_axiom_residuals,
                                               metric_compatibility_residuals,
                                               predicted_deterministic_torsion,
                                               randomize,
                                               stochastic_christoffel,
                                               stochastic_christoffel_direct,
                                               stochastic_covariant_derivative,
                                               stochastic_metric,
                                               stochastic_torsion)

def fields(seed=4):
    rng = np.random.default_rng(seed)
    return random_vector_field(rng, name="X"), random_vector_field(rng, name="Y"), \
        random_vector_field(rng, name="Z"), random_scalar_field(rng)

def test_randomized_field(manifoldName, setup):

    _, _, realization, points = setup
    X, _, _, _ = fields()
    randomField = randomize(X, realization)
    assert np.allclose(randomField(points), realization.eps(points)[:, None] * X(points))
    assert randomField.partials_error(points) < 1e-7
    assert "seed" in repr(randomField)

def test_derivative_methods_agree(manifoldName, setup):

    manifold, _, realization, points = setup
    X, Y, _, _ = fields()
    formula = stochastic_covariant_derivative(manifold, realization, X, Y, points)
    direct = stochastic_covariant_derivative(manifold, realization, X, Y, points, method="direct")
    assert np.allclose(formula, direct, rtol=0.0, atol=1e-10)
    with pytest.raises(ValueError):
        stochastic_covariant_derivative(manifold, realization, X, Y, points, method="symbolic")

def test_christoffel(manifoldName, setup):

    manifold, _, realization, points = setup
    gamma = stochastic_christoffel(manifold, realization, points)
    assert gamma.shape == (len(points), 2, 2, 2)
    assert np.allclose(gamma, stochastic_christoffel_direct(manifold, realization, points), rtol=0.0, atol=1e-10)

def test_christoffel_without_noise(unitSphere, sphereSpec):

    realization = noiseless_realization(sphereSpec)
    points = np.array([[1.0, 0.5], [2.0, 4.0]])
    assert np.allclose(stochastic_christoffel(unitSphere, realization, points), christoffel_at(unitSphere, points))
    X, Y, _, _ = fields()
    assert np.allclose(stochastic_covariant_derivative(unitSphere, realization, X, Y, points),
                       covariant_derivative(unitSphere, X, Y, points))

def test_christoffel_asymmetry(sphereRealization, unitSphere):

    # the delta term breaks the symmetry in the lower indices
    points = np.array([[1.0, 0.5]])
    gamma = stochastic_christoffel(unitSphere, sphereRealization, points)
    eps, gradient, _ = sphereRealization.evaluate(points)
    asymmetry = gamma - np.swapaxes(gamma, -1, -2)
    assert abs(asymmetry[0, 0, 0, 1] + eps[0] * gradient[0, 1]) < 1e-12
    assert np.allclose(asymmetry[0, 1, 0, 1], -asymmetry[0, 1, 1, 0])
    assert abs(asymmetry[0, 1, 0, 1] - eps[0] * gradient[0, 0]) < 1e-12

def test_torsion(manifoldName, setup):

    manifold, _, realization, points = setup
    X, Y, _, _ = fields()
    for method in ("formula", "direct"):
        torsion, deterministic = stochastic_torsion(manifold, realization, X, Y, points, method)
        assert np.max(np.abs(torsion)) < 1e-9
        assert np.allclose(deterministic, predicted_deterministic_torsion(manifold, realization, X, Y, points),
                           rtol=0.0, atol=1e-9)

def test_connection_axioms(manifoldName, setup):

    manifold, _, realization, points = setup
    X, Y, Z, f = fields()
    for method in ("formula", "direct"):
        for a in (-1.0, 0.0, 2.5):
            reports = connection_axiom_residuals(manifold, realization, f, X, Y, Z, a, points, method)
            assert [report.identityId for report in reports] == ["connection.additivity", "connection.linearity",
                                                                  "connection.leibniz"]
            assert all(report.passed for report in reports), reports

def test_metric_compatibility(manifoldName, setup):

    manifold, _, realization, points = setup
    X, Y, Z, _ = fields()
    compatibility, incompatibility = metric_compatibility_residuals(manifold, realization, X, Y, Z, points)
    assert compatibility.passed, compatibility
    assert incompatibility.passed, incompatibility

def test_stochastic_metric(sphereRealization, unitSphere):

    points = np.array([[1.0, 0.5], [2.0, 4.0]])
    value = stochastic_metric(unitSphere, sphereRealization, points)
    eps = sphereRealization.eps(points)
    assert np.allclose(value.matrix, eps[:, None, None] ** 2 * unitSphere.metric(points))
    u = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(value.inner(u, u), eps ** 2 * np.array([1.0, np.sin(2.0) ** 2]))

def test_christoffel_metric_identity(manifoldName, setup):

    manifold, _, realization, points = setup
    report = christoffel_metric_identity_residual(manifold, realization, points)
    assert not report.asserting
    assert report.identityId == "christoffel.metric_identity"
    assert report.extra["discrepancy_match"] < 1e-10
