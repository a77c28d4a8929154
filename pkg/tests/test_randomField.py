import numpy as np
import pytest

from conftest import samplePoints
from torsionfield.geometry import DomainError, central_difference, line_curve, latitude_curve, sphere
from torsionfield.randomField import (DegenerateRealizationError,
                                      FieldRealization,
                                      FieldSpec,
                                      alpha_beta_along,
                                      alpha_beta_at,
                                      enumerate_torus_modes,
                                      eval_field,
                                      field_moments,
                                      field_variance,
                                      make_basis,
                                      mix_seed,
                                      monte_carlo_moments,
                                      noiseless_realization,
                                      resample_realization,
                                      sample_coefficient_matrix,
                                      sample_coefficients,
                                      sample_realization)

def basisLaplacian(spec, points):
    """
    Laplace-Beltrami operator applied to every basis function
    """
    _, gradients, hessians = spec.basis.evaluate(points)
    if spec.manifold.name == "flat-torus":
        return hessians[..., 0, 0] + hessians[..., 1, 1]
    theta = points[..., 0, None]
    radius = spec.manifold.params["radius"]
    return (hessians[..., 0, 0] + gradients[..., 0] / np.tan(theta)
            + hessians[..., 1, 1] / np.sin(theta) ** 2) / radius ** 2

def test_mix_seed():

    assert mix_seed(0, 1) == mix_seed(0, 1)
    assert mix_seed(0, 1) != mix_seed(0, 2)
    assert mix_seed(0, 1) != mix_seed(1, 1)
    assert 0 <= mix_seed(123, 4) < 2 ** 64

def test_enumerate_torus_modes():

    modes = enumerate_torus_modes(4)
    assert modes == [(0, 1, "cos", "cos"), (0, 1, "cos", "sin"), (1, 0, "cos", "cos"), (1, 0, "sin", "cos")]
    modes = enumerate_torus_modes(64)
    assert len(set(modes)) == 64
    radii = [k ** 2 + l ** 2 for k, l, _, _ in modes]
    assert radii == sorted(radii)

def test_field_spec_validation(torus):

    with pytest.raises(ValueError):
        FieldSpec(torus, truncation=0)
    with pytest.raises(ValueError):
        FieldSpec(torus, decayExponent=2.0)
    with pytest.raises(ValueError):
        FieldSpec(torus, amplitude=-0.1)

    spec = FieldSpec(torus, truncation=4, decayExponent=3.0, amplitude=0.5)
    assert np.allclose(spec.variances, 0.5 * np.array([1.0, 1 / 8, 1 / 27, 1 / 64]))
    assert spec.to_dict() == {"manifold": "flat-torus", "basis": "torus-fourier", "N": 4,
                              "alpha_exp": 3.0, "c": 0.5}

def test_make_basis(torus, unitSphere, halfPlane):

    assert make_basis("auto", torus, 4).name == "torus-fourier"
    assert make_basis("auto", unitSphere, 4).name == "sphere-harmonics"
    bumps = make_basis("auto", halfPlane, 5)
    assert bumps.name == "bumps"
    assert not bumps.orthonormal
    assert len(bumps.labels) == 5
    assert make_basis(bumps, halfPlane, 5) is bumps
    with pytest.raises(ValueError):
        make_basis("wavelets", torus, 4)

def test_orthonormality(torusSpec, sphereSpec, halfPlane):

    assert torusSpec.orthonormality_residual() < 1e-12
    assert sphereSpec.orthonormality_residual() < 1e-10
    assert FieldSpec(sphere(2.0), truncation=8).orthonormality_residual() < 1e-10
    assert FieldSpec(halfPlane, truncation=4).orthonormality_residual() is None

def test_basis_eigenfunctions(torusSpec, sphereSpec):

    for spec in (torusSpec, sphereSpec, FieldSpec(sphere(2.0), truncation=8)):
        points = samplePoints(spec.manifold)
        values = spec.basis.values(points)
        assert np.allclose(basisLaplacian(spec, points), -spec.basis.eigenvalues * values, atol=1e-8)

def test_basis_partials(manifoldName, setup):

    _, spec, _, points = setup
    _, gradients, hessians = spec.basis.evaluate(points)
    difference = central_difference(spec.basis.values, points)
    assert np.allclose(difference, gradients, atol=1e-7)
    assert np.allclose(hessians, np.swapaxes(hessians, -1, -2))

def test_sup_norms(torusSpec, sphereSpec):

    for spec in (torusSpec, sphereSpec):
        values = spec.basis.values(samplePoints(spec.manifold, count=200))
        assert np.all(values ** 2 <= spec.basis.squared_sup_norms() + 1e-12)

def test_degenerate_realization(torusSpec):

    coefficients = np.zeros(torusSpec.truncation)
    coefficients[0] = 10.0
    realization = FieldRealization(torusSpec, coefficients, seed=42)
    assert realization.degenerate
    assert realization.minEps < 0
    with pytest.raises(DegenerateRealizationError) as error:
        realization.check_usable()
    assert error.value.seed == 42

    with pytest.raises(ValueError):
        FieldRealization(torusSpec, np.zeros(3))

def test_noiseless_realization(sphereSpec):

    realization = noiseless_realization(sphereSpec)
    points = samplePoints(sphereSpec.manifold)
    eps, gradient, hessian = eval_field(realization, points)
    assert realization.minEps == 1.0
    assert np.allclose(eps, 1.0)
    assert np.allclose(gradient, 0.0)
    assert np.allclose(hessian, 0.0)
    with pytest.raises(DomainError):
        eval_field(realization, [0.01, 0.0])

def test_realization_gradient(sphereRealization):

    points = samplePoints(sphereRealization.spec.manifold)
    assert np.allclose(central_difference(sphereRealization.eps, points), sphereRealization.gradient(points),
                       atol=1e-7)

def test_sampling_is_seeded(torusSpec):

    assert np.array_equal(sample_coefficients(torusSpec, 3), sample_coefficients(torusSpec, 3))
    seeds, matrix = sample_coefficient_matrix(torusSpec, 9, 3)
    assert seeds == [mix_seed(9, i) for i in range(3)]
    assert np.array_equal(matrix[1], sample_coefficients(torusSpec, seeds[1]))
    assert sample_realization(torusSpec, 3).seed == 3

def test_realization_export(torusRealization, torusSpec, torus):

    data = torusRealization.to_dict()
    assert data["spec"]["N"] == torusSpec.truncation
    replayed = FieldRealization.from_dict(torusSpec, data)
    assert np.array_equal(replayed.coefficients, torusRealization.coefficients)
    with pytest.raises(ValueError):
        FieldRealization.from_dict(FieldSpec(torus, truncation=torusSpec.truncation, amplitude=0.2), data)

def test_resample_realization(torus):

    realization, rejected = resample_realization(FieldSpec(torus, truncation=8, amplitude=0.0), 1)
    assert rejected == []
    assert realization.seed == 1

    with pytest.raises(DegenerateRealizationError):
        resample_realization(FieldSpec(torus, truncation=8, amplitude=1e6), 1, maxAttempts=3)

def test_moments(sphereSpec):

    points = samplePoints(sphereSpec.manifold, count=3)
    exact = np.array(field_moments(sphereSpec, points))
    assert np.allclose(exact[1], 1 + field_variance(sphereSpec, points))
    sampled = monte_carlo_moments(sphereSpec, points, 4000, masterSeed=2)
    assert sampled["n_samples"] == 4000
    assert np.all(np.abs(sampled["mean"] - exact) <= 5 * sampled["stderr"] + 1e-12)

def test_moments_without_noise(torus):

    spec = FieldSpec(torus, truncation=8, amplitude=0.0)
    points = samplePoints(torus, count=3)
    assert np.allclose(np.array(field_moments(spec, points)), 1.0)
    sampled = monte_carlo_moments(spec, points, 10)
    assert np.allclose(sampled["mean"], 1.0)
    assert np.allclose(sampled["stderr"], 0.0)

def test_alpha_beta(sphereSpec, unitSphere, halfPlane):

    curve = latitude_curve(unitSphere, np.pi / 3)
    times = np.linspace(0.0, 2 * np.pi, 9)
    alpha, beta = alpha_beta_along(sphereSpec, curve, times)
    assert np.allclose(alpha, 1 + sphereSpec.variance_at(curve.position(times)))
    # beta is half the derivative of alpha along the curve
    h = 1e-5
    plus, _ = alpha_beta_along(sphereSpec, curve, times[1:-1] + h)
    minus, _ = alpha_beta_along(sphereSpec, curve, times[1:-1] - h)
    assert np.allclose(beta[1:-1], (plus - minus) / (4 * h), atol=1e-7)

    spec = FieldSpec(halfPlane, truncation=4, amplitude=0.0)
    alpha, beta = alpha_beta_at(spec, np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]]))
    assert np.allclose(alpha, 1.0)
    assert np.allclose(beta, 0.0)
    with pytest.raises(DomainError):
        alpha_beta_along(spec, line_curve([0.0, 1.0], [0.0, -1.0], 2.0), np.linspace(0.0, 2.0, 5))
