"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Stochastic Riemannian geometry: randomized vector fields ``eps X``, their
connection, curvature, transport and Laplacian, checked numerically
"""
from ._version import get_versions
from .config import ConfigError, ExperimentConfig
from .geometry import (DomainError, ManifoldModel, MetricError,
                       CurvePath, ScalarFieldExpr, VectorFieldExpr,
                       christoffel_at, curvature_at, flat_torus, get_manifold, half_plane, sphere)
from .harness import run_experiment
from .quadrature import quadrature_integrate
from .randomField import (DegenerateRealizationError,
                          FieldRealization, FieldSpec,
                          eval_field, field_moments, sample_realization)
from .stochasticConnection import (stochastic_christoffel, stochastic_covariant_derivative,
                                   stochastic_metric, stochastic_torsion)
from .stochasticCurvature import (gauss_bonnet_deviation, stochastic_curvature_at,
                                  stochastic_riemann_4tensor, stochastic_sectional)
from .stochasticLaplace import (divergence_theorem_check, stochastic_divergence,
                                stochastic_gradient, stochastic_laplacian)
from .transport import (brownian_transport, expected_geodesic, expected_transport, holonomy,
                        realized_geodesic, realized_transport, recovery_limit_check, standard_transport)
from .verification import run_verify


__version__ = get_versions()['version']
del get_versions

__all__ = [
    "ConfigError", "ExperimentConfig",
    "DomainError", "ManifoldModel", "MetricError",
    "CurvePath", "ScalarFieldExpr", "VectorFieldExpr",
    "christoffel_at", "curvature_at", "flat_torus", "get_manifold", "half_plane", "sphere",
    "run_experiment",
    "quadrature_integrate",
    "DegenerateRealizationError", "FieldRealization", "FieldSpec",
    "eval_field", "field_moments", "sample_realization",
    "stochastic_christoffel", "stochastic_covariant_derivative", "stochastic_metric", "stochastic_torsion",
    "gauss_bonnet_deviation", "stochastic_curvature_at", "stochastic_riemann_4tensor", "stochastic_sectional",
    "divergence_theorem_check", "stochastic_divergence", "stochastic_gradient", "stochastic_laplacian",
    "brownian_transport", "expected_geodesic", "expected_transport", "holonomy",
    "realized_geodesic", "realized_transport", "recovery_limit_check", "standard_transport",
    "run_verify",
]
