"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Randomized vector fields, the stochastic covariant derivative and its
torsion, Christoffel symbols and metric
"""
import logging

import numpy as np

from .geometry import (DIMENSION,
                       VectorFieldExpr,
                       christoffel_at,
                       covariant_derivative,
                       coordinate_field,
                       inner_product_gradient,
                       lie_bracket)
from .reports import IdentityReport, residual_norm


log = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-8
AXIOM_SCALARS = (-1.0, 0.0, 2.5)
METHODS = ("formula", "direct")

def _column(values):
    return np.asarray(values, dtype=float)[..., None]

class RandomizedField(VectorFieldExpr):
    """
    The random vector field ``eps X`` for one realization

    Partials follow the product rule with the analytic field gradient.

    :param base: deterministic field ``X``
    :type base: :class:`VectorFieldExpr`
    :param realization: field realization
    :type realization: :class:`FieldRealization`
    """
    def __init__(self, base, realization):
        self.base = base
        self.realization = realization
        super(RandomizedField, self).__init__(self._components, self._partials, "~" + base.name)

    def __repr__(self):
        return "RandomizedField(base={0}, seed={1})".format(self.base.name, self.realization.seed)

    def _components(self, points):
        return _column(self.realization.eps(points)) * self.base(points)

    def _partials(self, points):
        eps, gradient, _ = self.realization.evaluate(points)
        return (np.einsum("...k,...i->...ki", self.base(points), gradient)
                + _column(eps)[..., None] * self.base.jacobian(points))

def randomize(field, realization):
    return RandomizedField(field, realization)

class StochasticMetricValue(object):
    """
    ``g~ = eps^2 g`` at a point
    """
    def __init__(self, point, matrix):
        self.point = point
        self.matrix = matrix

    def __repr__(self):
        return "StochasticMetricValue(point={0}, matrix={1})".format(np.asarray(self.point).tolist(),
                                                                      np.asarray(self.matrix).tolist())

    def inner(self, u, v):
        return np.einsum("...i,...ij,...j->...", u, self.matrix, v)

def stochastic_metric(manifold, realization, points):
    points = manifold.check_points(points)
    eps = realization.eps(points)
    return StochasticMetricValue(points, _column(eps)[..., None] ** 2 * manifold.metric(points))

def stochastic_christoffel(manifold, realization, points):
    """
    ``Gamma~^k_ij = eps^2 Gamma^k_ij + eps d_i eps delta_jk``

    The Kronecker delta is taken literally in the chart, so the result is
    not symmetric in ``i, j``.

    :returns: array ``[..., k, i, j]``
    :rtype: :class:`numpy.ndarray`
    """
    points = manifold.check_points(points)
    eps, gradient, _ = realization.evaluate(points)
    eps = np.asarray(eps, dtype=float)
    return (eps[..., None, None, None] ** 2 * christoffel_at(manifold, points)
            + np.einsum("...i,jk->...kij", eps[..., None] * gradient, np.eye(DIMENSION)))

def stochastic_covariant_derivative(manifold, realization, X, Y, points, method="formula"):
    """
    Stochastic covariant derivative ``D~_X Y = D_{eps X}(eps Y)``

    ``formula`` evaluates ``eps^2 D_X Y + eps X(eps) Y`` while ``direct``
    differentiates the product fields.

    :param method: ``formula`` or ``direct``
    :type method: str
    :returns: tangent vector(s)
    :rtype: :class:`numpy.ndarray`
    """
    points = manifold.check_points(points)
    if method == "direct":
        return covariant_derivative(manifold, randomize(X, realization), randomize(Y, realization), points)
    if method != "formula":
        raise ValueError("'method' needs to be one of {0}".format(METHODS))
    eps, gradient, _ = realization.evaluate(points)
    rate = np.einsum("...i,...i->...", gradient, X(points))
    return (_column(eps) ** 2 * covariant_derivative(manifold, X, Y, points)
            + _column(eps * rate) * Y(points))

def stochastic_christoffel_direct(manifold, realization, points):
    """
    Christoffel symbols recovered from ``D~`` of the coordinate fields
    """
    fields = [coordinate_field(axis) for axis in range(DIMENSION)]
    columns = [[stochastic_covariant_derivative(manifold, realization, fields[i], fields[j], points, "direct")
                for j in range(DIMENSION)] for i in range(DIMENSION)]
    # columns[i][j][..., k] = Gamma~^k_ij
    return np.einsum("ij...k->...kij", np.array(columns))

def stochastic_torsion(manifold, realization, X, Y, points, method="formula"):
    """
    Stochastic torsion and its deterministic bracket variant

    :returns: ``(T~, T_det)`` with ``T~ = D~_X Y - D~_Y X - [eps X, eps Y]`` and
        ``T_det = D~_X Y - D~_Y X - [X, Y]``
    :rtype: tuple
    """
    points = manifold.check_points(points)
    difference = (stochastic_covariant_derivative(manifold, realization, X, Y, points, method)
                  - stochastic_covariant_derivative(manifold, realization, Y, X, points, method))
    randomBracket = lie_bracket(randomize(X, realization), randomize(Y, realization), points)
    return difference - randomBracket, difference - lie_bracket(X, Y, points)

def predicted_deterministic_torsion(manifold, realization, X, Y, points):
    """
    ``(eps^2 - 1)[X, Y] + eps X(eps) Y - eps Y(eps) X``
    """
    eps, gradient, _ = realization.evaluate(points)
    x, y = X(points), Y(points)
    xRate = np.einsum("...i,...i->...", gradient, x)
    yRate = np.einsum("...i,...i->...", gradient, y)
    return (_column(eps ** 2 - 1) * lie_bracket(X, Y, points)
            + _column(eps * xRate) * y - _column(eps * yRate) * x)

def _point_label(points):
    return np.asarray(points, dtype=float).tolist()

def connection_axiom_residuals(manifold, realization, f, X, Y, Z, a, points, method="formula",
                               tolerance=IDENTITY_TOLERANCE):
    """
    Residuals of the three connection axioms for ``D~``

    - ``D~_{fX+Y} Z = f D~_X Z + D~_Y Z``
    - ``D~_X (aY + Z) = a D~_X Y + D~_X Z``
    - ``D~_X (fY) = f D~_X Y + X~(f) Y~``

    :returns: one report per axiom
    :rtype: list
    """
    points = manifold.check_points(points)

    def derivative(A, B):
        return stochastic_covariant_derivative(manifold, realization, A, B, points, method)

    fValues = _column(f(points))
    additive = derivative(X.times(f) + Y, Z)
    additiveExpected = fValues * derivative(X, Z) + derivative(Y, Z)
    linear = derivative(X, Y.scale(a) + Z)
    linearExpected = a * derivative(X, Y) + derivative(X, Z)

    leibniz = derivative(X, Y.times(f))
    xTildeF = f.derivative_along(points, randomize(X, realization)(points))
    leibnizExpected = fValues * derivative(X, Y) + _column(xTildeF) * randomize(Y, realization)(points)

    seed = realization.seed
    extra = {"method": method, "a": a}
    return [
        IdentityReport("connection.additivity", additive, additiveExpected, tolerance,
                       point=_point_label(points), seed=seed, extra=extra),
        IdentityReport("connection.linearity", linear, linearExpected, tolerance,
                       point=_point_label(points), seed=seed, extra=extra),
        IdentityReport("connection.leibniz", leibniz, leibnizExpected, tolerance,
                       point=_point_label(points), seed=seed, extra=extra),
    ]

def metric_compatibility_residuals(manifold, realization, X, Y, Z, points, tolerance=IDENTITY_TOLERANCE):
    """
    Compatibility of ``D~`` with ``g~`` and its failure against the
    deterministic derivative

    (a) ``<D~_X Y, Z~> + <Y~, D~_X Z> - X~(<Y~, Z~>)`` is zero.
    (b) ``<D~_X Y, Z> + <Y, D~_X Z> - X(<Y, Z>)`` is compared with
        ``(eps^2 - 1) X(<Y, Z>) + 2 eps X(eps) <Y, Z>``.

    :returns: reports for (a) and (b)
    :rtype: list
    """
    points = manifold.check_points(points)
    eps, gradient, _ = realization.evaluate(points)
    yTilde, zTilde = randomize(Y, realization), randomize(Z, realization)
    x = X(points)
    derivativeY = stochastic_covariant_derivative(manifold, realization, X, Y, points)
    derivativeZ = stochastic_covariant_derivative(manifold, realization, X, Z, points)
    lhs = (manifold.inner(points, derivativeY, zTilde(points))
           + manifold.inner(points, yTilde(points), derivativeZ))
    deterministicLhs = (manifold.inner(points, derivativeY, Z(points))
                        + manifold.inner(points, Y(points), derivativeZ))
    randomPairingRate = np.einsum("...i,...i->...", inner_product_gradient(manifold, yTilde, zTilde, points),
                                  np.asarray(eps)[..., None] * x)
    pairingRate = np.einsum("...i,...i->...", inner_product_gradient(manifold, Y, Z, points), x)
    xRate = np.einsum("...i,...i->...", gradient, x)
    predicted = (eps ** 2 - 1) * pairingRate + 2 * eps * xRate * manifold.inner(points, Y(points), Z(points))
    seed = realization.seed
    return [
        IdentityReport("metric.compatibility", lhs, randomPairingRate, tolerance,
                       point=_point_label(points), seed=seed),
        IdentityReport("metric.incompatibility", deterministicLhs - pairingRate, predicted, tolerance,
                       point=_point_label(points), seed=seed,
                       extra={"deterministic_lhs": deterministicLhs, "deterministic_rate": pairingRate}),
    ]

def christoffel_metric_identity_residual(manifold, realization, points):
    """
    Evaluate ``d_k(eps^2 g_ij)`` against ``g_lj Gamma~^l_ik + g_il Gamma~^l_jk``
    exactly as written and report the residual tensor next to the
    discrepancy ``eps (2 d_k eps g_ij - d_i eps g_kj - d_j eps g_ik)``
    expected from expanding both sides. Never asserting.

    :returns: non asserting report, the residual lives in ``extra``
    :rtype: :class:`IdentityReport`
    """
    points = manifold.check_points(points)
    eps, gradient, _ = realization.evaluate(points)
    eps = np.asarray(eps, dtype=float)
    g = manifold.metric(points)
    dg = manifold.metric_partials(points)
    gammaTilde = stochastic_christoffel(manifold, realization, points)
    lhs = (2 * eps[..., None, None, None] * np.einsum("...k,...ij->...ijk", gradient, g)
           + eps[..., None, None, None] ** 2 * np.moveaxis(dg, -3, -1))
    rhs = (np.einsum("...lj,...lik->...ijk", g, gammaTilde)
           + np.einsum("...il,...ljk->...ijk", g, gammaTilde))
    predicted = eps[..., None, None, None] * (2 * np.einsum("...k,...ij->...ijk", gradient, g)
                                              - np.einsum("...i,...kj->...ijk", gradient, g)
                                              - np.einsum("...j,...ik->...ijk", gradient, g))
    residual = lhs - rhs
    return IdentityReport("christoffel.metric_identity", lhs, rhs, np.inf, point=_point_label(points),
                          seed=realization.seed, asserting=False,
                          extra={"residual": residual,
                                 "predicted_discrepancy": predicted,
                                 "discrepancy_match": residual_norm(residual, predicted)})
