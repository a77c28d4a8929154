"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Gradient, divergence and Laplace-Beltrami operator for the randomized
fields, and the divergence theorem on bands with boundary
"""
import datetime
import logging

import numpy as np

from .geometry import DIMENSION, VectorFieldExpr, christoffel_at
from .quadrature import band_rule, coarser, periodic_trapezoid
from .stochasticConnection import randomize


log = logging.getLogger(__name__)

DIVERGENCE_GRID = (48, 96)
DIVERGENCE_TOLERANCE = 1e-5
METHODS = ("formula", "direct")

def _log_volume_gradient(manifold, points):
    # d_i log sqrt(det g) = 1/2 tr(g^-1 d_i g)
    return 0.5 * np.einsum("...ab,...iba->...i", manifold.inverse_metric(points), manifold.metric_partials(points))

def gradient(manifold, f, points):
    """
    Riemannian gradient ``g^ij d_j f``
    """
    points = manifold.check_points(points)
    return np.einsum("...ij,...j->...i", manifold.inverse_metric(points), f.gradient(points))

def gradient_field(manifold, f):
    """
    The gradient of ``f`` as a vector field with analytic partials
    """
    def components(points):
        return np.einsum("...ij,...j->...i", manifold.inverse_metric(points), f.gradient(points))

    def partials(points):
        inverse = manifold.inverse_metric(points)
        # d_i g^kl = -g^ka d_i g_ab g^bl
        inverseDerivative = -np.einsum("...ka,...iab,...bl->...ikl", inverse, manifold.metric_partials(points), inverse)
        return (np.einsum("...ikl,...l->...ki", inverseDerivative, f.gradient(points))
                + np.einsum("...kl,...li->...ki", inverse, f.hessian(points)))

    return VectorFieldExpr(components, partials, "grad " + f.name)

def divergence(manifold, X, points):
    """
    Riemannian divergence with the volume weight,
    ``d_i X^i + X^i d_i log sqrt(det g)``
    """
    points = manifold.check_points(points)
    return (np.einsum("...ii->...", X.jacobian(points))
            + np.einsum("...i,...i->...", X(points), _log_volume_gradient(manifold, points)))

def divergence_christoffel(manifold, X, points):
    """
    Divergence as the trace of ``D X``, ``d_i X^i + Gamma^i_ik X^k``
    """
    points = manifold.check_points(points)
    return (np.einsum("...ii->...", X.jacobian(points))
            + np.einsum("...iik,...k->...", christoffel_at(manifold, points), X(points)))

def laplacian(manifold, f, points):
    """
    Laplace-Beltrami operator ``div grad f`` (nonpositive spectrum)
    """
    return divergence(manifold, gradient_field(manifold, f), points)

def stochastic_gradient(manifold, realization, f, points):
    """
    ``grad~ f = eps grad f``
    """
    points = manifold.check_points(points)
    return np.asarray(realization.eps(points))[..., None] * gradient(manifold, f, points)

def stochastic_gradient_field(manifold, realization, f):
    return randomize(gradient_field(manifold, f), realization)

def stochastic_divergence(manifold, realization, X, points, method="formula"):
    """
    ``div~ X = div(eps X)``

    ``formula`` evaluates ``eps div X + X(eps)`` with the Christoffel trace,
    ``direct`` takes the volume weighted divergence of the product field.
    """
    points = manifold.check_points(points)
    if method == "direct":
        return divergence(manifold, randomize(X, realization), points)
    if method != "formula":
        raise ValueError("'method' needs to be one of {0}".format(METHODS))
    eps, grad, _ = realization.evaluate(points)
    return eps * divergence_christoffel(manifold, X, points) + np.einsum("...i,...i->...", grad, X(points))

def stochastic_laplacian(manifold, realization, f, points, method="formula"):
    """
    ``Lap~ f = div~ grad~ f``

    ``formula`` evaluates ``eps^2 Lap f + 2 eps <grad f, grad eps>``,
    ``composed`` applies the stochastic divergence to the stochastic
    gradient field.
    """
    points = manifold.check_points(points)
    if method == "composed":
        return stochastic_divergence(manifold, realization, stochastic_gradient_field(manifold, realization, f),
                                     points, "direct")
    if method != "formula":
        raise ValueError("'method' needs to be one of formula or composed")
    eps, grad, _ = realization.evaluate(points)
    pairing = np.einsum("...i,...ij,...j->...", f.gradient(points), manifold.inverse_metric(points), grad)
    return eps ** 2 * laplacian(manifold, f, points) + 2 * eps * pairing

class BoundaryPatch(object):
    """
    Boundary circle ``x^axis = value`` of a band, parametrized by the
    periodic coordinate

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param axis: the non periodic axis the band is bounded in
    :type axis: int
    :param value: coordinate of the boundary circle
    :type value: float
    :param inwardSign: ``+1`` when the band lies at larger ``x^axis``
    :type inwardSign: int
    """
    def __init__(self, manifold, axis, value, inwardSign):
        self.manifold = manifold
        self.axis = axis
        self.other = 1 - axis
        self.value = float(value)
        self.inwardSign = inwardSign

    def __repr__(self):
        return "BoundaryPatch(axis={0}, value={1}, inwardSign={2})".format(self.axis, self.value, self.inwardSign)

    def points(self, s):
        s = np.asarray(s, dtype=float)
        points = np.empty(s.shape + (DIMENSION,))
        points[..., self.axis] = self.value
        points[..., self.other] = s
        return points

    def normal(self, s):
        """
        Inward g-unit normal ``+- g^{a.} / sqrt(g^{aa})``
        """
        inverse = self.manifold.inverse_metric(self.points(s))
        row = inverse[..., self.axis, :]
        return self.inwardSign * row / np.sqrt(inverse[..., self.axis, self.axis])[..., None]

    def line_element(self, s):
        return np.sqrt(self.manifold.metric(self.points(s))[..., self.other, self.other])

    def quadrature(self, count):
        lower, upper = self.manifold.lower[self.other], self.manifold.upper[self.other]
        return periodic_trapezoid(count, lower, upper)

class BandDomain(object):
    """
    Compact band ``lower <= x^axis <= upper`` of a chart whose other axis is
    periodic; its boundary is two coordinate circles
    """
    def __init__(self, manifold, axis, lower, upper, name="band"):
        if not manifold.periodic[1 - axis]:
            raise ValueError("'{0}' has no periodic axis to close the band".format(manifold.name))
        if not lower < upper:
            raise ValueError("'lower' needs to be smaller than 'upper'")
        self.manifold = manifold
        self.axis = axis
        self.lower = float(lower)
        self.upper = float(upper)
        self.name = name
        self.boundaries = [BoundaryPatch(manifold, axis, lower, +1), BoundaryPatch(manifold, axis, upper, -1)]
        for patch in self.boundaries:
            manifold.check_points(patch.points(np.zeros(1)))

    def __repr__(self):
        return "BandDomain(manifold={0}, axis={1}, lower={2}, upper={3})".format(
            self.manifold.name, self.axis, self.lower, self.upper)

    def contains(self, points):
        coordinate = np.asarray(points, dtype=float)[..., self.axis]
        return (coordinate >= self.lower) & (coordinate <= self.upper)

    def rule(self, grid):
        return band_rule(self.manifold, self.axis, self.lower, self.upper, grid)

def spherical_band(manifold, lower=0.3, upper=np.pi / 2):
    return BandDomain(manifold, 0, lower, upper, "spherical band")

def torus_strip(manifold, lower=0.5, upper=2.5):
    return BandDomain(manifold, 1, lower, upper, "torus strip")

class DivergenceCheck(object):
    """
    Both sides of the divergence theorem with refinement information
    """
    def __init__(self, lhs, rhs, grid, coarse, seed, degenerate, tolerance=DIVERGENCE_TOLERANCE):
        self.lhs = float(lhs)
        self.rhs = float(rhs)
        self.grid = tuple(grid)
        self.coarse = coarse
        self.seed = seed
        self.degenerate = degenerate
        self.tolerance = tolerance

    def __repr__(self):
        return "DivergenceCheck(lhs={0}, rhs={1}, residual={2})".format(self.lhs, self.rhs, self.residual)

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)

    @property
    def passed(self):
        return self.residual <= self.tolerance

    def to_dict(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "grid": list(self.grid),
            "coarse": self.coarse,
            "seed": self.seed,
            "degenerate": self.degenerate,
            "pass": self.passed,
        }

def _divergence_sides(domain, realization, X, grid):
    manifold = domain.manifold
    rule = domain.rule(grid)
    lhs = rule.integrate(stochastic_divergence(manifold, realization, X, rule.nodes, "direct"))
    randomField = randomize(X, realization)
    rhs = 0.0
    for patch in domain.boundaries:
        s, weights = patch.quadrature(grid[1])
        points = patch.points(s)
        flux = manifold.inner(points, patch.normal(s), randomField(points)) * patch.line_element(s)
        rhs -= np.dot(weights, flux)
    return lhs, rhs

def divergence_theorem_check(domain, realization, X, grid=DIVERGENCE_GRID):
    """
    ``int div~ X dV = - int <n, X~> ds`` with the inward normal ``n``

    :param domain: band with boundary
    :type domain: :class:`BandDomain`
    :param realization: field realization, degeneracy is reported not raised
    :type realization: :class:`FieldRealization`
    :param X: vector field
    :type X: :class:`VectorFieldExpr`
    :param grid: nodes across and along the band
    :type grid: tuple
    :returns: both sides and the residual on the coarser grid
    :rtype: :class:`DivergenceCheck`
    """
    startTime = datetime.datetime.utcnow()
    lhs, rhs = _divergence_sides(domain, realization, X, grid)
    coarseGrid = coarser(grid)
    coarseLhs, coarseRhs = _divergence_sides(domain, realization, X, coarseGrid)
    log.info("Divergence theorem on '%s' took '%s'", domain.name, datetime.datetime.utcnow() - startTime)
    return DivergenceCheck(lhs, rhs, grid, {"grid": list(coarseGrid), "lhs": float(coarseLhs),
                                            "rhs": float(coarseRhs),
                                            "residual": abs(float(coarseLhs - coarseRhs))},
                           realization.seed, realization.degenerate)
