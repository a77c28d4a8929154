"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Tensor product quadrature over charts and bands
"""
import logging

import numpy as np


log = logging.getLogger(__name__)

DEFAULT_GRID = (64, 128)

def gauss_legendre(count, a, b):
    """
    Gauss-Legendre nodes and weights on ``[a, b]``
    """
    x, w = np.polynomial.legendre.leggauss(int(count))
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w

def periodic_trapezoid(count, a, b):
    """
    Trapezoid rule for periodic integrands on ``[a, b)``
    """
    count = int(count)
    return a + (b - a) * np.arange(count) / count, np.full(count, (b - a) / count)

class QuadratureRule(object):
    """
    Nodes with weights that already include the Riemannian volume element

    :param nodes: points of shape (n, 2)
    :type nodes: :class:`numpy.ndarray`
    :param weights: weights of shape (n,)
    :type weights: :class:`numpy.ndarray`
    :param grid: node counts per axis
    :type grid: tuple
    """
    def __init__(self, nodes, weights, grid):
        self.nodes = nodes
        self.weights = weights
        self.grid = tuple(int(count) for count in grid)

    def __repr__(self):
        return "QuadratureRule(grid={0})".format(self.grid)

    def integrate(self, values):
        """
        Integrate sampled values of shape (n, ...)
        """
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))

def _tensor_rule(manifold, axisRules, grid):
    (a, wa), (b, wb) = axisRules
    first, second = np.meshgrid(a, b, indexing="ij")
    nodes = np.stack([first.ravel(), second.ravel()], axis=-1)
    weights = np.outer(wa, wb).ravel() * manifold.volume_element(nodes)
    return QuadratureRule(nodes, weights, grid)

def axis_rule(manifold, axis, count, lower=None, upper=None):
    """
    One dimensional rule for a chart axis: trapezoid on periodic axes,
    Gauss-Legendre otherwise
    """
    lower = manifold.lower[axis] if lower is None else lower
    upper = manifold.upper[axis] if upper is None else upper
    if manifold.periodic[axis] and lower == manifold.lower[axis] and upper == manifold.upper[axis]:
        return periodic_trapezoid(count, lower, upper)
    return gauss_legendre(count, lower, upper)

def chart_rule(manifold, grid=DEFAULT_GRID):
    """
    Rule over the whole chart box

    The sphere band uses Gauss-Legendre in ``cos(theta)``, which integrates
    the area element exactly.

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param grid: node counts per axis
    :type grid: tuple
    :returns: quadrature rule
    :rtype: :class:`QuadratureRule`
    """
    if manifold.name == "sphere":
        radius = manifold.params["radius"]
        u, wu = gauss_legendre(grid[0], np.cos(manifold.upper[0]), np.cos(manifold.lower[0]))
        phi, wphi = periodic_trapezoid(grid[1], manifold.lower[1], manifold.upper[1])
        theta, phiGrid = np.meshgrid(np.arccos(u), phi, indexing="ij")
        nodes = np.stack([theta.ravel(), phiGrid.ravel()], axis=-1)
        return QuadratureRule(nodes, np.outer(wu, wphi).ravel() * radius ** 2, grid)
    return _tensor_rule(manifold, [axis_rule(manifold, axis, count) for axis, count in enumerate(grid)], grid)

def band_rule(manifold, axis, lower, upper, grid=DEFAULT_GRID):
    """
    Rule over ``lower <= x^axis <= upper`` with the other axis periodic and
    covered completely
    """
    other = 1 - axis
    if not manifold.periodic[other]:
        raise ValueError("band needs the periodic axis {0} on '{1}'".format(other, manifold.name))
    rules = [None, None]
    rules[axis] = gauss_legendre(grid[0], lower, upper)
    rules[other] = periodic_trapezoid(grid[1], manifold.lower[other], manifold.upper[other])
    ordered = grid if axis == 0 else grid[::-1]
    return _tensor_rule(manifold, rules, ordered)

def coarser(grid):
    return tuple(max(2, int(count) // 2) for count in grid)

class QuadratureResult(object):
    """
    Integral on the requested grid together with the halved grid value
    """
    def __init__(self, value, coarseValue, grid):
        self.value = value
        self.coarseValue = coarseValue
        self.grid = tuple(grid)

    def __repr__(self):
        return "QuadratureResult(value={0}, refinementDelta={1})".format(self.value, self.refinementDelta)

    @property
    def refinementDelta(self):
        return float(np.max(np.abs(np.asarray(self.value) - np.asarray(self.coarseValue))))

def quadrature_integrate(manifold, integrand, grid=DEFAULT_GRID, ruleFactory=None):
    """
    Integrate a vectorized integrand over the chart with the Riemannian
    volume element

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param integrand: ``integrand(nodes)`` returning shape (n, ...)
    :type integrand: callable
    :param grid: node counts per axis
    :type grid: tuple
    :param ruleFactory: optional ``ruleFactory(grid)`` replacing the chart rule
    :type ruleFactory: callable
    :returns: integral with refinement delta
    :rtype: :class:`QuadratureResult`
    """
    if ruleFactory is None:
        ruleFactory = lambda counts: chart_rule(manifold, counts)
    fine = ruleFactory(grid)
    coarse = ruleFactory(coarser(grid))
    result = QuadratureResult(fine.integrate(integrand(fine.nodes)), coarse.integrate(integrand(coarse.nodes)), grid)
    log.debug("Integrated over '%s' with grid %s: %s", manifold.name, grid, result)
    return result
