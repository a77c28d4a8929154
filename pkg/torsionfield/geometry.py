"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Deterministic Riemannian machinery for two dimensional manifolds given in a
single coordinate chart

All evaluation functions accept a single point of shape (2,) or a batch of
points of shape (..., 2). Index conventions:

- metric partials ``dg[..., a, b, c] = d_a g_bc``
- vector field partials ``J[..., k, i] = d_i X^k``
- Christoffel symbols ``G[..., k, i, j] = Gamma^k_ij`` so that
  ``D_X Y = J_Y X + G(X, Y)``
- Christoffel partials ``dG[..., m, k, i, j] = d_m Gamma^k_ij``
- curvature ``R(d_i, d_j) d_k = Rup[..., l, k, i, j] d_l`` and
  ``Rdown[..., i, j, k, l] = <R(d_k, d_l) d_i, d_j>``
"""
import datetime
import logging

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .integrators import rk4_integrate


log = logging.getLogger(__name__)

DIMENSION = 2
FD_STEP = 1e-5
SPHERE_POLE_MARGIN = 0.15
HALF_PLANE_BOUNDS = ((-10.0, 10.0), (0.1, 10.0))
METRIC_CONDITION_LIMIT = 1e12
CLOSED_CURVE_TOLERANCE = 1e-8

class DomainError(ValueError):
    """
    Raised when a point lies outside the chart domain
    """

class MetricError(ArithmeticError):
    """
    Raised when the metric is singular or badly conditioned
    """

class ManifoldModel(object):
    """
    A two dimensional manifold covered by one coordinate chart

    :param name: manifold name
    :type name: str
    :param lower: lower chart bounds per coordinate
    :type lower: sequence
    :param upper: upper chart bounds per coordinate
    :type upper: sequence
    :param periodic: periodicity flag per coordinate
    :type periodic: sequence
    :param metric: ``metric(points)`` returning shape (..., 2, 2)
    :type metric: callable
    :param metricPartials: ``metricPartials(points)`` returning shape (..., 2, 2, 2)
    :type metricPartials: callable
    :param closed: whether the chart closure covers a closed surface
    :type closed: bool
    :param eulerCharacteristic: Euler characteristic of the closed surface
    :type eulerCharacteristic: int
    :param defaultPoint: representative interior point
    :type defaultPoint: sequence
    :param params: construction parameters such as the radius
    :type params: dict
    """
    def __init__(self, name, lower, upper, periodic, metric, metricPartials,
                 closed=False, eulerCharacteristic=None, defaultPoint=None, params=None):
        self.name = name
        self.dim = DIMENSION
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.periodic = tuple(bool(flag) for flag in periodic)
        self.metric = metric
        self.metric_partials = metricPartials
        self.closed = closed
        self.eulerCharacteristic = eulerCharacteristic
        if defaultPoint is None:
            defaultPoint = 0.5 * (self.lower + self.upper)
        self.defaultPoint = np.asarray(defaultPoint, dtype=float)
        self.params = dict(params or {})

    def __repr__(self):
        return "ManifoldModel(name={0}, lower={1}, upper={2}, periodic={3}, params={4})".format(
            self.name, self.lower.tolist(), self.upper.tolist(), self.periodic, self.params)

    @property
    def period(self):
        return self.upper - self.lower

    def contains(self, points):
        """
        Check which points lie in the chart domain. Periodic coordinates are
        never out of range.

        :param points: points of shape (..., 2)
        :type points: :class:`numpy.ndarray`
        :returns: boolean mask of shape (...)
        :rtype: :class:`numpy.ndarray`
        """
        points = np.asarray(points, dtype=float)
        inside = np.isfinite(points).all(axis=-1)
        for axis in range(self.dim):
            if self.periodic[axis]:
                continue
            coordinate = points[..., axis]
            inside &= (coordinate >= self.lower[axis]) & (coordinate <= self.upper[axis])
        return inside

    def check_points(self, points):
        """
        Validate points against the chart domain

        :param points: points of shape (..., 2)
        :type points: :class:`numpy.ndarray`
        :returns: points as float array
        :rtype: :class:`numpy.ndarray`
        :raises DomainError: if any point is outside the chart
        """
        points = np.asarray(points, dtype=float)
        if points.shape[-1:] != (self.dim,):
            raise ValueError("points need a trailing axis of length {0}, got shape {1}".format(
                self.dim, points.shape))
        inside = self.contains(points)
        if not np.all(inside):
            outside = points[~inside] if points.ndim > 1 else points
            raise DomainError("'{0}' outside the '{1}' chart domain [{2}, {3}]".format(
                np.asarray(outside).reshape(-1, self.dim)[0].tolist(), self.name,
                self.lower.tolist(), self.upper.tolist()))
        return points

    def wrap(self, points):
        """
        Reduce periodic coordinates into the chart range
        """
        points = np.array(points, dtype=float)
        for axis in range(self.dim):
            if self.periodic[axis]:
                points[..., axis] = self.lower[axis] + np.mod(
                    points[..., axis] - self.lower[axis], self.period[axis])
        return points

    def coordinate_distance(self, a, b):
        """
        Euclidean coordinate distance modulo the periodic axes
        """
        difference = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        for axis in range(self.dim):
            if self.periodic[axis]:
                period = self.period[axis]
                difference[..., axis] = difference[..., axis] - period * np.round(
                    difference[..., axis] / period)
        return np.linalg.norm(difference, axis=-1)

    def inverse_metric(self, points):
        return np.linalg.inv(self.metric(points))

    def volume_element(self, points):
        return np.sqrt(np.linalg.det(self.metric(points)))

    def inner(self, points, u, v):
        """
        Metric inner product ``g(u, v)`` at the given points
        """
        return np.einsum("...i,...ij,...j->...", u, self.metric(points), v)

    def norm(self, points, v):
        return np.sqrt(self.inner(points, v, v))

    def sample_points(self, rng, count, margin=0.0):
        """
        Uniformly sample chart points, keeping ``margin`` away from the
        non periodic bounds

        :param rng: random generator
        :type rng: :class:`numpy.random.Generator`
        :param count: number of points
        :type count: int
        :param margin: distance to keep from non periodic bounds
        :type margin: float
        :returns: points of shape (count, 2)
        :rtype: :class:`numpy.ndarray`
        """
        lower = self.lower.copy()
        upper = self.upper.copy()
        for axis in range(self.dim):
            if not self.periodic[axis]:
                lower[axis] += margin
                upper[axis] -= margin
        return lower + (upper - lower) * rng.random((count, self.dim))

    def self_check(self, points, h=FD_STEP):
        """
        Model invariants at ``points``: the metric is symmetric positive
        definite and ``metric_partials`` agrees with central differences of
        ``metric``

        :param points: chart points
        :type points: :class:`numpy.ndarray`
        :returns: ``min_eigenvalue``, ``symmetry`` defect and relative
            ``partials`` residual
        :rtype: dict
        """
        points = self.check_points(points)
        g = self.metric(points)
        transposed = np.swapaxes(g, -1, -2)
        eigenvalues = np.linalg.eigvalsh(0.5 * (g + transposed))
        dg = self.metric_partials(points)
        # central_difference appends the derivative axis, dg carries it first
        numeric = np.moveaxis(central_difference(self.metric, points, h), -1, -3)
        return {
            "min_eigenvalue": float(np.min(eigenvalues)),
            "symmetry": float(np.max(np.abs(g - transposed))),
            "partials": float(np.max(np.abs(numeric - dg) / np.maximum(1.0, np.abs(dg)))),
        }

def flat_torus():
    """
    Flat torus ``[0, 2pi)^2`` with the Euclidean metric
    """
    def metric(points):
        points = np.asarray(points, dtype=float)
        return np.broadcast_to(np.eye(DIMENSION), points.shape[:-1] + (DIMENSION, DIMENSION)).copy()

    def metricPartials(points):
        points = np.asarray(points, dtype=float)
        return np.zeros(points.shape[:-1] + (DIMENSION,) * 3)

    return ManifoldModel("flat-torus", (0.0, 0.0), (2 * np.pi, 2 * np.pi), (True, True),
                         metric, metricPartials, closed=True, eulerCharacteristic=0,
                         defaultPoint=(np.pi, np.pi))

def sphere(radius=1.0):
    """
    Round sphere of the given radius in polar coordinates ``(theta, phi)``.
    The chart stays ``0.15`` away from both poles.

    :param radius: sphere radius
    :type radius: float
    :returns: manifold model
    :rtype: :class:`ManifoldModel`
    """
    radius = float(radius)
    if radius <= 0:
        raise ValueError("'radius' needs to be positive")
    r2 = radius ** 2

    def metric(points):
        theta = np.asarray(points, dtype=float)[..., 0]
        g = np.zeros(theta.shape + (DIMENSION, DIMENSION))
        g[..., 0, 0] = r2
        g[..., 1, 1] = r2 * np.sin(theta) ** 2
        return g

    def metricPartials(points):
        theta = np.asarray(points, dtype=float)[..., 0]
        dg = np.zeros(theta.shape + (DIMENSION,) * 3)
        dg[..., 0, 1, 1] = 2 * r2 * np.sin(theta) * np.cos(theta)
        return dg

    return ManifoldModel("sphere", (SPHERE_POLE_MARGIN, 0.0),
                         (np.pi - SPHERE_POLE_MARGIN, 2 * np.pi), (False, True),
                         metric, metricPartials, closed=True, eulerCharacteristic=2,
                         defaultPoint=(np.pi / 2, 0.0), params={"radius": radius})

def half_plane():
    """
    Poincare upper half plane restricted to a bounded box
    """
    def metric(points):
        y = np.asarray(points, dtype=float)[..., 1]
        g = np.zeros(y.shape + (DIMENSION, DIMENSION))
        g[..., 0, 0] = g[..., 1, 1] = 1.0 / y ** 2
        return g

    def metricPartials(points):
        y = np.asarray(points, dtype=float)[..., 1]
        dg = np.zeros(y.shape + (DIMENSION,) * 3)
        dg[..., 1, 0, 0] = dg[..., 1, 1, 1] = -2.0 / y ** 3
        return dg

    (xLow, xHigh), (yLow, yHigh) = HALF_PLANE_BOUNDS
    return ManifoldModel("half-plane", (xLow, yLow), (xHigh, yHigh), (False, False),
                         metric, metricPartials, defaultPoint=(0.0, 1.0))

MANIFOLDS = {
    "flat-torus": flat_torus,
    "sphere": sphere,
    "half-plane": half_plane,
}

def get_manifold(name, **params):
    """
    Build one of the built in manifolds by name

    :param name: one of ``flat-torus``, ``sphere`` or ``half-plane``
    :type name: str
    :returns: manifold model
    :rtype: :class:`ManifoldModel`
    """
    if name not in MANIFOLDS:
        raise ValueError("Unknown manifold '{0}', expected one of {1}".format(name, sorted(MANIFOLDS)))
    if name != "sphere":
        params.pop("radius", None)
    return MANIFOLDS[name](**params)

def _checked_inverse(g):
    det = np.linalg.det(g)
    scale = np.einsum("...ii->...", g) ** 2
    if np.any(~np.isfinite(det)) or np.any(det <= scale / METRIC_CONDITION_LIMIT):
        raise MetricError("metric is singular or badly conditioned (det={0})".format(np.min(det)))
    return np.linalg.inv(g)

def _christoffel(manifold, points):
    g = manifold.metric(points)
    dg = manifold.metric_partials(points)
    ginv = _checked_inverse(g)
    # t[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    t = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    gamma = 0.5 * np.einsum("...kl,...ijl->...kij", ginv, t)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))

def christoffel_at(manifold, points):
    """
    Christoffel symbols of the Levi-Civita connection, symmetric in the
    lower indices

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param points: points of shape (..., 2)
    :type points: :class:`numpy.ndarray`
    :returns: ``Gamma[..., k, i, j]``
    :rtype: :class:`numpy.ndarray`
    :raises DomainError: outside the chart
    :raises MetricError: singular metric
    """
    return _christoffel(manifold, manifold.check_points(points))

def central_difference(fn, points, h=FD_STEP):
    """
    Central differences of ``fn`` in every coordinate direction. The
    derivative index is appended as the last axis.
    """
    points = np.asarray(points, dtype=float)
    derivatives = []
    for axis in range(DIMENSION):
        step = np.zeros(DIMENSION)
        step[axis] = h
        derivatives.append((fn(points + step) - fn(points - step)) / (2 * h))
    return np.stack(derivatives, axis=-1)

def christoffel_partials_at(manifold, points, h=FD_STEP):
    """
    Coordinate partials ``dGamma[..., m, k, i, j]`` by central differences
    """
    points = manifold.check_points(points)
    partials = central_difference(lambda q: _christoffel(manifold, q), points, h)
    return np.moveaxis(partials, -1, -4)

def riemann_up(gamma, dGamma):
    """
    ``R^l_kij`` from Christoffel symbols and their partials, laid out as
    ``Rup[..., l, k, i, j]``
    """
    return (np.einsum("...iljk->...lkij", dGamma)
            - np.einsum("...jlik->...lkij", dGamma)
            + np.einsum("...lim,...mjk->...lkij", gamma, gamma)
            - np.einsum("...ljm,...mik->...lkij", gamma, gamma))

def lower_riemann(rUp, g):
    """
    ``Rdown[..., i, j, k, l] = g_jm R^m_ikl``
    """
    return np.einsum("...mikl,...mj->...ijkl", rUp, g)

def curvature_at(manifold, points, h=FD_STEP):
    """
    Riemann curvature tensor in both index positions

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param points: points of shape (..., 2)
    :type points: :class:`numpy.ndarray`
    :param h: finite difference step for the Christoffel partials
    :type h: float
    :returns: ``(Rup, Rdown)``
    :rtype: tuple
    """
    points = manifold.check_points(points)
    rUp = riemann_up(_christoffel(manifold, points), christoffel_partials_at(manifold, points, h))
    return rUp, lower_riemann(rUp, manifold.metric(points))

def curvature_symmetry_residuals(rDown):
    """
    Skew, pair exchange and first Bianchi residuals of a lowered
    curvature tensor
    """
    skewFirst = rDown + np.swapaxes(rDown, -4, -3)
    skewLast = rDown + np.swapaxes(rDown, -2, -1)
    exchange = rDown - np.einsum("...ijkl->...klij", rDown)
    bianchi = (rDown + np.einsum("...ijkl->...iklj", rDown)
               + np.einsum("...ijkl->...iljk", rDown))
    return {
        "skew_first": float(np.max(np.abs(skewFirst))),
        "skew_last": float(np.max(np.abs(skewLast))),
        "pair_exchange": float(np.max(np.abs(exchange))),
        "first_bianchi": float(np.max(np.abs(bianchi))),
    }

def curvature_operator(rDown, x, y, z, w):
    """
    Four argument curvature ``<R(z, w) x, y>``
    """
    return np.einsum("...ijkl,...i,...j,...k,...l->...", rDown, x, y, z, w)

def gram_determinant(g, u, v):
    return (np.einsum("...i,...ij,...j->...", u, g, u) * np.einsum("...i,...ij,...j->...", v, g, v)
            - np.einsum("...i,...ij,...j->...", u, g, v) ** 2)

def sectional_curvature(manifold, points, u, v, h=FD_STEP):
    """
    Sectional curvature of the plane spanned by ``u`` and ``v``

    :raises ValueError: if ``u`` and ``v`` are linearly dependent
    """
    points = manifold.check_points(points)
    _, rDown = curvature_at(manifold, points, h)
    g = manifold.metric(points)
    gram = gram_determinant(g, u, v)
    scale = manifold.inner(points, u, u) * manifold.inner(points, v, v)
    if np.any(gram <= 1e-12 * scale):
        raise ValueError("'u' and 'v' need to be linearly independent")
    return curvature_operator(rDown, v, u, u, v) / gram

def gauss_curvature(manifold, points, h=FD_STEP):
    """
    Gaussian curvature ``R_1221 / det g`` (vectorized)
    """
    points = manifold.check_points(points)
    _, rDown = curvature_at(manifold, points, h)
    return rDown[..., 1, 0, 0, 1] / np.linalg.det(manifold.metric(points))

def ricci_at(manifold, points, h=FD_STEP):
    """
    Ricci tensor ``Ric_ab = R^l_bla`` and scalar curvature
    """
    points = manifold.check_points(points)
    rUp, _ = curvature_at(manifold, points, h)
    ricci = np.einsum("...lbla->...ab", rUp)
    scalar = np.einsum("...ab,...ab->...", manifold.inverse_metric(points), ricci)
    return ricci, scalar

class VectorFieldExpr(object):
    """
    Smooth vector field with analytic coordinate partials

    :param components: ``components(points)`` returning shape (..., 2)
    :type components: callable
    :param partials: ``partials(points)`` returning ``J[..., k, i] = d_i X^k``
    :type partials: callable
    :param name: display name
    :type name: str
    """
    def __init__(self, components, partials, name="X"):
        self.components = components
        self.partials = partials
        self.name = name

    def __repr__(self):
        return "VectorFieldExpr(name={0})".format(self.name)

    def __call__(self, points):
        return self.components(np.asarray(points, dtype=float))

    def jacobian(self, points):
        return self.partials(np.asarray(points, dtype=float))

    def __add__(self, other):
        return VectorFieldExpr(lambda p: self(p) + other(p),
                               lambda p: self.jacobian(p) + other.jacobian(p),
                               "({0} + {1})".format(self.name, other.name))

    def scale(self, factor):
        return VectorFieldExpr(lambda p: factor * self(p),
                               lambda p: factor * self.jacobian(p),
                               "{0}*{1}".format(factor, self.name))

    def times(self, scalar):
        """
        Pointwise product ``f X`` with a scalar field
        """
        def components(p):
            return np.asarray(scalar(p))[..., None] * self(p)

        def partials(p):
            return (np.einsum("...k,...i->...ki", self(p), scalar.gradient(p))
                    + np.asarray(scalar(p))[..., None, None] * self.jacobian(p))

        return VectorFieldExpr(components, partials, "{0}*{1}".format(scalar.name, self.name))

    def derivative_along(self, points, direction):
        """
        Coordinate directional derivative ``J_X direction``
        """
        return np.einsum("...ki,...i->...k", self.jacobian(points), direction)

    def partials_error(self, points, h=FD_STEP):
        """
        Largest deviation between the analytic and finite difference partials
        """
        return float(np.max(np.abs(central_difference(self, points, h) - self.jacobian(points))))

class ScalarFieldExpr(object):
    """
    Smooth scalar field with analytic gradient and Hessian in coordinates
    """
    def __init__(self, value, gradientPartials, secondPartials, name="f"):
        self.value = value
        self.gradientPartials = gradientPartials
        self.secondPartials = secondPartials
        self.name = name

    def __repr__(self):
        return "ScalarFieldExpr(name={0})".format(self.name)

    def __call__(self, points):
        return self.value(np.asarray(points, dtype=float))

    def gradient(self, points):
        return self.gradientPartials(np.asarray(points, dtype=float))

    def hessian(self, points):
        return self.secondPartials(np.asarray(points, dtype=float))

    def derivative_along(self, points, direction):
        return np.einsum("...i,...i->...", self.gradient(points), direction)

    def partials_error(self, points, h=FD_STEP):
        gradientError = np.max(np.abs(central_difference(self, points, h) - self.gradient(points)))
        hessianError = np.max(np.abs(central_difference(self.gradient, points, h) - self.hessian(points)))
        return float(max(gradientError, hessianError))

def coordinate_field(index):
    """
    Coordinate vector field ``d_index``
    """
    direction = np.zeros(DIMENSION)
    direction[index] = 1.0
    return constant_vector_field(direction, name="d{0}".format(index + 1))

def constant_vector_field(vector, name=None):
    vector = np.asarray(vector, dtype=float)

    def components(p):
        return np.broadcast_to(vector, np.shape(p)[:-1] + (DIMENSION,)).copy()

    def partials(p):
        return np.zeros(np.shape(p)[:-1] + (DIMENSION, DIMENSION))

    return VectorFieldExpr(components, partials, name or "const{0}".format(vector.tolist()))

def constant_scalar_field(value, name=None):
    value = float(value)
    return ScalarFieldExpr(lambda p: np.full(np.shape(p)[:-1], value),
                           lambda p: np.zeros(np.shape(p)[:-1] + (DIMENSION,)),
                           lambda p: np.zeros(np.shape(p)[:-1] + (DIMENSION, DIMENSION)),
                           name or str(value))

def _vector_basis(p):
    x, y = p[..., 0], p[..., 1]
    values = np.stack([np.ones_like(x), np.sin(x), np.cos(y), np.sin(x + y)], axis=-1)
    zero = np.zeros_like(x)
    gradients = np.stack([
        np.stack([zero, zero], axis=-1),
        np.stack([np.cos(x), zero], axis=-1),
        np.stack([zero, -np.sin(y)], axis=-1),
        np.stack([np.cos(x + y), np.cos(x + y)], axis=-1),
    ], axis=-2)
    return values, gradients

def random_vector_field(rng, scale=1.0, name="X"):
    """
    Random trigonometric vector field, smooth on every built in chart

    :param rng: random generator
    :type rng: :class:`numpy.random.Generator`
    :param scale: coefficient scale
    :type scale: float
    :returns: vector field
    :rtype: :class:`VectorFieldExpr`
    """
    coefficients = scale * rng.standard_normal((DIMENSION, 4))

    def components(p):
        values, _ = _vector_basis(p)
        return np.einsum("kb,...b->...k", coefficients, values)

    def partials(p):
        _, gradients = _vector_basis(p)
        return np.einsum("kb,...bi->...ki", coefficients, gradients)

    return VectorFieldExpr(components, partials, name)

def _scalar_basis(p):
    x, y = p[..., 0], p[..., 1]
    sx, cx, sy, cy = np.sin(x), np.cos(x), np.sin(y), np.cos(y)
    cxy, sxy = np.cos(x + 2 * y), np.sin(x + 2 * y)
    one, zero = np.ones_like(x), np.zeros_like(x)
    values = np.stack([one, sx, cy, sx * cy, cxy], axis=-1)
    gradients = np.stack([
        np.stack([zero, zero], axis=-1),
        np.stack([cx, zero], axis=-1),
        np.stack([zero, -sy], axis=-1),
        np.stack([cx * cy, -sx * sy], axis=-1),
        np.stack([-sxy, -2 * sxy], axis=-1),
    ], axis=-2)

    def matrix(a, b, c):
        return np.stack([np.stack([a, b], axis=-1), np.stack([b, c], axis=-1)], axis=-2)

    hessians = np.stack([
        matrix(zero, zero, zero),
        matrix(-sx, zero, zero),
        matrix(zero, zero, -cy),
        matrix(-sx * cy, -cx * sy, -sx * cy),
        matrix(-cxy, -2 * cxy, -4 * cxy),
    ], axis=-3)
    return values, gradients, hessians

def random_scalar_field(rng, scale=1.0, name="f"):
    """
    Random trigonometric scalar field with analytic Hessian
    """
    coefficients = scale * rng.standard_normal(5)
    return ScalarFieldExpr(
        lambda p: np.einsum("b,...b->...", coefficients, _scalar_basis(p)[0]),
        lambda p: np.einsum("b,...bi->...i", coefficients, _scalar_basis(p)[1]),
        lambda p: np.einsum("b,...bij->...ij", coefficients, _scalar_basis(p)[2]),
        name)

def covariant_derivative(manifold, X, Y, points):
    """
    Levi-Civita covariant derivative ``D_X Y``
    """
    points = manifold.check_points(points)
    x = X(points)
    return (Y.derivative_along(points, x)
            + np.einsum("...kij,...i,...j->...k", _christoffel(manifold, points), x, Y(points)))

def lie_bracket(X, Y, points):
    """
    Lie bracket ``[X, Y] = J_Y X - J_X Y``
    """
    return Y.derivative_along(points, X(points)) - X.derivative_along(points, Y(points))

def inner_product_gradient(manifold, Y, Z, points):
    """
    Analytic coordinate gradient of ``q -> g_q(Y(q), Z(q))``
    """
    y, z = Y(points), Z(points)
    g = manifold.metric(points)
    return (np.einsum("...iab,...a,...b->...i", manifold.metric_partials(points), y, z)
            + np.einsum("...ab,...ai,...b->...i", g, Y.jacobian(points), z)
            + np.einsum("...ab,...a,...bi->...i", g, y, Z.jacobian(points)))

def metric_compatibility_residual(manifold, X, Y, Z, points, h=FD_STEP):
    """
    ``X<Y, Z> - <D_X Y, Z> - <Y, D_X Z>`` with the left hand side by central
    differences along ``X``
    """
    points = manifold.check_points(points)
    x = X(points)

    def pairing(q):
        return manifold.inner(q, Y(q), Z(q))

    lhs = (pairing(points + h * x) - pairing(points - h * x)) / (2 * h)
    rhs = (manifold.inner(points, covariant_derivative(manifold, X, Y, points), Z(points))
           + manifold.inner(points, Y(points), covariant_derivative(manifold, X, Z, points)))
    return lhs - rhs

class CurvePath(object):
    """
    Smooth parametrized curve in the chart

    :param position: ``position(t)`` returning shape (..., 2)
    :type position: callable
    :param velocity: ``velocity(t)`` returning shape (..., 2)
    :type velocity: callable
    :param tSpan: parameter interval
    :type tSpan: tuple
    :param name: curve description
    :type name: str
    :param metadata: integration metadata (step, flags, drift)
    :type metadata: dict
    """
    def __init__(self, position, velocity, tSpan, name="curve", samples=None, metadata=None):
        self.position = position
        self.velocity = velocity
        self.tSpan = (float(tSpan[0]), float(tSpan[1]))
        self.name = name
        self.samples = samples
        self.metadata = dict(metadata or {})

    def __repr__(self):
        return "CurvePath(name={0}, tSpan={1})".format(self.name, self.tSpan)

    @property
    def duration(self):
        return self.tSpan[1] - self.tSpan[0]

    @property
    def truncated(self):
        return bool(self.metadata.get("exited") or self.metadata.get("aborted"))

    def is_closed(self, manifold, tolerance=CLOSED_CURVE_TOLERANCE):
        return bool(manifold.coordinate_distance(self.position(self.tSpan[0]),
                                                 self.position(self.tSpan[1])) <= tolerance)

    @staticmethod
    def from_samples(times, positions, velocities, name="curve", metadata=None):
        """
        Cubic Hermite interpolant through integrated samples
        """
        times = np.asarray(times, dtype=float)
        positions = np.asarray(positions, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        samples = {"t": times, "x": positions, "v": velocities}
        if len(times) < 2:
            return CurvePath(lambda t: positions[0] + 0.0 * np.asarray(t)[..., None],
                             lambda t: velocities[0] + 0.0 * np.asarray(t)[..., None],
                             (times[0], times[0]), name, samples, metadata)
        spline = CubicHermiteSpline(times, positions, velocities, axis=0)
        return CurvePath(spline, spline.derivative(), (times[0], times[-1]), name, samples, metadata)

def latitude_curve(manifold, theta0, tSpan=(0.0, 2 * np.pi)):
    """
    Latitude circle ``t -> (theta0, t)`` on the sphere chart
    """
    manifold.check_points((theta0, 0.0))

    def position(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.full_like(t, theta0), t], axis=-1)

    def velocity(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.zeros_like(t), np.ones_like(t)], axis=-1)

    return CurvePath(position, velocity, tSpan, "latitude({0})".format(theta0),
                     metadata={"kind": "latitude", "latitude": float(theta0)})

def line_curve(p0, direction, length=1.0):
    """
    Coordinate straight line ``t -> p0 + t direction`` for ``t`` in ``[0, length]``
    """
    p0 = np.asarray(p0, dtype=float)
    direction = np.asarray(direction, dtype=float)

    def position(t):
        return p0 + np.asarray(t, dtype=float)[..., None] * direction

    def velocity(t):
        return direction + 0.0 * np.asarray(t, dtype=float)[..., None]

    return CurvePath(position, velocity, (0.0, length), "line({0}, {1})".format(
        p0.tolist(), direction.tolist()),
        metadata={"kind": "line", "start": p0.tolist(), "direction": direction.tolist()})

def integrate_geodesic_flow(manifold, p0, v0, T, h, damping=None, guard=None, name="geodesic"):
    """
    Integrate ``x' = v, v' = -Gamma(v, v) - s(x, v) v`` with RK4

    Leaving the chart ends the curve with ``exited`` set, a failing ``guard``
    ends it with ``aborted`` set. Both are logged, never raised.

    :param damping: optional ``s(x, v)``
    :type damping: callable
    :param guard: optional ``guard(x)`` returning a reason to abort
    :type guard: callable
    :returns: sampled curve
    :rtype: :class:`CurvePath`
    """
    startTime = datetime.datetime.utcnow()
    p0 = manifold.check_points(p0)
    v0 = np.asarray(v0, dtype=float)

    def rhs(t, y):
        x, v = y[:DIMENSION], y[DIMENSION:]
        acceleration = -np.einsum("kij,i,j->k", _christoffel(manifold, x), v, v)
        if damping is not None:
            acceleration = acceleration - damping(x, v) * v
        return np.concatenate([v, acceleration])

    def stop(t, y):
        x = y[:DIMENSION]
        if not manifold.contains(x):
            return "exited"
        if guard is not None:
            return guard(x)
        return None

    times, states, reason = rk4_integrate(rhs, np.concatenate([p0, v0]), 0.0, T, h, stop)
    positions, velocities = states[:, :DIMENSION], states[:, DIMENSION:]
    speeds = manifold.inner(positions, velocities, velocities)
    metadata = {
        "h": float(h),
        "T": float(T),
        "exited": reason == "exited",
        "aborted": reason is not None and reason != "exited",
        "stop_reason": reason,
        "speed_drift": float(abs(speeds[-1] - speeds[0])),
        "max_speed_drift": float(np.max(np.abs(speeds - speeds[0]))),
    }
    if reason:
        log.warning("%s truncated at t=%s (%s)", name, times[-1], reason)
    log.debug("Integrating %s with h=%s took '%s'", name, h, datetime.datetime.utcnow() - startTime)
    return CurvePath.from_samples(times, positions, velocities, name, metadata)

def geodesic_standard(manifold, p0, v0, T, h=1e-2):
    """
    Levi-Civita geodesic from ``p0`` with initial velocity ``v0``

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param p0: start point
    :type p0: sequence
    :param v0: initial velocity
    :type v0: sequence
    :param T: parameter length
    :type T: float
    :param h: step size
    :type h: float
    :returns: sampled geodesic
    :rtype: :class:`CurvePath`
    """
    return integrate_geodesic_flow(manifold, p0, v0, T, h, name="standard geodesic")
