"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Curvature of the stochastic connection: the tensor itself, its lowered form,
sectional, Ricci and scalar curvature, covariant derivatives, the curvature
form and the Gauss-Bonnet deviation
"""
import datetime
import logging

import numpy as np

from .geometry import (DIMENSION,
                       FD_STEP,
                       SPHERE_POLE_MARGIN,
                       central_difference,
                       christoffel_at,
                       christoffel_partials_at,
                       covariant_derivative,
                       curvature_at,
                       curvature_operator,
                       curvature_symmetry_residuals,
                       gauss_curvature,
                       gram_determinant,
                       coordinate_field,
                       lower_riemann)
from .quadrature import DEFAULT_GRID, chart_rule, coarser
from .randomField import EPS_FLOOR, sample_coefficient_matrix
from .reports import IdentityReport, residual_norm
from .stochasticConnection import randomize


log = logging.getLogger(__name__)

SCALING_TOLERANCE = 1e-6
SYMMETRY_TOLERANCE = 1e-8
SECTIONAL_TOLERANCE = 1e-9
DERIVATIVE_STEP = 1e-4
GAUSS_BONNET_REALIZATIONS = 200

class CurvatureReport(object):
    """
    Stochastic curvature quantities at one point for one realization
    """
    def __init__(self, point, seed, eps, direct, scaled, lowered, stochasticSectional, sectional,
                 stochasticRicci, stochasticScalar, residuals):
        self.point = point
        self.seed = seed
        self.eps = eps
        self.direct = direct
        self.scaled = scaled
        self.lowered = lowered
        self.stochasticSectional = stochasticSectional
        self.sectional = sectional
        self.stochasticRicci = stochasticRicci
        self.stochasticScalar = stochasticScalar
        self.residuals = residuals

    def __repr__(self):
        return "CurvatureReport(point={0}, seed={1}, scalingResidual={2})".format(
            np.asarray(self.point).tolist(), self.seed, self.scalingResidual)

    @property
    def scalingResidual(self):
        return residual_norm(self.direct, self.scaled)

    def to_dict(self):
        return {
            "point": self.point,
            "seed": self.seed,
            "eps": self.eps,
            "R_tilde_direct": self.direct,
            "R_tilde_scaled": self.scaled,
            "R_tilde_lowered": self.lowered,
            "K_tilde": self.stochasticSectional,
            "K": self.sectional,
            "Ric_tilde": self.stochasticRicci,
            "S_tilde": self.stochasticScalar,
            "scaling_residual": self.scalingResidual,
            "residuals": self.residuals,
        }

def _direct_curvature(manifold, realization, points, h):
    eps, g1, hess = realization.evaluate(points)
    eps = np.asarray(eps, dtype=float)
    eps2, eps3, eps4 = eps[..., None, None], eps[..., None, None, None], eps[..., None, None, None, None]
    gamma = christoffel_at(manifold, points)
    dGamma = christoffel_partials_at(manifold, points, h)
    identity = np.eye(DIMENSION)
    # W[j, l, k]: components of D_{eps d_j}(eps d_k)
    W = eps3 * np.einsum("...j,lk->...jlk", g1, identity) + eps3 ** 2 * np.einsum("...ljk->...jlk", gamma)
    dW = (np.einsum("...ij,lk->...ijlk", np.einsum("...i,...j->...ij", g1, g1) + eps2 * hess, identity)
          + 2 * eps4 * np.einsum("...i,...ljk->...ijlk", g1, gamma)
          + eps4 ** 2 * np.einsum("...iljk->...ijlk", dGamma))
    # D_{eps d_i} D_{eps d_j}(eps d_k)
    first = eps4 * (np.einsum("...ijlk->...lkij", dW) + np.einsum("...lim,...jmk->...lkij", gamma, W))
    second = np.swapaxes(first, -1, -2)
    # [eps d_i, eps d_j] = V[i, j, m] d_m
    V = (eps3 * np.einsum("...i,jm->...ijm", g1, identity)
         - eps3 * np.einsum("...j,im->...ijm", g1, identity))
    bracket = (np.einsum("...ijm,...m,lk->...lkij", V, g1, identity)
               + eps4 * np.einsum("...ijm,...lmk->...lkij", V, gamma))
    return first - second - bracket

def stochastic_curvature_at(manifold, realization, points, method="scaled", h=FD_STEP):
    """
    Stochastic curvature ``R~^l_kij`` laid out as ``[..., l, k, i, j]``

    ``scaled`` returns ``eps^3 R^l_kij``. ``direct`` evaluates
    ``D_{X~} D_{Y~} Z~ - D_{Y~} D_{X~} Z~ - D_{[X~, Y~]} Z~`` on coordinate
    fields by nested differentiation of the product fields.

    :param method: ``scaled`` or ``direct``
    :type method: str
    """
    points = manifold.check_points(points)
    if method == "direct":
        return _direct_curvature(manifold, realization, points, h)
    if method != "scaled":
        raise ValueError("'method' needs to be one of scaled or direct")
    rUp, _ = curvature_at(manifold, points, h)
    eps = np.asarray(realization.eps(points), dtype=float)
    return eps[..., None, None, None, None] ** 3 * rUp

def stochastic_riemann_4tensor(manifold, realization, points, h=FD_STEP):
    """
    ``R~_ijkl = <R~(d_k, d_l) d_i, eps d_j>``, which equals ``eps^4 R_ijkl``

    :returns: lowered tensor and its skew, exchange and first Bianchi residuals
    :rtype: tuple
    """
    points = manifold.check_points(points)
    eps = np.asarray(realization.eps(points), dtype=float)[..., None, None, None, None]
    lowered = eps * lower_riemann(stochastic_curvature_at(manifold, realization, points, "direct", h),
                                  manifold.metric(points))
    return lowered, curvature_symmetry_residuals(lowered)

def stochastic_riemann_form(manifold, realization, points, X, Y, Z, W, h=FD_STEP):
    """
    Four argument form ``<R~(Z, W) X, Y~>`` on the randomized fields
    """
    lowered, _ = stochastic_riemann_4tensor(manifold, realization, points, h)
    return curvature_operator(lowered, X(points), Y(points), Z(points), W(points))

def stochastic_sectional(manifold, realization, points, u, v, h=FD_STEP):
    """
    Sectional curvature of ``D~`` against ``g~`` next to the classical one

    :returns: ``(K~, K)``
    :rtype: tuple
    :raises ValueError: when ``u`` and ``v`` are linearly dependent
    """
    points = manifold.check_points(points)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = manifold.metric(points)
    gram = gram_determinant(g, u, v)
    scale = manifold.inner(points, u, u) * manifold.inner(points, v, v)
    if np.any(gram <= 1e-12 * scale):
        raise ValueError("'u' and 'v' need to span a plane")
    lowered, _ = stochastic_riemann_4tensor(manifold, realization, points, h)
    eps = np.asarray(realization.eps(points), dtype=float)
    stochasticGram = eps ** 4 * gram
    _, rDown = curvature_at(manifold, points, h)
    return (curvature_operator(lowered, v, u, u, v) / stochasticGram,
            curvature_operator(rDown, v, u, u, v) / gram)

def stochastic_ricci_scalar(manifold, realization, points, h=FD_STEP):
    """
    ``Ric~_ab = R~^l_bla`` and ``S~ = g^ab Ric~_ab`` traced with the
    deterministic metric

    :returns: ``(Ric~, S~)``
    :rtype: tuple
    """
    points = manifold.check_points(points)
    direct = stochastic_curvature_at(manifold, realization, points, "direct", h)
    ricci = np.einsum("...lbla->...ab", direct)
    return ricci, np.einsum("...ab,...ab->...", manifold.inverse_metric(points), ricci)

def classical_curvature_derivative(manifold, points, h=FD_STEP, step=DERIVATIVE_STEP):
    """
    ``R^l_kij,h``, the components of ``D_{d_h}(R(d_i, d_j) d_k)``, laid out
    as ``[..., h, l, k, i, j]``
    """
    points = manifold.check_points(points)
    rUp, _ = curvature_at(manifold, points, h)
    partials = np.moveaxis(central_difference(lambda q: curvature_at(manifold, q, h)[0], points, step), -1, -5)
    return partials + np.einsum("...lhm,...mkij->...hlkij", christoffel_at(manifold, points), rUp)

def covariant_derivative_Rtilde(manifold, realization, points, h=FD_STEP, step=DERIVATIVE_STEP):
    """
    Covariant derivative of ``R~`` along ``eps e_h`` two ways

    ``direct`` differentiates ``eps^3 R(e_i, e_j) e_k`` along ``eps e_h``,
    ``formula`` evaluates ``eps^4 R^l_kij,h + 3 eps^3 e_h(eps) R^l_kij``.

    :returns: ``(direct, formula)`` both laid out as ``[..., h, l, k, i, j]``
    :rtype: tuple
    """
    points = manifold.check_points(points)
    eps, gradient, _ = realization.evaluate(points)
    eps = np.asarray(eps, dtype=float)

    def scaled(q):
        return stochastic_curvature_at(manifold, realization, q, "scaled", h)

    partials = np.moveaxis(central_difference(scaled, points, step), -1, -5)
    connectionTerm = np.einsum("...lhm,...mkij->...hlkij", christoffel_at(manifold, points), scaled(points))
    direct = eps[..., None, None, None, None, None] * (partials + connectionTerm)
    rUp, _ = curvature_at(manifold, points, h)
    formula = (eps[..., None, None, None, None, None] ** 4 * classical_curvature_derivative(manifold, points, h, step)
               + 3 * (eps ** 3)[..., None, None, None, None, None]
               * np.einsum("...h,...lkij->...hlkij", gradient, rUp))
    return direct, formula

def _curvature_field(manifold, realization, Y, Z, W, h):
    """
    ``q -> eps(q)^3 R(Y, Z) W`` evaluated pointwise
    """
    def value(q):
        rUp, _ = curvature_at(manifold, q, h)
        eps = np.asarray(realization.eps(q), dtype=float)
        return (eps ** 3)[..., None] * np.einsum("...lkij,...i,...j,...k->...l", rUp, Y(q), Z(q), W(q))
    return value

def bianchi2_residual(manifold, realization, points, X, Y, Z, W=None, h=FD_STEP, step=DERIVATIVE_STEP):
    """
    Cyclic sum ``D_{X~}(eps^3 R(Y, Z) W) + D_{Y~}(eps^3 R(Z, X) W) + D_{Z~}(eps^3 R(X, Y) W)``
    against ``3 eps^6 sum X(eps) R(Y, Z) W`` and against the expansion
    ``3 eps^3 sum X(eps) R(Y, Z) W + eps^4 sum [R(D_X Y, Z) W + R(Y, D_X Z) W + R(Y, Z) D_X W]``.
    Never asserting.

    :param W: test field the operators act on, ``d_1`` when omitted
    :type W: :class:`VectorFieldExpr`
    :returns: non asserting report
    :rtype: :class:`IdentityReport`
    """
    points = manifold.check_points(points)
    W = coordinate_field(0) if W is None else W
    eps, gradient, _ = realization.evaluate(points)
    eps = np.asarray(eps, dtype=float)[..., None]
    gamma = christoffel_at(manifold, points)
    rUp, _ = curvature_at(manifold, points, h)

    def operator(A, B, C):
        return np.einsum("...lkij,...i,...j,...k->...l", rUp, A, B, C)

    lhs = 0.0
    printed = 0.0
    derived = 0.0
    for first, second, third in ((X, Y, Z), (Y, Z, X), (Z, X, Y)):
        field = _curvature_field(manifold, realization, second, third, W, h)
        direction = randomize(first, realization)(points)
        directional = np.einsum("...ki,...i->...k", central_difference(field, points, step), direction)
        lhs = lhs + directional + np.einsum("...kij,...i,...j->...k", gamma, direction, field(points))
        rate = np.einsum("...i,...i->...", gradient, first(points))[..., None]
        base = operator(second(points), third(points), W(points))
        printed = printed + 3 * eps ** 6 * rate * base
        derived = derived + 3 * eps ** 3 * rate * base + eps ** 4 * (
            operator(covariant_derivative(manifold, first, second, points), third(points), W(points))
            + operator(second(points), covariant_derivative(manifold, first, third, points), W(points))
            + operator(second(points), third(points), covariant_derivative(manifold, first, W, points)))
    return IdentityReport("curvature.bianchi2", lhs, printed, np.inf, point=np.asarray(points).tolist(),
                          seed=realization.seed, asserting=False,
                          extra={"derived_rhs": derived, "derived_residual": residual_norm(lhs, derived)})

def stochastic_curvature_form(manifold, realization, points, X, Y, h=FD_STEP):
    """
    Surface curvature form of the randomized fields,
    ``Omega~(X, Y) = Omega(X~, Y~) = eps^2 K / (2 pi) dA(X, Y)``

    :returns: ``(Omega~(X, Y), Omega(X, Y))``
    :rtype: tuple
    """
    points = manifold.check_points(points)
    eps = realization.eps(points)
    area = manifold.volume_element(points) * np.linalg.det(np.stack([X(points), Y(points)], axis=-1))
    omega = gauss_curvature(manifold, points, h) / (2 * np.pi) * area
    return eps ** 2 * omega, omega

class GaussBonnetResult(object):
    """
    Gauss-Bonnet integrals with and without noise
    """
    def __init__(self, integral, expectedIntegral, chi, deviation, capBound, refinementDelta,
                 fourthMomentIntegral, monteCarlo, grid):
        self.integral = integral
        self.expectedIntegral = expectedIntegral
        self.chi = chi
        self.deviation = deviation
        self.capBound = capBound
        self.refinementDelta = refinementDelta
        self.fourthMomentIntegral = fourthMomentIntegral
        self.monteCarlo = monteCarlo
        self.grid = tuple(grid)

    def __repr__(self):
        return "GaussBonnetResult(integral={0}, chi={1}, deviation={2})".format(self.integral, self.chi, self.deviation)

    def to_dict(self):
        return {
            "integral": self.integral,
            "expected_integral": self.expectedIntegral,
            "chi": self.chi,
            "deviation": self.deviation,
            "cap_bound": self.capBound,
            "refinement_delta": self.refinementDelta,
            "fourth_moment_integral": self.fourthMomentIntegral,
            "monte_carlo": self.monteCarlo,
            "grid": list(self.grid),
        }

def _cap_terms(manifold, spec):
    """
    Contributions of the excluded polar caps: exact for the constant
    curvature term, a bound for the variance weighted term
    """
    if manifold.name != "sphere":
        return 0.0, 0.0
    radius = manifold.params["radius"]
    capArea = 2 * 2 * np.pi * radius ** 2 * (1 - np.cos(SPHERE_POLE_MARGIN))
    curvature = float(gauss_curvature(manifold, manifold.defaultPoint))
    omega = curvature * capArea / (2 * np.pi)
    bound = omega * float(np.dot(spec.variances, spec.basis.squared_sup_norms()))
    return omega, bound

def gauss_bonnet_deviation(manifold, spec, grid=DEFAULT_GRID, nRealizations=GAUSS_BONNET_REALIZATIONS,
                           masterSeed=0, h=FD_STEP):
    """
    Compare ``int Omega`` with ``int E[eps^2] Omega`` on a closed surface

    The noise term ``(1 / 2 pi) int V K dA`` uses the closed form
    ``E[eps^2] = 1 + V``; a Monte Carlo estimate of ``int eps^2 Omega`` over
    the same chart region is reported as a cross check. Degenerate
    realizations are counted, not discarded.

    :param manifold: closed manifold model
    :type manifold: :class:`ManifoldModel`
    :param spec: field law
    :type spec: :class:`FieldSpec`
    :param grid: quadrature nodes per axis
    :type grid: tuple
    :returns: integrals, Euler characteristic and deviation
    :rtype: :class:`GaussBonnetResult`
    :raises ValueError: for manifolds that are not closed
    """
    if not manifold.closed:
        raise ValueError("'{0}' is not a closed surface".format(manifold.name))
    startTime = datetime.datetime.utcnow()
    capOmega, capBound = _cap_terms(manifold, spec)

    def integrals(counts):
        rule = chart_rule(manifold, counts)
        omega = gauss_curvature(manifold, rule.nodes, h) / (2 * np.pi)
        variance = spec.variance_at(rule.nodes)
        return (rule.integrate(omega), rule.integrate(variance * omega),
                rule.integrate((6 * variance + 3 * variance ** 2) * omega), rule, omega)

    integral, deviation, fourth, rule, omega = integrals(grid)
    coarseIntegral, coarseDeviation, _, _, _ = integrals(coarser(grid))
    integral += capOmega

    seeds, coefficients = sample_coefficient_matrix(spec, masterSeed, nRealizations)
    fields = 1.0 + spec.basis.values(rule.nodes) @ coefficients.T
    noise = rule.integrate((fields ** 2 - 1.0) * omega[:, None])
    degenerate = int(np.sum(1.0 + np.min(spec.validationValues @ coefficients.T, axis=0) <= EPS_FLOOR))
    monteCarlo = {
        "mean": float(np.mean(noise)),
        "stderr": float(np.std(noise, ddof=1) / np.sqrt(nRealizations)) if nRealizations > 1 else 0.0,
        "n_realizations": nRealizations,
        "degenerate_count": degenerate,
        "seed": masterSeed,
    }
    log.info("Gauss-Bonnet deviation on '%s' took '%s'", manifold.name, datetime.datetime.utcnow() - startTime)
    return GaussBonnetResult(float(integral), float(integral + deviation), manifold.eulerCharacteristic,
                             float(deviation), capBound,
                             {"integral": abs(float(integral - capOmega - coarseIntegral)),
                              "deviation": abs(float(deviation - coarseDeviation))},
                             float(integral + fourth), monteCarlo, grid)

def curvature_report(manifold, realization, point, u=(1.0, 0.0), v=(0.0, 1.0), h=FD_STEP):
    """
    Collect every stochastic curvature quantity at one point

    :returns: report
    :rtype: :class:`CurvatureReport`
    """
    point = manifold.check_points(point)
    direct = stochastic_curvature_at(manifold, realization, point, "direct", h)
    scaled = stochastic_curvature_at(manifold, realization, point, "scaled", h)
    lowered, residuals = stochastic_riemann_4tensor(manifold, realization, point, h)
    _, rDown = curvature_at(manifold, point, h)
    eps = float(realization.eps(point))
    residuals["lowered_scaling"] = residual_norm(lowered, eps ** 4 * rDown)
    stochasticSectional, sectional = stochastic_sectional(manifold, realization, point, u, v, h)
    ricci, scalar = stochastic_ricci_scalar(manifold, realization, point, h)
    report = CurvatureReport(point.tolist(), realization.seed, eps, direct, scaled, lowered,
                             float(stochasticSectional), float(sectional), ricci, float(scalar), residuals)
    if report.scalingResidual > SCALING_TOLERANCE:
        log.error("Curvature scaling residual %s at %s exceeds %s", report.scalingResidual, point, SCALING_TOLERANCE)
    return report
