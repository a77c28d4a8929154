"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Truncated Karhunen-Loeve random scalar fields ``eps = 1 + sum_i xi_i psi_i``
with ``xi_i ~ N(0, c i^-alpha)`` independent
"""
import datetime
import functools
import logging

import numpy as np
from scipy.special import gammaln, lpmv

from .geometry import DIMENSION, DomainError


log = logging.getLogger(__name__)

EPS_FLOOR = 0.05
DEFAULT_TRUNCATION = 64
DEFAULT_DECAY_EXPONENT = 3.0
DEFAULT_AMPLITUDE = 0.1
VALIDATION_GRID_SIZE = 64
MAX_RESAMPLES = 100

class DegenerateRealizationError(ArithmeticError):
    """
    Raised when a realization has ``min eps <= EPS_FLOOR`` on the chart

    :param message: error message
    :type message: str
    :param seed: seed of the offending realization
    :type seed: int
    """
    def __init__(self, message, seed=None):
        super(DegenerateRealizationError, self).__init__(message)
        self.seed = seed

def mix_seed(masterSeed, index):
    """
    Derive an independent 64 bit seed for item ``index`` of a run
    """
    state = np.random.SeedSequence([int(masterSeed), int(index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])

class Basis(object):
    """
    Common interface of the field bases

    ``evaluate(points)`` returns ``(values, gradients, hessians)`` with
    shapes (..., N), (..., N, 2) and (..., N, 2, 2).
    """
    orthonormal = True

    def __init__(self, name, manifold, count):
        self.name = name
        self.manifold = manifold
        self.count = int(count)
        self.labels = []
        self.eigenvalues = None

    def __repr__(self):
        return "{0}(manifold={1}, count={2})".format(self.__class__.__name__, self.manifold.name, self.count)

    def evaluate(self, points):
        raise NotImplementedError

    def values(self, points):
        return self.evaluate(points)[0]

    def squared_sup_norms(self):
        """
        Upper bounds of ``psi_i^2`` over the whole surface
        """
        raise NotImplementedError

    def quadrature(self, size):
        raise NotImplementedError

    def gram_matrix(self, size=VALIDATION_GRID_SIZE):
        """
        ``<psi_i, psi_j>_{L^2}`` by quadrature over the whole surface
        """
        nodes, weights = self.quadrature(size)
        values = self.values(nodes)
        return np.einsum("n,ni,nj->ij", weights, values, values)

def enumerate_torus_modes(count):
    """
    Non constant Fourier modes ``(k, l, xKind, yKind)`` on the flat torus,
    ordered by ``k^2 + l^2`` then ``k``, ``l`` and kind
    """
    def kinds(frequency):
        return ("cos",) if frequency == 0 else ("cos", "sin")

    radius = 1
    while True:
        # every mode with k^2 + l^2 <= radius^2 has k, l <= radius
        modes = [(k, l, xKind, yKind)
                 for k in range(radius + 1) for l in range(radius + 1)
                 if (k, l) != (0, 0) and k ** 2 + l ** 2 <= radius ** 2
                 for xKind in kinds(k) for yKind in kinds(l)]
        if len(modes) >= count:
            modes.sort(key=lambda mode: (mode[0] ** 2 + mode[1] ** 2,) + mode)
            return modes[:count]
        radius += 1

class TorusFourierBasis(Basis):
    """
    L^2 orthonormal real Fourier products on ``[0, 2pi)^2`` without the constant
    """
    def __init__(self, manifold, count):
        super(TorusFourierBasis, self).__init__("torus-fourier", manifold, count)
        modes = enumerate_torus_modes(self.count)
        self.kx = np.array([mode[0] for mode in modes], dtype=float)
        self.ly = np.array([mode[1] for mode in modes], dtype=float)
        self.xSine = np.array([mode[2] == "sin" for mode in modes])
        self.ySine = np.array([mode[3] == "sin" for mode in modes])
        self.norms = (np.where(self.kx == 0, 1.0 / np.sqrt(2 * np.pi), 1.0 / np.sqrt(np.pi))
                      * np.where(self.ly == 0, 1.0 / np.sqrt(2 * np.pi), 1.0 / np.sqrt(np.pi)))
        self.eigenvalues = self.kx ** 2 + self.ly ** 2
        self.labels = ["{2}({0}x){3}({1}y)".format(int(k), int(l), xKind, yKind)
                       for k, l, xKind, yKind in modes]

    @staticmethod
    def _factor(coordinate, frequency, sine):
        angle = frequency * coordinate
        value = np.where(sine, np.sin(angle), np.cos(angle))
        derivative = frequency * np.where(sine, np.cos(angle), -np.sin(angle))
        return value, derivative, -frequency ** 2 * value

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        fx, dfx, ddfx = self._factor(points[..., 0, None], self.kx, self.xSine)
        fy, dfy, ddfy = self._factor(points[..., 1, None], self.ly, self.ySine)
        values = self.norms * fx * fy
        gradients = self.norms[..., None] * np.stack([dfx * fy, fx * dfy], axis=-1)
        mixed = dfx * dfy
        hessians = self.norms[..., None, None] * np.stack([
            np.stack([ddfx * fy, mixed], axis=-1),
            np.stack([mixed, fx * ddfy], axis=-1)], axis=-2)
        return values, gradients, hessians

    def squared_sup_norms(self):
        return self.norms ** 2

    def quadrature(self, size):
        axis = 2 * np.pi * np.arange(size) / size
        x, y = np.meshgrid(axis, axis, indexing="ij")
        nodes = np.stack([x.ravel(), y.ravel()], axis=-1)
        return nodes, np.full(len(nodes), (2 * np.pi / size) ** 2)

class SphereHarmonicBasis(Basis):
    """
    L^2 orthonormal real spherical harmonics of degree ``l >= 1`` on the
    sphere of radius ``R``, ordered by ``(l, m)`` with ``m = -l..l``
    """
    def __init__(self, manifold, count):
        super(SphereHarmonicBasis, self).__init__("sphere-harmonics", manifold, count)
        self.radius = float(manifold.params.get("radius", 1.0))
        degrees, orders = [], []
        degree = 1
        while len(degrees) < self.count:
            for order in range(-degree, degree + 1):
                degrees.append(degree)
                orders.append(order)
            degree += 1
        self.degree = np.array(degrees[:self.count], dtype=float)
        self.order = np.array(orders[:self.count], dtype=float)
        self.absOrder = np.abs(self.order)
        self.norms = (np.sqrt((2 * self.degree + 1) / (4 * np.pi)
                              * np.exp(gammaln(self.degree - self.absOrder + 1)
                                       - gammaln(self.degree + self.absOrder + 1)))
                      * np.where(self.order == 0, 1.0, np.sqrt(2.0)) / self.radius)
        self.eigenvalues = self.degree * (self.degree + 1) / self.radius ** 2
        self.labels = ["Y({0},{1})".format(int(l), int(m)) for l, m in zip(self.degree, self.order)]

    def _angular(self, phi):
        angle = self.absOrder * phi
        positive = self.order > 0
        negative = self.order < 0
        value = np.where(positive, np.cos(angle), np.where(negative, np.sin(angle), 1.0))
        derivative = self.absOrder * np.where(positive, -np.sin(angle), np.where(negative, np.cos(angle), 0.0))
        return value, derivative, -self.absOrder ** 2 * value

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        theta = points[..., 0, None]
        x, s = np.cos(theta), np.sin(theta)
        legendre = lpmv(self.absOrder, self.degree, x)
        previousValid = self.absOrder <= self.degree - 1
        previous = lpmv(self.absOrder, np.where(previousValid, self.degree - 1, self.absOrder), x) * previousValid
        f = legendre
        fTheta = (self.degree * x * legendre - (self.degree + self.absOrder) * previous) / s
        fThetaTheta = -(x / s) * fTheta - (self.degree * (self.degree + 1) - self.order ** 2 / s ** 2) * f
        a, da, dda = self._angular(points[..., 1, None])
        values = self.norms * f * a
        gradients = self.norms[..., None] * np.stack([fTheta * a, f * da], axis=-1)
        mixed = fTheta * da
        hessians = self.norms[..., None, None] * np.stack([
            np.stack([fThetaTheta * a, mixed], axis=-1),
            np.stack([mixed, f * dda], axis=-1)], axis=-2)
        return values, gradients, hessians

    def squared_sup_norms(self):
        factor = np.where(self.order == 0, 1.0, 2.0)
        return factor * (2 * self.degree + 1) / (4 * np.pi * self.radius ** 2)

    def quadrature(self, size):
        u, w = np.polynomial.legendre.leggauss(size)
        phi = 2 * np.pi * np.arange(2 * size) / (2 * size)
        theta, phiGrid = np.meshgrid(np.arccos(u), phi, indexing="ij")
        weights = np.outer(w, np.full(len(phi), 2 * np.pi / len(phi))) * self.radius ** 2
        return np.stack([theta.ravel(), phiGrid.ravel()], axis=-1), weights.ravel()

class CustomBasis(Basis):
    """
    User supplied smooth basis, not necessarily orthonormal

    :param evaluator: ``evaluator(points)`` returning values, gradients and
        Hessians like :meth:`Basis.evaluate`
    :type evaluator: callable
    :param supNorms: optional bounds of ``psi_i^2``
    :type supNorms: sequence
    """
    orthonormal = False

    def __init__(self, manifold, count, evaluator, name="custom", supNorms=None, labels=None):
        super(CustomBasis, self).__init__(name, manifold, count)
        self.evaluator = evaluator
        self.supNorms = None if supNorms is None else np.asarray(supNorms, dtype=float)
        self.labels = list(labels or ["psi{0}".format(i + 1) for i in range(self.count)])

    def evaluate(self, points):
        return self.evaluator(np.asarray(points, dtype=float))

    def squared_sup_norms(self):
        if self.supNorms is None:
            raise ValueError("basis '{0}' has no sup norm bounds".format(self.name))
        return self.supNorms

def gaussian_bump_basis(manifold, count, width=1.0):
    """
    Gaussian bumps centred on a regular grid of the chart box, used where no
    eigenbasis is available
    """
    side = int(np.ceil(np.sqrt(count)))
    axes = [np.linspace(manifold.lower[a], manifold.upper[a], side + 2)[1:-1] for a in range(DIMENSION)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, DIMENSION)
    centers = grid[:count]
    w2 = float(width) ** 2

    def evaluator(points):
        offsets = points[..., None, :] - centers
        values = np.exp(-0.5 * np.sum(offsets ** 2, axis=-1) / w2)
        gradients = -offsets / w2 * values[..., None]
        hessians = (np.einsum("...ni,...nj->...nij", offsets, offsets) / w2 ** 2
                    - np.eye(DIMENSION) / w2) * values[..., None, None]
        return values, gradients, hessians

    return CustomBasis(manifold, count, evaluator, name="bumps", supNorms=np.ones(count),
                       labels=["bump{0}".format(center.tolist()) for center in centers])

def make_basis(identifier, manifold, count):
    """
    Resolve a basis identifier (``auto``, ``torus-fourier``,
    ``sphere-harmonics`` or ``bumps``) or pass a :class:`Basis` through
    """
    if isinstance(identifier, Basis):
        return identifier
    if identifier in (None, "auto"):
        identifier = {"flat-torus": "torus-fourier", "sphere": "sphere-harmonics"}.get(manifold.name, "bumps")
    if identifier == "torus-fourier":
        return TorusFourierBasis(manifold, count)
    if identifier == "sphere-harmonics":
        return SphereHarmonicBasis(manifold, count)
    if identifier == "bumps":
        return gaussian_bump_basis(manifold, count)
    raise ValueError("Unknown basis '{0}'".format(identifier))

class FieldSpec(object):
    """
    Law of the random field

    :param manifold: manifold model
    :type manifold: :class:`ManifoldModel`
    :param basis: basis identifier or instance
    :type basis: str or :class:`Basis`
    :param truncation: number of modes ``N``
    :type truncation: int
    :param decayExponent: variance decay exponent ``alpha``, must exceed 2
    :type decayExponent: float
    :param amplitude: variance amplitude ``c``
    :type amplitude: float
    """
    def __init__(self, manifold, basis="auto", truncation=DEFAULT_TRUNCATION,
                 decayExponent=DEFAULT_DECAY_EXPONENT, amplitude=DEFAULT_AMPLITUDE):
        if int(truncation) < 1:
            raise ValueError("'N' needs to be a positive integer")
        if not decayExponent > 2:
            raise ValueError("'alpha_exp' needs to exceed 2, got {0}".format(decayExponent))
        if amplitude < 0:
            raise ValueError("'c' needs to be non negative")
        self.manifold = manifold
        self.truncation = int(truncation)
        self.decayExponent = float(decayExponent)
        self.amplitude = float(amplitude)
        self.basis = make_basis(basis, manifold, self.truncation)
        self.variances = self.amplitude * np.arange(1, self.truncation + 1, dtype=float) ** (-self.decayExponent)

    def __repr__(self):
        return "FieldSpec(manifold={0}, basis={1}, N={2}, alpha_exp={3}, c={4})".format(
            self.manifold.name, self.basis.name, self.truncation, self.decayExponent, self.amplitude)

    def to_dict(self):
        return {
            "manifold": self.manifold.name,
            "basis": self.basis.name,
            "N": self.truncation,
            "alpha_exp": self.decayExponent,
            "c": self.amplitude,
        }

    @functools.cached_property
    def validationPoints(self):
        """
        Cell centres of a 64x64 grid over the chart box
        """
        axes = []
        for axis in range(DIMENSION):
            edges = np.linspace(self.manifold.lower[axis], self.manifold.upper[axis], VALIDATION_GRID_SIZE + 1)
            axes.append(0.5 * (edges[:-1] + edges[1:]))
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, DIMENSION)

    @functools.cached_property
    def validationValues(self):
        return self.basis.values(self.validationPoints)

    def variance_at(self, points):
        """
        ``Var eps(p) = sum_i sigma_i^2 psi_i(p)^2``
        """
        return np.einsum("i,...i->...", self.variances, self.basis.values(points) ** 2)

    def orthonormality_residual(self, size=VALIDATION_GRID_SIZE):
        """
        Max deviation of the Gram matrix from the identity, ``None`` for non
        orthonormal bases
        """
        if not self.basis.orthonormal:
            return None
        return float(np.max(np.abs(self.basis.gram_matrix(size) - np.eye(self.truncation))))

class FieldRealization(object):
    """
    One realization of the random field

    :param spec: field law
    :type spec: :class:`FieldSpec`
    :param coefficients: KL coefficients ``xi``
    :type coefficients: :class:`numpy.ndarray`
    :param seed: seed the coefficients were drawn with
    :type seed: int
    """
    def __init__(self, spec, coefficients, seed=None):
        self.spec = spec
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.coefficients.shape != (spec.truncation,):
            raise ValueError("expected {0} coefficients, got shape {1}".format(
                spec.truncation, self.coefficients.shape))
        self.seed = seed
        self.minEps = float(1.0 + np.min(spec.validationValues @ self.coefficients))
        self.degenerate = self.minEps <= EPS_FLOOR
        if self.degenerate:
            log.warning("Realization with seed '%s' is degenerate (min eps %s <= %s)",
                        seed, self.minEps, EPS_FLOOR)

    def __repr__(self):
        return "FieldRealization(seed={0}, minEps={1}, degenerate={2})".format(
            self.seed, self.minEps, self.degenerate)

    def eps(self, points):
        return 1.0 + self.spec.basis.values(points) @ self.coefficients

    def evaluate(self, points):
        """
        ``(eps, grad eps, hess eps)`` at the given points
        """
        values, gradients, hessians = self.spec.basis.evaluate(points)
        return (1.0 + values @ self.coefficients,
                np.einsum("...ni,n->...i", gradients, self.coefficients),
                np.einsum("...nij,n->...ij", hessians, self.coefficients))

    def gradient(self, points):
        return self.evaluate(points)[1]

    def check_usable(self):
        """
        :raises DegenerateRealizationError: for degenerate realizations
        """
        if self.degenerate:
            raise DegenerateRealizationError(
                "realization with seed '{0}' has min eps {1} <= {2}".format(self.seed, self.minEps, EPS_FLOOR),
                seed=self.seed)
        return self

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "seed": self.seed,
            "coefficients": self.coefficients.tolist(),
            "min_eps": self.minEps,
            "degenerate": self.degenerate,
        }

    @staticmethod
    def from_dict(spec, data):
        """
        Replay an exported realization against a compatible spec
        """
        exported = data.get("spec", {})
        for key, value in spec.to_dict().items():
            if key in exported and exported[key] != value:
                raise ValueError("exported realization has {0}={1}, spec has {2}".format(
                    key, exported[key], value))
        return FieldRealization(spec, data["coefficients"], data.get("seed"))

def sample_coefficients(spec, seed):
    """
    KL coefficients ``xi_i = sigma_i Z_i`` for one seed
    """
    rng = np.random.default_rng(seed)
    return rng.standard_normal(spec.truncation) * np.sqrt(spec.variances)

def sample_coefficient_matrix(spec, masterSeed, count, offset=0):
    """
    Coefficients of ``count`` realizations with seeds ``mix_seed(masterSeed, i)``

    :returns: seeds and coefficient matrix of shape (count, N)
    :rtype: tuple
    """
    seeds = [mix_seed(masterSeed, offset + i) for i in range(count)]
    return seeds, np.array([sample_coefficients(spec, seed) for seed in seeds])

def sample_realization(spec, seed):
    """
    Draw the realization for ``seed``, flagging it when degenerate

    :param spec: field law
    :type spec: :class:`FieldSpec`
    :param seed: 64 bit seed
    :type seed: int
    :returns: realization
    :rtype: :class:`FieldRealization`
    """
    return FieldRealization(spec, sample_coefficients(spec, seed), seed)

def resample_realization(spec, seed, maxAttempts=MAX_RESAMPLES):
    """
    Draw realizations with seeds derived from ``seed`` until one is usable

    :returns: realization and list of rejected seeds
    :rtype: tuple
    """
    rejected = []
    realization = sample_realization(spec, seed)
    attempt = 0
    while realization.degenerate:
        rejected.append(realization.seed)
        attempt += 1
        if attempt > maxAttempts:
            raise DegenerateRealizationError(
                "no usable realization after {0} attempts".format(maxAttempts), seed=seed)
        realization = sample_realization(spec, mix_seed(seed, attempt))
    if rejected:
        log.info("Rejected degenerate seeds %s, using '%s'", rejected, realization.seed)
    return realization, rejected

def noiseless_realization(spec):
    """
    The realization with all coefficients zero, ``eps = 1``
    """
    return FieldRealization(spec, np.zeros(spec.truncation), seed=None)

def eval_field(realization, points):
    """
    ``(eps, grad eps, hess eps)`` after checking the chart domain

    :raises DomainError: outside the chart
    """
    points = realization.spec.manifold.check_points(points)
    return realization.evaluate(points)

def field_variance(spec, points):
    return spec.variance_at(spec.manifold.check_points(points))

def field_moments(spec, points):
    """
    Closed form ``E[eps^k]`` for ``k = 1..4``

    :returns: tuple of moment arrays
    :rtype: tuple
    """
    variance = field_variance(spec, points)
    return (np.ones_like(variance), 1 + variance, 1 + 3 * variance,
            1 + 6 * variance + 3 * variance ** 2)

def monte_carlo_moments(spec, points, nSamples, masterSeed=0):
    """
    Sample means and standard errors of ``eps^k`` for ``k = 1..4``

    :returns: dict with ``mean`` and ``stderr`` arrays of shape (4, ...)
    :rtype: dict
    """
    startTime = datetime.datetime.utcnow()
    points = spec.manifold.check_points(points)
    _, coefficients = sample_coefficient_matrix(spec, masterSeed, nSamples)
    eps = 1.0 + np.einsum("...n,sn->s...", spec.basis.values(points), coefficients)
    powers = np.stack([eps ** k for k in range(1, 5)])
    log.info("Sampling %s moment realizations took '%s'", nSamples, datetime.datetime.utcnow() - startTime)
    return {
        "mean": powers.mean(axis=1),
        "stderr": powers.std(axis=1, ddof=1) / np.sqrt(nSamples),
        "n_samples": nSamples,
    }

def alpha_beta_at(spec, points, velocities):
    """
    ``alpha = E[eps^2]`` and ``beta = E[eps eps']`` for a curve passing
    ``points`` with the given velocities

    :returns: ``(alpha, beta)``
    :rtype: tuple
    """
    values, gradients, _ = spec.basis.evaluate(points)
    rates = np.einsum("...ni,...i->...n", gradients, velocities)
    alpha = 1.0 + np.einsum("n,...n->...", spec.variances, values ** 2)
    beta = np.einsum("n,...n,...n->...", spec.variances, values, rates)
    return alpha, beta

def alpha_beta_along(spec, curve, times):
    """
    :func:`alpha_beta_at` along a curve

    :raises DomainError: if the curve leaves the chart at the given times
    """
    points = curve.position(np.asarray(times, dtype=float))
    if not np.all(spec.manifold.contains(points)):
        raise DomainError("curve '{0}' leaves the chart".format(curve.name))
    return alpha_beta_at(spec, points, curve.velocity(np.asarray(times, dtype=float)))
