"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Geodesics and parallel transport for the standard, expected, realized and
Brownian regimes, plus holonomy around closed curves
"""
import datetime
import logging

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import polar, sqrtm

from .geometry import (DIMENSION,
                       VectorFieldExpr,
                       christoffel_at,
                       integrate_geodesic_flow)
from .integrators import euler_maruyama, linear_rk4, stage_times, step_grid
from .randomField import (EPS_FLOOR,
                          FieldRealization,
                          FieldSpec,
                          alpha_beta_at,
                          mix_seed)
from .reports import IdentityReport
from .stochasticConnection import stochastic_christoffel


log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
RECOVERY_SUBSTEPS = 8
RECOVERY_STEPS = (1e-2, 1e-3, 1e-4, 1e-5)
BROWNIAN_PATHS = 10000
BROWNIAN_CHUNK = 1000
BROWNIAN_STORED_PATHS = 10

REGIMES = ("standard", "expected", "realized", "brownian-sample", "brownian-mean")

class TransportSolution(object):
    """
    Transported vector along a curve

    :param curve: base curve
    :type curve: :class:`CurvePath`
    :param times: sample times
    :type times: :class:`numpy.ndarray`
    :param frames: transported vectors of shape (len(times), 2)
    :type frames: :class:`numpy.ndarray`
    :param regime: one of :data:`REGIMES`
    :type regime: str
    :param propagators: optional transport matrices for every time
    :type propagators: :class:`numpy.ndarray`
    :param metadata: seeds, step size and flags
    :type metadata: dict
    """
    def __init__(self, curve, times, frames, regime, propagators=None, metadata=None):
        if regime not in REGIMES:
            raise ValueError("'regime' needs to be one of {0}".format(REGIMES))
        self.curve = curve
        self.times = np.asarray(times, dtype=float)
        self.frames = np.asarray(frames, dtype=float)
        self.regime = regime
        self.propagators = propagators
        self.metadata = dict(metadata or {})

    def __repr__(self):
        return "TransportSolution(regime={0}, curve={1}, steps={2}, final={3})".format(
            self.regime, self.curve.name, len(self.times) - 1, self.final.tolist())

    @property
    def final(self):
        return self.frames[-1]

    @property
    def truncated(self):
        return bool(self.metadata.get("exited") or self.metadata.get("aborted"))

    def rows(self):
        """
        CSV rows ``t, x1, x2, X1, X2[, eps]``
        """
        positions = self.curve.position(self.times)
        eps = self.metadata.get("eps")
        for index, t in enumerate(self.times):
            row = [float(t)] + positions[index].tolist() + self.frames[index].tolist()
            if eps is not None:
                row.append(float(eps[index]))
            yield row

    def header(self):
        header = ["t", "x1", "x2", "X1", "X2"]
        if self.metadata.get("eps") is not None:
            header.append("eps")
        return header

def transport_weights(source, points, velocities):
    """
    Coefficients ``(a, b)`` of ``a (X' + Gamma(x', X)) + b X = 0``

    For a :class:`FieldSpec` these are ``(E[eps^2], E[eps eps'])``, for a
    :class:`FieldRealization` they are ``(eps^2, eps eps')`` and for ``None``
    they reduce to the Levi-Civita case ``(1, 0)``.
    """
    if source is None:
        shape = np.shape(points)[:-1]
        return np.ones(shape), np.zeros(shape)
    if isinstance(source, FieldSpec):
        return alpha_beta_at(source, points, velocities)
    if isinstance(source, FieldRealization):
        eps, gradient, _ = source.evaluate(points)
        return eps ** 2, eps * np.einsum("...i,...i->...", gradient, velocities)
    raise ValueError("'source' needs to be a FieldSpec, FieldRealization or None")

def _transport_matrices(manifold, curve, times, source):
    stages = stage_times(times)
    points = curve.position(stages)
    velocities = curve.velocity(stages)
    gamma = christoffel_at(manifold, points)
    a, b = transport_weights(source, points, velocities)
    return (-np.einsum("...kij,...i->...kj", gamma, velocities)
            - (b / a)[..., None, None] * np.eye(DIMENSION))

def _valid_steps(manifold, curve, times, realization):
    """
    Number of leading steps whose stage points are inside the chart (and
    above the eps floor for realizations)
    """
    stages = stage_times(times)
    points = curve.position(stages)
    valid = manifold.contains(points).all(axis=-1)
    reason = "exited"
    if realization is not None and np.all(valid):
        valid = (realization.eps(points) > EPS_FLOOR).all(axis=-1)
        reason = "aborted"
    if np.all(valid):
        return len(stages), None
    return int(np.argmin(valid)), reason

def solve_transport(manifold, curve, h=DEFAULT_STEP, source=None, regime="standard", v0=None):
    """
    Transport the identity frame along ``curve`` and optionally ``v0``

    Stage coefficients are precomputed over the whole grid and the linear
    system is integrated with RK4. Leaving the chart (or hitting the eps
    floor for a realization) truncates the solution and sets ``exited`` or
    ``aborted`` in its metadata.

    :returns: transport solution carrying the propagators
    :rtype: :class:`TransportSolution`
    """
    startTime = datetime.datetime.utcnow()
    times = step_grid(curve.tSpan[0], curve.tSpan[1], h)
    realization = source if isinstance(source, FieldRealization) else None
    validSteps, reason = _valid_steps(manifold, curve, times, realization)
    if reason:
        log.warning("%s transport along '%s' truncated at t=%s (%s)", regime, curve.name, times[validSteps], reason)
        times = times[:validSteps + 1]
    if len(times) > 1:
        propagators = linear_rk4(_transport_matrices(manifold, curve, times, source), times, np.eye(DIMENSION))
    else:
        propagators = np.eye(DIMENSION)[None]
    v0 = np.array([1.0, 0.0]) if v0 is None else np.asarray(v0, dtype=float)
    metadata = {
        "h": float(h),
        "regime": regime,
        "exited": reason == "exited",
        "aborted": reason == "aborted",
    }
    if realization is not None:
        metadata["seed"] = realization.seed
        metadata["eps"] = realization.eps(curve.position(times))
    if isinstance(source, FieldSpec):
        metadata["alpha"], _ = alpha_beta_at(source, curve.position(times), curve.velocity(times))
    log.debug("%s transport along '%s' took '%s'", regime, curve.name, datetime.datetime.utcnow() - startTime)
    return TransportSolution(curve, times, propagators @ v0, regime, propagators, metadata)

def standard_transport(manifold, curve, v0, h=DEFAULT_STEP):
    """
    Levi-Civita parallel transport of ``v0`` along ``curve``
    """
    return solve_transport(manifold, curve, h, None, "standard", v0)

def expected_transport(manifold, spec, curve, v0, h=DEFAULT_STEP):
    """
    Parallel transport in expectation

    Solves ``alpha (X' + Gamma(x', X)) + beta X = 0``. Since
    ``beta = alpha' / 2`` the solution equals the standard transport scaled
    by ``sqrt(alpha(s) / alpha(t))``, which is recorded as ``factor``.

    :param spec: field law
    :type spec: :class:`FieldSpec`
    :returns: transport solution
    :rtype: :class:`TransportSolution`
    """
    solution = solve_transport(manifold, curve, h, spec, "expected", v0)
    alpha = solution.metadata["alpha"]
    solution.metadata["factor"] = np.sqrt(alpha[0] / alpha)
    return solution

def realized_transport(manifold, realization, curve, v0, h=DEFAULT_STEP):
    """
    Parallel transport for one realization,
    ``eps^2 (X' + Gamma(x', X)) + eps eps' X = 0``

    The solution obeys ``X(t) = eps(s) / eps(t) P(t) v0``, recorded as
    ``factor``.

    :raises DegenerateRealizationError: for degenerate realizations
    """
    realization.check_usable()
    solution = solve_transport(manifold, curve, h, realization, "realized", v0)
    eps = solution.metadata["eps"]
    solution.metadata["factor"] = eps[0] / eps
    return solution

def log_weight_integral(source, curve, times):
    """
    ``int_s^t b / a`` along the curve by the trapezoid rule on the given
    grid, a cross check of the closed form factors
    """
    a, b = transport_weights(source, curve.position(times), curve.velocity(times))
    return cumulative_trapezoid(b / a, x=times, initial=0.0)

def expected_geodesic(manifold, spec, p0, v0, T, h=1e-2):
    """
    Geodesic in expectation, ``alpha (x'' + Gamma(x', x')) + beta x' = 0``
    with ``alpha`` and ``beta`` evaluated at the current state

    :returns: sampled curve
    :rtype: :class:`CurvePath`
    """
    def damping(x, v):
        alpha, beta = alpha_beta_at(spec, x, v)
        return beta / alpha

    curve = integrate_geodesic_flow(manifold, p0, v0, T, h, damping=damping, name="expected geodesic")
    curve.metadata["alpha"], _ = alpha_beta_at(spec, curve.samples["x"], curve.samples["v"])
    return curve

def realized_geodesic(manifold, realization, p0, v0, T, h=1e-2):
    """
    Geodesic of ``D~`` for one realization,
    ``x'' + Gamma(x', x') + (eps' / eps) x' = 0``

    The undivided equation ``eps^2 x'' + Gamma~(x', x') = 0`` and its
    expanded form ``eps^2 (x'' + Gamma(x', x')) + eps eps' x' = 0`` are
    evaluated along the solution and reported as residuals.

    :raises DegenerateRealizationError: for degenerate realizations
    """
    realization.check_usable()

    def damping(x, v):
        eps, gradient, _ = realization.evaluate(x)
        return np.dot(gradient, v) / eps

    def guard(x):
        if realization.eps(x) <= EPS_FLOOR:
            return "eps below floor"
        return None

    curve = integrate_geodesic_flow(manifold, p0, v0, T, h, damping=damping, guard=guard, name="realized geodesic")
    x, v = curve.samples["x"], curve.samples["v"]
    eps, gradient, _ = realization.evaluate(x)
    rate = np.einsum("...i,...i->...", gradient, v)
    gamma = christoffel_at(manifold, x)
    gammaV = np.einsum("...kij,...i,...j->...k", gamma, v, v)
    acceleration = -gammaV - (rate / eps)[..., None] * v
    scale = np.maximum(1.0, np.linalg.norm(acceleration, axis=-1))
    stochasticGammaV = np.einsum("...kij,...i,...j->...k", stochastic_christoffel(manifold, realization, x), v, v)
    first = (eps ** 2)[..., None] * acceleration + stochasticGammaV
    second = (eps ** 2)[..., None] * (acceleration + gammaV) + (eps * rate)[..., None] * v
    curve.metadata.update({
        "seed": realization.seed,
        "eps": eps,
        "geodesic1_residual": float(np.max(np.abs(first).max(axis=-1) / scale)),
        "geodesic2_residual": float(np.max(np.abs(second).max(axis=-1) / scale)),
    })
    return curve

class AlongCurveField(object):
    """
    Vector field defined only along a curve, ``value(t)`` and ``derivative(t)``
    """
    def __init__(self, value, derivative, name="X(t)"):
        self.value = value
        self.derivative = derivative
        self.name = name

    def __repr__(self):
        return "AlongCurveField(name={0})".format(self.name)

def _along(field, curve):
    if isinstance(field, VectorFieldExpr):
        return (lambda t: field(curve.position(t)),
                lambda t: field.derivative_along(curve.position(t), curve.velocity(t)))
    return field.value, field.derivative

def recovery_limit_check(manifold, source, curve, field, t, steps=RECOVERY_STEPS, tolerance=0.15):
    """
    Recover the (expected) stochastic covariant derivative from transported
    difference quotients

    The left side ``a (X' + Gamma(x', X)) + b X`` is compared with
    ``a (P X(t + dt) - X(t)) / dt`` where ``P`` transports back from
    ``t + dt`` to ``t`` in the same regime. The residual decays linearly in
    ``dt``; the report passes when the fitted log-log slope is within
    ``tolerance`` of one, or when every residual is at round off level.

    :param source: :class:`FieldSpec`, :class:`FieldRealization` or ``None``
    :param field: :class:`VectorFieldExpr` or :class:`AlongCurveField`
    :param steps: decreasing sequence of ``dt``
    :type steps: sequence
    :returns: report with the residual per ``dt`` and the fitted slope
    :rtype: :class:`IdentityReport`
    """
    value, derivative = _along(field, curve)
    point = curve.position(t)
    velocity = curve.velocity(t)
    a, b = transport_weights(source, point, velocity)
    current = value(t)
    gammaX = np.einsum("kij,i,j->k", christoffel_at(manifold, point), velocity, current)
    lhs = a * (derivative(t) + gammaX) + b * current
    residuals, quotients = [], []
    for dt in steps:
        times = np.linspace(t + dt, t, RECOVERY_SUBSTEPS + 1)
        propagator = linear_rk4(_transport_matrices(manifold, curve, times, source), times, np.eye(DIMENSION))[-1]
        quotient = a * (propagator @ value(t + dt) - current) / dt
        quotients.append(quotient)
        residuals.append(float(np.max(np.abs(lhs - quotient))))
    residuals = np.array(residuals)
    roundOff = 1e-9 * max(1.0, float(np.max(np.abs(lhs))))
    if np.all(residuals <= roundOff):
        slope = 1.0
    else:
        usable = residuals > roundOff
        slope = float(np.polyfit(np.log(np.asarray(steps)[usable]), np.log(residuals[usable]), 1)[0])
    return IdentityReport("transport.recovery_limit", lhs, quotients[-1], tolerance,
                          residualNorm=abs(slope - 1.0), point=np.asarray(point).tolist(),
                          seed=getattr(source, "seed", None),
                          extra={"steps": list(steps), "residuals": residuals, "slope": slope})

def brownian_increments(masterSeed, index, stepCount, h):
    """
    Increments of path ``index``, drawn from ``mix_seed(masterSeed, index)``
    """
    rng = np.random.default_rng(mix_seed(masterSeed, index))
    return rng.standard_normal(stepCount) * np.sqrt(h)

def _brownian_setup(manifold, curve, h):
    if h is None:
        h = 1e-3 * curve.duration
    times = step_grid(curve.tSpan[0], curve.tSpan[1], h)
    points = curve.position(times[:-1])
    manifold.check_points(points)
    drift = -np.einsum("...kij,...i->...kj", christoffel_at(manifold, points), curve.velocity(times[:-1]))
    return times, drift

def brownian_transport(manifold, curve, v0, h=None, nPaths=BROWNIAN_PATHS, masterSeed=0,
                       zeroNoise=False, storedPaths=BROWNIAN_STORED_PATHS, chunkSize=BROWNIAN_CHUNK):
    """
    Parallel transport driven by Brownian noise,
    ``dX = -Gamma(x', X) dt - X dB``, integrated with Euler-Maruyama

    Paths are processed in index order so the reductions are deterministic
    for a given seed.

    :param h: step size, defaults to ``1e-3`` of the curve duration
    :type h: float
    :param nPaths: number of paths
    :type nPaths: int
    :param masterSeed: seed the per path seeds are mixed from
    :type masterSeed: int
    :param zeroNoise: force all increments to zero
    :type zeroNoise: bool
    :returns: stored sample paths and the mean trajectory, whose metadata
        holds the Monte Carlo summary
    :rtype: tuple
    """
    startTime = datetime.datetime.utcnow()
    times, drift = _brownian_setup(manifold, curve, h)
    stepCount = len(times) - 1
    v0 = np.asarray(v0, dtype=float)
    total = np.zeros((len(times), DIMENSION))
    finals = np.empty((nPaths, DIMENSION))
    samples = []
    for start in range(0, nPaths, chunkSize):
        indices = range(start, min(start + chunkSize, nPaths))
        if zeroNoise:
            dB = np.zeros((len(indices), stepCount))
        else:
            dB = np.array([brownian_increments(masterSeed, index, stepCount, times[1] - times[0])
                           for index in indices])
        trajectory = euler_maruyama(lambda n, t, y: y @ drift[n].T,
                                    lambda n, t, y: -y,
                                    np.tile(v0, (len(indices), 1)), times, dB)
        total += trajectory.sum(axis=1)
        finals[start:start + len(indices)] = trajectory[-1]
        for offset, index in enumerate(indices):
            if index >= storedPaths:
                break
            samples.append(TransportSolution(curve, times, trajectory[:, offset], "brownian-sample",
                                             metadata={"seed": mix_seed(masterSeed, index), "path": index,
                                                       "h": float(times[1] - times[0])}))
    mean = total / nPaths
    stderr = finals.std(axis=0, ddof=1) / np.sqrt(nPaths) if nPaths > 1 else np.zeros(DIMENSION)
    logNorms = np.log(np.linalg.norm(finals, axis=-1))
    summary = {
        "mean": mean[-1],
        "stderr": stderr,
        "n_paths": nPaths,
        "seed": masterSeed,
        "h": float(times[1] - times[0]),
        "log_norm_variance": float(np.var(logNorms, ddof=1)) if nPaths > 1 else 0.0,
    }
    log.info("Brownian transport with '%s' paths took '%s'", nPaths, datetime.datetime.utcnow() - startTime)
    return samples, TransportSolution(curve, times, mean, "brownian-mean", metadata=summary)

def brownian_fundamental_matrix(manifold, curve, dB, h=None):
    """
    Fundamental matrix ``dPsi = A Psi dt - Psi dB``, ``Psi(0) = I`` for one
    path of increments, so that the path solution is ``Psi v0``

    :param dB: increments of shape (steps,)
    :type dB: :class:`numpy.ndarray`
    :returns: ``Psi`` for every grid time
    :rtype: :class:`numpy.ndarray`
    """
    times, drift = _brownian_setup(manifold, curve, h)
    dB = np.asarray(dB, dtype=float)
    if dB.shape != (len(times) - 1,):
        raise ValueError("'dB' needs {0} increments".format(len(times) - 1))
    psi = np.empty((len(times), DIMENSION, DIMENSION))
    psi[0] = np.eye(DIMENSION)
    for n, step in enumerate(np.diff(times)):
        psi[n + 1] = psi[n] + step * drift[n] @ psi[n] - psi[n] * dB[n]
    return psi

def wrap_angle(angle):
    """
    Reduce an angle into ``(-pi, pi]``
    """
    return np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), 2 * np.pi)

class HolonomyResult(object):
    """
    Holonomy of a closed curve

    :param angle: rotation angle in a g-orthonormal frame, in ``(-pi, pi]``
    :type angle: float
    :param linearMap: end to start transport map in coordinates
    :type linearMap: :class:`numpy.ndarray`
    :param logScale: ``log`` of the scale factor of the map
    :type logScale: float
    """
    def __init__(self, angle, linearMap, orthonormalMap, logScale, regime, metadata=None):
        self.angle = float(angle)
        self.linearMap = linearMap
        self.orthonormalMap = orthonormalMap
        self.logScale = float(logScale)
        self.regime = regime
        self.metadata = dict(metadata or {})

    def __repr__(self):
        return "HolonomyResult(regime={0}, angle={1}, logScale={2})".format(self.regime, self.angle, self.logScale)

    def to_dict(self):
        return {
            "regime": self.regime,
            "angle": self.angle,
            "log_scale": self.logScale,
            "linear_map": self.linearMap,
            "orthonormal_map": self.orthonormalMap,
            "metadata": self.metadata,
        }

def holonomy(manifold, curve, regime="standard", source=None, h=DEFAULT_STEP):
    """
    Holonomy of the transport around a closed curve

    Only the linear regimes have a transport map. Brownian transport is a
    random map per path; its mean frame is available from
    :func:`brownian_transport` and is not reported as a holonomy here.

    :param regime: ``standard``, ``expected`` or ``realized``
    :type regime: str
    :param source: field spec or realization for the random regimes
    :returns: holonomy
    :rtype: :class:`HolonomyResult`
    :raises ValueError: for curves that are not closed
    """
    if not curve.is_closed(manifold):
        raise ValueError("'curve' needs to be closed for holonomy")
    if regime == "standard":
        solution = standard_transport(manifold, curve, None, h)
    elif regime == "expected":
        solution = expected_transport(manifold, source, curve, None, h)
    elif regime == "realized":
        solution = realized_transport(manifold, source, curve, None, h)
    else:
        raise ValueError("'regime' needs to be one of standard, expected or realized")
    if solution.truncated:
        raise ValueError("transport around '{0}' did not complete".format(curve.name))
    linearMap = solution.propagators[-1]
    root = np.real(sqrtm(manifold.metric(curve.position(curve.tSpan[0]))))
    orthonormalMap = root @ linearMap @ np.linalg.inv(root)
    rotation, _ = polar(orthonormalMap)
    angle = wrap_angle(np.arctan2(rotation[1, 0], rotation[0, 0]))
    logScale = 0.5 * np.log(abs(np.linalg.det(orthonormalMap)))
    return HolonomyResult(angle, linearMap, orthonormalMap, logScale, regime,
                          metadata={"h": float(h), "curve": curve.name})
