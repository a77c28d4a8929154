"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

One shot verification suite running every identity check on the configured
manifolds and collecting a pass/fail report
"""
import datetime
import logging
import os

import numpy as np

from ._version import __version__
from .geometry import (curvature_at,
                       gauss_curvature,
                       geodesic_standard,
                       latitude_curve,
                       line_curve,
                       random_scalar_field,
                       random_vector_field,
                       ricci_at)
from .harness import obtain_realization
from .integrators import step_grid
from .randomField import (alpha_beta_along,
                          field_moments,
                          field_variance,
                          mix_seed,
                          monte_carlo_moments,
                          resample_realization)
from .reports import IdentityReport, residual_norm, write_json
from .stochasticConnection import (AXIOM_SCALARS,
                                   IDENTITY_TOLERANCE,
                                   christoffel_metric_identity_residual,
                                   connection_axiom_residuals,
                                   metric_compatibility_residuals,
                                   predicted_deterministic_torsion,
                                   randomize,
                                   stochastic_christoffel,
                                   stochastic_christoffel_direct,
                                   stochastic_torsion)
from .stochasticCurvature import (SCALING_TOLERANCE,
                                  SECTIONAL_TOLERANCE,
                                  SYMMETRY_TOLERANCE,
                                  bianchi2_residual,
                                  covariant_derivative_Rtilde,
                                  gauss_bonnet_deviation,
                                  stochastic_curvature_at,
                                  stochastic_curvature_form,
                                  stochastic_ricci_scalar,
                                  stochastic_riemann_4tensor,
                                  stochastic_sectional)
from .stochasticLaplace import (DIVERGENCE_TOLERANCE,
                                divergence,
                                divergence_theorem_check,
                                spherical_band,
                                stochastic_divergence,
                                stochastic_gradient,
                                stochastic_laplacian,
                                torus_strip)
from .transport import (brownian_transport,
                        expected_geodesic,
                        expected_transport,
                        holonomy,
                        log_weight_integral,
                        realized_geodesic,
                        realized_transport,
                        recovery_limit_check,
                        standard_transport,
                        wrap_angle)


log = logging.getLogger(__name__)

IDENTITY_MANIFEST = (
    ("manifold.model", "geometry"),
    ("field.moments", "random field"),
    ("field.alpha_variance", "random field"),
    ("connection.additivity", "connection"),
    ("connection.linearity", "connection"),
    ("connection.leibniz", "connection"),
    ("connection.christoffel", "connection"),
    ("metric.compatibility", "connection"),
    ("metric.incompatibility", "connection"),
    ("christoffel.metric_identity", "connection"),
    ("torsion.stochastic", "torsion"),
    ("torsion.deterministic", "torsion"),
    ("curvature.scaling", "curvature"),
    ("curvature.lowered_scaling", "curvature"),
    ("curvature.symmetries", "curvature"),
    ("curvature.sectional", "curvature"),
    ("curvature.ricci", "curvature"),
    ("curvature.covariant_derivative", "curvature"),
    ("curvature.bianchi2", "curvature"),
    ("curvature.form", "curvature"),
    ("transport.realized_scaling", "transport"),
    ("transport.expected_scaling", "transport"),
    ("transport.expected_factor", "transport"),
    ("transport.holonomy", "transport"),
    ("transport.brownian_mean", "transport"),
    ("transport.brownian_variance", "transport"),
    ("transport.recovery_limit", "transport"),
    ("geodesic.realized_equations", "transport"),
    ("solver.convergence_order", "solver"),
    ("laplace.gradient", "laplacian"),
    ("laplace.divergence", "laplacian"),
    ("laplace.laplacian", "laplacian"),
    ("laplace.divergence_theorem", "laplacian"),
    ("gauss_bonnet.classical", "gauss-bonnet"),
    ("gauss_bonnet.deviation", "gauss-bonnet"),
)
REPORT_ONLY = ("christoffel.metric_identity", "curvature.bianchi2")

TORSION_TOLERANCE = 1e-6
TRANSPORT_TOLERANCE = 1e-6
DERIVATIVE_TOLERANCE = 1e-5
GRADIENT_TOLERANCE = 1e-10
HOLONOMY_TOLERANCE = 1e-5
HOLONOMY_STEP = 1e-4
GAUSS_BONNET_TOLERANCE = 1e-6
ORDER_TOLERANCE = 0.3
ORDER_STEPS = (0.1, 0.05, 0.025)
NOISY_ORDER_STEPS = (0.05, 0.025, 0.0125)
ORDER_FLOOR = 1e-11
MODEL_TOLERANCE = 1e-6
BROWNIAN_VARIANCE_TOLERANCE = 0.15
SAMPLED_REALIZATIONS = 5
TORSION_FIELD_PAIRS = 4
STANDARD_ERRORS = 3.0
CURVATURE_POINTS = 10
RECOVERY_POINTS = 3
POINT_MARGIN = 0.5
HOLONOMY_LATITUDE = np.pi / 3

class VerificationSuiteReport(object):
    """
    Merged identity reports of a verification run

    :param reports: one report per identity of :data:`IDENTITY_MANIFEST`
    :type reports: list
    :param metadata: seeds, configuration hash and sample counts
    :type metadata: dict
    """
    def __init__(self, reports, metadata):
        self.reports = reports
        self.metadata = metadata

    def __repr__(self):
        return "VerificationSuiteReport(passed={0}, summary={1})".format(self.passed, self.summary)

    @property
    def failures(self):
        return [report for report in self.reports if report.asserting and not report.passed]

    @property
    def passed(self):
        return not self.failures

    @property
    def summary(self):
        asserting = [report for report in self.reports if report.asserting]
        return {
            "total": len(self.reports),
            "asserting": len(asserting),
            "passed": sum(1 for report in asserting if report.passed),
            "failed": len(self.failures),
            "report_only": len(self.reports) - len(asserting),
        }

    def report(self, identityId):
        for report in self.reports:
            if report.identityId == identityId:
                return report
        raise KeyError(identityId)

    def to_dict(self):
        groups = dict(IDENTITY_MANIFEST)
        return {
            "passed": self.passed,
            "summary": self.summary,
            "metadata": self.metadata,
            "groups": {group: [identityId for identityId, name in IDENTITY_MANIFEST if name == group]
                       for group in sorted(set(groups.values()))},
            "reports": [report.to_dict() for report in self.reports],
        }

    def to_text(self):
        lines = ["torsionfield {0} verification".format(self.metadata.get("version", "")), ""]
        groups = dict(IDENTITY_MANIFEST)
        for report in self.reports:
            if not report.asserting:
                status = "REPORT"
            else:
                status = "PASS" if report.passed else "FAIL"
            lines.append("{0:<6} {1:<14} {2:<32} residual={3!r} tolerance={4!r}".format(
                status, groups[report.identityId], report.identityId, report.residualNorm, report.tolerance))
        summary = self.summary
        lines.append("")
        lines.append("{passed}/{asserting} asserting checks passed, {failed} failed, {report_only} report only".format(
            **summary))
        return "\n".join(lines) + "\n"

    def write(self, directory, configHash, seed):
        """
        Write ``verify.json`` and ``verify.txt`` into ``directory``

        :returns: paths written
        :rtype: list
        """
        jsonPath = write_json(os.path.join(directory, "verify.json"), self.to_dict(), configHash, seed)
        textPath = os.path.join(directory, "verify.txt")
        with open(textPath, "w") as textFile:
            textFile.write("# config_hash={0}\n# seed={1}\n".format(configHash, seed))
            textFile.write(self.to_text())
        return [jsonPath, textPath]

def _within_standard_errors(identityId, mean, expected, stderr, extra=None):
    """
    Report whose residual is the deviation measured in units of three
    standard errors, passing below one
    """
    mean = np.asarray(mean, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scaled = np.abs(mean - expected) / (STANDARD_ERRORS * np.asarray(stderr, dtype=float) + 1e-12)
    return IdentityReport(identityId, mean, expected, 1.0, residualNorm=float(np.max(scaled)), extra=extra)

def _scalar_items(extra):
    return {key: value for key, value in extra.items()
            if isinstance(value, (bool, int, float, str, np.floating, np.integer))}

def merge_reports(identityId, entries):
    """
    Fold the per manifold reports of one identity into a single report
    carrying the worst residual

    :param entries: ``(manifoldName, report)`` pairs
    :type entries: list
    :returns: merged report
    :rtype: :class:`IdentityReport`
    """
    byManifold = {}
    seeds = {}
    worst = None
    for manifoldName, report in entries:
        residual = report.residualNorm if np.isfinite(report.residualNorm) else np.inf
        byManifold[manifoldName] = max(byManifold.get(manifoldName, 0.0), report.residualNorm)
        seeds[manifoldName] = report.seed
        if worst is None or residual > worst[0]:
            worst = (residual, manifoldName, report)
    _, worstManifold, worstReport = worst
    asserting = identityId not in REPORT_ONLY
    extra = {"by_manifold": byManifold, "worst_manifold": worstManifold}
    extra.update(_scalar_items(worstReport.extra))
    if not asserting:
        for key in ("discrepancy_match", "derived_residual"):
            values = [report.extra[key] for _, report in entries if key in report.extra]
            if values:
                extra[key] = max(values)
    return IdentityReport(identityId, None, None, worstReport.tolerance, residualNorm=worstReport.residualNorm,
                          seed=seeds, asserting=asserting, extra=extra)

class _Case(object):
    """
    Manifold, field law, realization, sample points and test fields shared
    by the checks of one manifold
    """
    def __init__(self, config, manifold, index):
        self.config = config
        self.manifold = manifold
        self.spec = config.build_field_spec(manifold)
        self.realization, self.rejected = obtain_realization(config, self.spec)
        rng = np.random.default_rng(mix_seed(config["probe"]["seed"], index))
        self.points = manifold.sample_points(rng, config["verify"]["n_points"], margin=POINT_MARGIN)
        self.X = random_vector_field(rng, name="X")
        self.Y = random_vector_field(rng, name="Y")
        self.Z = random_vector_field(rng, name="Z")
        self.f = random_scalar_field(rng, name="f")
        self.curve = verification_curve(manifold)
        self.samples = self._draw_samples(mix_seed(config["probe"]["seed"], index))

    def _draw_samples(self, pointSeed):
        """
        ``(realization, points, seed)`` triples: the configured realization
        followed by usable realizations drawn from seeds derived from the
        Monte Carlo master seed, each with its own points
        """
        count = max(1, self.config["verify"]["n_points"] // SAMPLED_REALIZATIONS)
        masterSeed = self.config["monte_carlo"]["master_seed"]
        realizations = [self.realization]
        for k in range(1, SAMPLED_REALIZATIONS):
            realization, rejected = resample_realization(self.spec, mix_seed(masterSeed, k))
            self.rejected.extend(rejected)
            realizations.append(realization)
        samples = []
        for k, realization in enumerate(realizations):
            seed = mix_seed(pointSeed, k + 1)
            points = self.manifold.sample_points(np.random.default_rng(seed), count, margin=POINT_MARGIN)
            samples.append((realization, points, seed))
        return samples

def verification_curve(manifold):
    """
    Latitude ``pi / 3`` on the sphere, a coordinate segment elsewhere
    """
    if manifold.name == "sphere":
        return latitude_curve(manifold, HOLONOMY_LATITUDE)
    if manifold.name == "flat-torus":
        return line_curve(manifold.defaultPoint, (1.0, 0.5), 2.0)
    return line_curve(manifold.defaultPoint, (1.0, 0.0), 1.0)

def _model_checks(case):
    check = case.manifold.self_check(case.points)
    residual = max(check["symmetry"], check["partials"]) if check["min_eigenvalue"] > 0 else np.inf
    return [IdentityReport("manifold.model", None, None, MODEL_TOLERANCE, residualNorm=residual, extra=check)]

def _field_checks(case):
    spec, manifold = case.spec, case.manifold
    point = manifold.defaultPoint
    moments = monte_carlo_moments(spec, point, case.config["verify"]["n_mc"],
                                  case.config["monte_carlo"]["master_seed"])
    first, second, _, _ = field_moments(spec, point)
    times = np.linspace(case.curve.tSpan[0], case.curve.tSpan[1], 101)
    alpha, _ = alpha_beta_along(spec, case.curve, times)
    variance = field_variance(spec, case.curve.position(times))
    return [
        _within_standard_errors("field.moments", moments["mean"][:2], [first, second], moments["stderr"][:2],
                                extra={"n_samples": moments["n_samples"]}),
        IdentityReport("field.alpha_variance", alpha - 1.0, variance, 1e-10),
    ]

def _connection_checks(case):
    manifold, realization, points = case.manifold, case.realization, case.points
    X, Y, Z, f = case.X, case.Y, case.Z, case.f
    reports = []
    for a in AXIOM_SCALARS:
        reports.extend(connection_axiom_residuals(manifold, realization, f, X, Y, Z, a, points))
    reports.append(IdentityReport("connection.christoffel", stochastic_christoffel(manifold, realization, points),
                                  stochastic_christoffel_direct(manifold, realization, points), IDENTITY_TOLERANCE,
                                  seed=realization.seed))
    reports.extend(metric_compatibility_residuals(manifold, realization, X, Y, Z, points))
    reports.append(christoffel_metric_identity_residual(manifold, realization, points))
    reports.extend(_torsion_checks(case))
    return reports

def _torsion_checks(case):
    """
    Torsion over every sampled realization, with a fresh field pair for
    each slice of its points
    """
    manifold = case.manifold
    stochasticResiduals, deterministicResiduals = [], []
    total = 0
    for realization, points, seed in case.samples:
        rng = np.random.default_rng(mix_seed(seed, 0))
        for chunk in np.array_split(points, min(TORSION_FIELD_PAIRS, len(points))):
            X, Y = random_vector_field(rng, name="X"), random_vector_field(rng, name="Y")
            stochastic, deterministic = stochastic_torsion(manifold, realization, X, Y, chunk)
            stochasticResiduals.append(residual_norm(stochastic, 0.0))
            deterministicResiduals.append(
                residual_norm(deterministic, predicted_deterministic_torsion(manifold, realization, X, Y, chunk)))
            total += len(chunk)
    seeds = [realization.seed for realization, _, _ in case.samples]
    extra = {"n_samples": total, "n_realizations": len(seeds)}
    return [
        IdentityReport("torsion.stochastic", None, None, TORSION_TOLERANCE,
                       residualNorm=max(stochasticResiduals), seed=seeds, extra=extra),
        IdentityReport("torsion.deterministic", None, None, TORSION_TOLERANCE,
                       residualNorm=max(deterministicResiduals), seed=seeds, extra=extra),
    ]

def _random_planes(rng, count):
    """
    Pairs of tangent vectors at least 45 degrees apart with lengths in
    ``[0.5, 2]``
    """
    angles = rng.uniform(0.0, 2 * np.pi, count)
    openings = rng.uniform(np.pi / 4, 3 * np.pi / 4, count)
    lengths = rng.uniform(0.5, 2.0, (2, count))
    u = lengths[0][:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    v = lengths[1][:, None] * np.stack([np.cos(angles + openings), np.sin(angles + openings)], axis=-1)
    return u, v

def _sampled_curvature_checks(case):
    """
    ``R~ = eps^3 R`` and ``K~ = K`` over every sampled realization, with a
    random plane at each point
    """
    manifold = case.manifold
    scalingResiduals, sectionalResiduals = [], []
    total = 0
    for realization, points, seed in case.samples:
        direct = stochastic_curvature_at(manifold, realization, points, "direct")
        scaled = stochastic_curvature_at(manifold, realization, points, "scaled")
        scalingResiduals.append(residual_norm(direct, scaled))
        u, v = _random_planes(np.random.default_rng(mix_seed(seed, 1)), len(points))
        stochasticSectional, sectional = stochastic_sectional(manifold, realization, points, u, v)
        sectionalResiduals.append(residual_norm(stochasticSectional, sectional))
        total += len(points)
    seeds = [realization.seed for realization, _, _ in case.samples]
    extra = {"n_samples": total, "n_realizations": len(seeds)}
    return [
        IdentityReport("curvature.scaling", None, None, SCALING_TOLERANCE,
                       residualNorm=max(scalingResiduals), seed=seeds, extra=extra),
        IdentityReport("curvature.sectional", None, None, SECTIONAL_TOLERANCE,
                       residualNorm=max(sectionalResiduals), seed=seeds, extra=extra),
    ]

def _curvature_checks(case):
    manifold, realization = case.manifold, case.realization
    points = case.points[:CURVATURE_POINTS]
    seed = realization.seed
    eps = np.asarray(realization.eps(points), dtype=float)
    lowered, symmetries = stochastic_riemann_4tensor(manifold, realization, points)
    _, rDown = curvature_at(manifold, points)
    ricci, _ = ricci_at(manifold, points)
    stochasticRicci, _ = stochastic_ricci_scalar(manifold, realization, points)
    derivativeDirect, derivativeFormula = covariant_derivative_Rtilde(manifold, realization, points[:3])
    X, Y = case.X, case.Y
    form, _ = stochastic_curvature_form(manifold, realization, points, X, Y)
    area = manifold.volume_element(points) * np.linalg.det(
        np.stack([randomize(X, realization)(points), randomize(Y, realization)(points)], axis=-1))
    return _sampled_curvature_checks(case) + [
        IdentityReport("curvature.lowered_scaling", lowered, eps[..., None, None, None, None] ** 4 * rDown,
                       SCALING_TOLERANCE, seed=seed),
        IdentityReport("curvature.symmetries", None, None, SYMMETRY_TOLERANCE,
                       residualNorm=max(symmetries.values()), seed=seed, extra=symmetries),
        IdentityReport("curvature.ricci", stochasticRicci, (eps ** 3)[..., None, None] * ricci,
                       SCALING_TOLERANCE, seed=seed),
        IdentityReport("curvature.covariant_derivative", derivativeDirect, derivativeFormula,
                       DERIVATIVE_TOLERANCE, seed=seed),
        bianchi2_residual(manifold, realization, points, X, Y, case.Z),
        IdentityReport("curvature.form", form, gauss_curvature(manifold, points) / (2 * np.pi) * area,
                       IDENTITY_TOLERANCE, seed=seed),
    ]

def _observed_orders(solve, steps):
    """
    log2 error ratios of ``solve(h)`` under step halving against a run at
    an eighth of the finest step. Pairs at round off level are dropped and
    truncated runs (``None``) give no orders.
    """
    reference = solve(steps[-1] / 8)
    finals = [solve(h) for h in steps]
    if reference is None or any(final is None for final in finals):
        return []
    errors = np.array([np.linalg.norm(final - reference) for final in finals])
    usable = (errors[:-1] > ORDER_FLOOR) & (errors[1:] > ORDER_FLOOR)
    return np.log2(errors[:-1][usable] / errors[1:][usable]).tolist()

def _geodesic_final(integrate):
    def solve(h):
        curve = integrate(h)
        return None if curve.truncated else curve.samples["x"][-1]
    return solve

def _order_report(case):
    """
    Observed order of the geodesic and transport solvers under step halving,
    the random geodesics on a finer ladder
    """
    manifold, spec, realization = case.manifold, case.spec, case.realization
    p0, v0 = manifold.defaultPoint, (0.6, 0.8)
    orders = {
        "standard_geodesic": _observed_orders(
            _geodesic_final(lambda h: geodesic_standard(manifold, p0, v0, 1.0, h)), ORDER_STEPS),
        "expected_geodesic": _observed_orders(
            _geodesic_final(lambda h: expected_geodesic(manifold, spec, p0, v0, 1.0, h)), NOISY_ORDER_STEPS),
        "realized_geodesic": _observed_orders(
            _geodesic_final(lambda h: realized_geodesic(manifold, realization, p0, v0, 1.0, h)), NOISY_ORDER_STEPS),
    }
    if manifold.name == "sphere":
        curve = latitude_curve(manifold, HOLONOMY_LATITUDE)
        orders["standard_transport"] = _observed_orders(
            lambda h: standard_transport(manifold, curve, (1.0, 0.0), h).final, ORDER_STEPS)
    observed = [order for values in orders.values() for order in values]
    residual = max(abs(order - 4.0) for order in observed) if observed else 0.0
    return IdentityReport("solver.convergence_order", observed, [4.0] * len(observed), ORDER_TOLERANCE,
                          residualNorm=residual, seed=realization.seed,
                          extra={"steps": list(ORDER_STEPS), "noisy_steps": list(NOISY_ORDER_STEPS),
                                 "orders": orders})

def _transport_checks(case):
    manifold, spec, realization, curve = case.manifold, case.spec, case.realization, case.curve
    v0 = (1.0, 0.0)
    standard = standard_transport(manifold, curve, v0)
    realized = realized_transport(manifold, realization, curve, v0)
    expected = expected_transport(manifold, spec, curve, v0)
    fineTimes = step_grid(curve.tSpan[0], curve.tSpan[1], HOLONOMY_STEP)
    closedForm = np.exp(-log_weight_integral(spec, curve, fineTimes)[-1])
    reports = [
        IdentityReport("transport.realized_scaling", realized.frames,
                       realized.metadata["factor"][:, None] * standard.frames, TRANSPORT_TOLERANCE,
                       seed=realization.seed),
        IdentityReport("transport.expected_scaling", expected.frames,
                       expected.metadata["factor"][:, None] * standard.frames, TRANSPORT_TOLERANCE),
        IdentityReport("transport.expected_factor", expected.metadata["factor"][-1], closedForm,
                       TRANSPORT_TOLERANCE),
    ]
    if manifold.name == "sphere":
        result = holonomy(manifold, curve, "standard", None, HOLONOMY_STEP)
        predicted = 2 * np.pi * (1 - np.cos(HOLONOMY_LATITUDE))
        reports.append(IdentityReport("transport.holonomy", result.angle, predicted, HOLONOMY_TOLERANCE,
                                      residualNorm=abs(float(wrap_angle(result.angle - predicted))),
                                      extra={"latitude": HOLONOMY_LATITUDE, "h": HOLONOMY_STEP}))
    _, mean = brownian_transport(manifold, curve, v0, nPaths=case.config["verify"]["n_paths"],
                                 masterSeed=case.config["monte_carlo"]["master_seed"])
    reference = standard_transport(manifold, curve, v0, mean.metadata["h"])
    reports.append(_within_standard_errors("transport.brownian_mean", mean.metadata["mean"], reference.final,
                                           mean.metadata["stderr"],
                                           extra={"n_paths": mean.metadata["n_paths"]}))
    variance = mean.metadata["log_norm_variance"]
    reports.append(IdentityReport("transport.brownian_variance", variance, curve.duration,
                                  BROWNIAN_VARIANCE_TOLERANCE,
                                  residualNorm=abs(variance - curve.duration) / curve.duration,
                                  extra={"n_paths": mean.metadata["n_paths"], "duration": curve.duration}))
    for t in np.linspace(curve.tSpan[0], curve.tSpan[1], RECOVERY_POINTS + 2)[1:-1]:
        reports.append(recovery_limit_check(manifold, realization, curve, case.X, t))
    geodesic = realized_geodesic(manifold, realization, manifold.defaultPoint, (0.6, 0.8), 1.0)
    reports.append(IdentityReport("geodesic.realized_equations", None, None, IDENTITY_TOLERANCE,
                                  residualNorm=max(geodesic.metadata["geodesic1_residual"],
                                                   geodesic.metadata["geodesic2_residual"]),
                                  seed=realization.seed))
    reports.append(_order_report(case))
    return reports

def _laplace_checks(case):
    manifold, realization, points = case.manifold, case.realization, case.points
    X, f = case.X, case.f
    seed = realization.seed
    gradient = stochastic_gradient(manifold, realization, f, points)
    pairing = manifold.inner(points, X(points), gradient)
    randomRate = f.derivative_along(points, randomize(X, realization)(points))
    reports = [
        IdentityReport("laplace.gradient", pairing, randomRate, GRADIENT_TOLERANCE, seed=seed),
        IdentityReport("laplace.divergence", stochastic_divergence(manifold, realization, X, points, "formula"),
                       divergence(manifold, randomize(X, realization), points), IDENTITY_TOLERANCE, seed=seed),
        IdentityReport("laplace.laplacian", stochastic_laplacian(manifold, realization, f, points, "formula"),
                       stochastic_laplacian(manifold, realization, f, points, "composed"),
                       IDENTITY_TOLERANCE, seed=seed),
    ]
    domain = None
    if manifold.name == "sphere":
        domain = spherical_band(manifold)
    elif manifold.name == "flat-torus":
        domain = torus_strip(manifold)
    if domain is not None:
        grid = (case.config["quadrature"]["n_theta"], case.config["quadrature"]["n_phi"])
        check = divergence_theorem_check(domain, realization, X, grid)
        reports.append(IdentityReport("laplace.divergence_theorem", check.lhs, check.rhs, DIVERGENCE_TOLERANCE,
                                      seed=seed, extra={"coarse_residual": check.coarse["residual"]}))
    return reports

def _gauss_bonnet_checks(case):
    manifold = case.manifold
    if not manifold.closed:
        return []
    grid = (case.config["quadrature"]["n_theta"], case.config["quadrature"]["n_phi"])
    result = gauss_bonnet_deviation(manifold, case.spec, grid, case.config["monte_carlo"]["n_realizations"],
                                    case.config["monte_carlo"]["master_seed"])
    monteCarlo = result.monteCarlo
    spread = STANDARD_ERRORS * monteCarlo["stderr"] + result.refinementDelta["deviation"] + 1e-12
    return [
        IdentityReport("gauss_bonnet.classical", result.integral, result.chi, GAUSS_BONNET_TOLERANCE,
                       extra={"refinement_delta": result.refinementDelta["integral"]}),
        IdentityReport("gauss_bonnet.deviation", monteCarlo["mean"], result.deviation, 1.0,
                       residualNorm=abs(monteCarlo["mean"] - result.deviation) / spread,
                       extra={"deviation": result.deviation, "cap_bound": result.capBound,
                              "degenerate_count": monteCarlo["degenerate_count"]}),
    ]

CHECK_GROUPS = (
    ("geometry", _model_checks),
    ("random field", _field_checks),
    ("connection", _connection_checks),
    ("curvature", _curvature_checks),
    ("transport", _transport_checks),
    ("laplacian", _laplace_checks),
    ("gauss-bonnet", _gauss_bonnet_checks),
)

def run_verify(config):
    """
    Run every identity check on the configured manifolds

    :param config: resolved configuration
    :type config: :class:`ExperimentConfig`
    :returns: suite report with one merged report per identity
    :rtype: :class:`VerificationSuiteReport`
    """
    startTime = datetime.datetime.utcnow()
    collected = {identityId: [] for identityId, _ in IDENTITY_MANIFEST}
    rejected = {}
    for index, manifoldName in enumerate(config["verify"]["manifolds"]):
        manifold = config.build_manifold(manifoldName)
        case = _Case(config, manifold, index)
        rejected[manifoldName] = case.rejected
        for groupName, check in CHECK_GROUPS:
            groupStart = datetime.datetime.utcnow()
            for report in check(case):
                if report.identityId not in collected:
                    raise KeyError("identity '{0}' is missing from the manifest".format(report.identityId))
                collected[report.identityId].append((manifoldName, report))
            log.info("Verifying %s on '%s' took '%s'", groupName, manifoldName,
                     datetime.datetime.utcnow() - groupStart)
    reports = []
    skipped = []
    for identityId, _ in IDENTITY_MANIFEST:
        if not collected[identityId]:
            log.warning("Identity '%s' does not apply to any of %s", identityId, config["verify"]["manifolds"])
            skipped.append(identityId)
            continue
        report = merge_reports(identityId, collected[identityId])
        if report.asserting and not report.passed:
            log.error("Identity '%s' failed with residual %s > %s", identityId, report.residualNorm, report.tolerance)
        reports.append(report)
    metadata = {
        "version": __version__,
        "config_hash": config.hash,
        "seed": config.seed,
        "master_seed": config["monte_carlo"]["master_seed"],
        "manifolds": list(config["verify"]["manifolds"]),
        "n_points": config["verify"]["n_points"],
        "n_mc": config["verify"]["n_mc"],
        "n_paths": config["verify"]["n_paths"],
        "rejected_seeds": rejected,
        "skipped": skipped,
    }
    log.info("Verification took '%s'", datetime.datetime.utcnow() - startTime)
    return VerificationSuiteReport(reports, metadata)
