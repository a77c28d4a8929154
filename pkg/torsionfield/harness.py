"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Seeded experiment runs that turn a configuration into JSON and CSV artifacts
"""
import datetime
import logging
import os

import numpy as np

from .config import ConfigError
from .geometry import (geodesic_standard,
                       latitude_curve,
                       line_curve,
                       random_scalar_field,
                       random_vector_field)
from .quadrature import chart_rule
from .randomField import (DegenerateRealizationError,
                          field_moments,
                          resample_realization,
                          sample_realization)
from .reports import residual_norm, write_csv, write_json
from .stochasticCurvature import curvature_report, gauss_bonnet_deviation
from .stochasticLaplace import (divergence_theorem_check,
                                spherical_band,
                                stochastic_gradient,
                                stochastic_laplacian,
                                torus_strip)
from .transport import (brownian_transport,
                        expected_geodesic,
                        expected_transport,
                        holonomy,
                        realized_geodesic,
                        realized_transport,
                        standard_transport)


log = logging.getLogger(__name__)

SUBCOMMANDS = {
    "sample-field": (None,),
    "geodesic": ("expected", "realized", "standard"),
    "transport": ("expected", "realized", "brownian"),
    "curvature": (None,),
    "gauss-bonnet": (None,),
    "laplacian": (None,),
    "divergence-theorem": (None,),
}
SAMPLE_GRID = (16, 32)
DEGENERATE_DUMP = "degenerate-realization.json"

class ExperimentRun(object):
    """
    Files written by one experiment and the payload of its JSON document
    """
    def __init__(self, subcommand, mode, payload, files):
        self.subcommand = subcommand
        self.mode = mode
        self.payload = payload
        self.files = files

    def __repr__(self):
        return "ExperimentRun(subcommand={0}, mode={1}, files={2})".format(self.subcommand, self.mode, self.files)

def _stem(subcommand, mode):
    return subcommand if mode is None else "{0}-{1}".format(subcommand, mode)

def obtain_realization(config, spec):
    """
    Draw the configured realization, applying the degenerate policy

    ``resample-and-report`` draws derived seeds until a usable realization
    appears and reports the rejected seeds. ``abort`` dumps the degenerate
    realization for replay and raises.

    :returns: realization and list of rejected seeds
    :rtype: tuple
    :raises DegenerateRealizationError: under the ``abort`` policy
    """
    seed = config["field_spec"]["seed"]
    if config["monte_carlo"]["degenerate_policy"] == "resample-and-report":
        return resample_realization(spec, seed)
    realization = sample_realization(spec, seed)
    if realization.degenerate:
        path = os.path.join(config.outputDirectory, DEGENERATE_DUMP)
        write_json(path, {"realization": realization, "config": config.resolved}, config.hash, seed)
        raise DegenerateRealizationError(
            "realization with seed '{0}' is degenerate, dumped to '{1}'".format(seed, path), seed=seed)
    return realization, []

def build_curve(config, manifold):
    """
    Curve described by the ``curve`` section, a latitude on the sphere and a
    coordinate line elsewhere when ``kind`` is ``auto``
    """
    section = config["curve"]
    kind = section["kind"]
    if kind == "auto":
        kind = "latitude" if manifold.name == "sphere" else "line"
    start = manifold.defaultPoint if section["start"] is None else section["start"]
    if kind == "latitude":
        if manifold.name != "sphere":
            raise ConfigError("latitude curves need the sphere", "curve.kind")
        return latitude_curve(manifold, section["latitude"])
    if kind == "line":
        return line_curve(start, section["direction"], section["length"])
    return geodesic_standard(manifold, start, section["direction"], section["length"],
                             config["integrator"]["h"])

def probe_points(config, manifold):
    section = config["probe"]
    if section["point"] is not None:
        return manifold.check_points(np.atleast_2d(section["point"]))
    return manifold.sample_points(np.random.default_rng(section["seed"]), section["n_points"], margin=0.5)

def _write(config, subcommand, mode, payload, table=None):
    stem = _stem(subcommand, mode)
    directory = config.outputDirectory
    formats = config["output"]["formats"]
    document = dict(payload)
    document.update({"subcommand": subcommand, "mode": mode, "config": config.resolved})
    files = []
    if "json" in formats:
        files.append(write_json(os.path.join(directory, stem + ".json"), document, config.hash, config.seed))
    if table is not None and "csv" in formats:
        header, rows = table
        files.append(write_csv(os.path.join(directory, stem + ".csv"), header, rows, config.hash, config.seed))
    return ExperimentRun(subcommand, mode, document, files)

def _sample_field(config, manifold, spec):
    realization, rejected = obtain_realization(config, spec)
    rule = chart_rule(manifold, SAMPLE_GRID)
    eps, gradient, _ = realization.evaluate(rule.nodes)
    _, secondMoment, _, _ = field_moments(spec, rule.nodes)
    rows = [[float(p[0]), float(p[1]), float(e), float(d[0]), float(d[1]), float(m)]
            for p, e, d, m in zip(rule.nodes, eps, gradient, secondMoment)]
    payload = {
        "realization": realization,
        "rejected_seeds": rejected,
        "spec": spec,
        "orthonormality_residual": spec.orthonormality_residual(),
    }
    return payload, (["x1", "x2", "eps", "deps1", "deps2", "E_eps2"], rows)

def _geodesic(config, manifold, spec, mode):
    section = config["integrator"]
    p0 = manifold.defaultPoint if section["p0"] is None else section["p0"]
    payload = {}
    if mode == "standard":
        curve = geodesic_standard(manifold, p0, section["v0"], section["T"], section["h"])
    elif mode == "expected":
        curve = expected_geodesic(manifold, spec, p0, section["v0"], section["T"], section["h"])
    else:
        realization, rejected = obtain_realization(config, spec)
        payload["rejected_seeds"] = rejected
        curve = realized_geodesic(manifold, realization, p0, section["v0"], section["T"], section["h"])
    samples = curve.samples
    rows = [[float(t)] + x.tolist() + v.tolist() for t, x, v in zip(samples["t"], samples["x"], samples["v"])]
    payload.update({"curve": curve.name, "final_point": samples["x"][-1], "final_velocity": samples["v"][-1],
                    "metadata": curve.metadata})
    return payload, (["t", "x1", "x2", "v1", "v2"], rows)

def _transport(config, manifold, spec, mode):
    curve = build_curve(config, manifold)
    v0 = config["integrator"]["v0"]
    h = config["integrator"]["h"]
    payload = {"curve": curve.name}
    if mode == "brownian":
        samples, solution = brownian_transport(manifold, curve, v0, nPaths=config["verify"]["n_paths"],
                                               masterSeed=config["monte_carlo"]["master_seed"])
        standard = standard_transport(manifold, curve, v0, solution.metadata["h"])
        payload.update({"summary": solution.metadata, "standard_final": standard.final,
                        "stored_paths": [sample.metadata for sample in samples]})
        return payload, (solution.header(), list(solution.rows()))
    if mode == "expected":
        source = spec
        solution = expected_transport(manifold, spec, curve, v0, h)
    else:
        source, rejected = obtain_realization(config, spec)
        payload["rejected_seeds"] = rejected
        solution = realized_transport(manifold, source, curve, v0, h)
    standard = standard_transport(manifold, curve, v0, h)
    factor = solution.metadata["factor"]
    payload.update({
        "final": solution.final,
        "factor": factor[-1],
        "scaling_residual": residual_norm(solution.frames, factor[:, None] * standard.frames[:len(factor)]),
        "metadata": {key: value for key, value in solution.metadata.items() if key not in ("alpha", "eps", "factor")},
    })
    if curve.is_closed(manifold) and not solution.truncated:
        result = holonomy(manifold, curve, mode, source, h)
        payload["holonomy"] = result
        payload["holonomy_angle_mod_2pi"] = float(np.mod(result.angle, 2 * np.pi))
    return payload, (solution.header(), list(solution.rows()))

def _curvature(config, manifold, spec):
    realization, rejected = obtain_realization(config, spec)
    point = manifold.defaultPoint if config["probe"]["point"] is None else config["probe"]["point"]
    report = curvature_report(manifold, realization, point)
    return {"report": report, "rejected_seeds": rejected}, None

def _gauss_bonnet(config, manifold, spec):
    if not manifold.closed:
        raise ConfigError("gauss-bonnet needs a closed surface", "manifold.name")
    grid = (config["quadrature"]["n_theta"], config["quadrature"]["n_phi"])
    result = gauss_bonnet_deviation(manifold, spec, grid, config["monte_carlo"]["n_realizations"],
                                    config["monte_carlo"]["master_seed"])
    return result.to_dict(), None

def _laplacian(config, manifold, spec):
    realization, rejected = obtain_realization(config, spec)
    points = probe_points(config, manifold)
    rng = np.random.default_rng(config["probe"]["seed"])
    f = random_scalar_field(rng)
    formula = stochastic_laplacian(manifold, realization, f, points, "formula")
    composed = stochastic_laplacian(manifold, realization, f, points, "composed")
    gradient = stochastic_gradient(manifold, realization, f, points)
    rows = [p.tolist() + [float(a), float(b)] + d.tolist() for p, a, b, d in zip(points, formula, composed, gradient)]
    payload = {"residual": residual_norm(formula, composed), "field": f.name, "rejected_seeds": rejected,
               "seed": realization.seed}
    return payload, (["x1", "x2", "laplacian_formula", "laplacian_composed", "grad1", "grad2"], rows)

def _divergence_theorem(config, manifold, spec):
    if manifold.name == "sphere":
        domain = spherical_band(manifold)
    elif manifold.name == "flat-torus":
        domain = torus_strip(manifold)
    else:
        raise ConfigError("divergence-theorem needs a manifold with a periodic axis", "manifold.name")
    realization, rejected = obtain_realization(config, spec)
    X = random_vector_field(np.random.default_rng(config["probe"]["seed"]))
    grid = (config["quadrature"]["n_theta"], config["quadrature"]["n_phi"])
    check = divergence_theorem_check(domain, realization, X, grid)
    return {"check": check, "domain": repr(domain), "rejected_seeds": rejected}, None

def run_experiment(subcommand, config, mode=None):
    """
    Run one experiment and write its artifacts

    :param subcommand: one of :data:`SUBCOMMANDS`
    :type subcommand: str
    :param config: resolved configuration
    :type config: :class:`ExperimentConfig`
    :param mode: regime for ``geodesic`` and ``transport``
    :type mode: str
    :returns: the run with its payload and written files
    :rtype: :class:`ExperimentRun`
    :raises ValueError: for unknown subcommands or modes
    """
    if subcommand not in SUBCOMMANDS:
        raise ValueError("Unknown subcommand '{0}', expected one of {1}".format(subcommand, sorted(SUBCOMMANDS)))
    if mode not in SUBCOMMANDS[subcommand]:
        raise ValueError("'mode' needs to be one of {0} for '{1}'".format(SUBCOMMANDS[subcommand], subcommand))
    startTime = datetime.datetime.utcnow()
    manifold = config.build_manifold()
    spec = config.build_field_spec(manifold)
    if subcommand == "sample-field":
        payload, table = _sample_field(config, manifold, spec)
    elif subcommand == "geodesic":
        payload, table = _geodesic(config, manifold, spec, mode)
    elif subcommand == "transport":
        payload, table = _transport(config, manifold, spec, mode)
    elif subcommand == "curvature":
        payload, table = _curvature(config, manifold, spec)
    elif subcommand == "gauss-bonnet":
        payload, table = _gauss_bonnet(config, manifold, spec)
    elif subcommand == "laplacian":
        payload, table = _laplacian(config, manifold, spec)
    else:
        payload, table = _divergence_theorem(config, manifold, spec)
    run = _write(config, subcommand, mode, payload, table)
    log.info("Experiment '%s' took '%s'", _stem(subcommand, mode), datetime.datetime.utcnow() - startTime)
    return run
