import json
import os

import numpy as np
import pytest

from torsionfield.config import ConfigError, ExperimentConfig
from torsionfield.geometry import DomainError
from torsionfield.harness import (DEGENERATE_DUMP,
                                  build_curve,
                                  obtain_realization,
                                  probe_points,
                                  run_experiment)
from torsionfield.randomField import DegenerateRealizationError
from torsionfield.reports import read_csv

def smallConfig(directory, **overrides):
    """
    Fast configuration writing into ``directory``
    """
    settings = {"field_spec.N": 8, "integrator.h": 1e-2, "output.directory": str(directory),
                "quadrature.n_theta": 16, "quadrature.n_phi": 32, "monte_carlo.n_realizations": 20,
                "verify.n_paths": 20, "probe.n_points": 4}
    settings.update(overrides)
    return ExperimentConfig.from_dict({}, settings)

def readJson(path):
    with open(path) as inputFile:
        return json.load(inputFile)

def test_unknown_subcommand(tmp_path):

    config = smallConfig(tmp_path)
    with pytest.raises(ValueError):
        run_experiment("ricci-flow", config)
    with pytest.raises(ValueError):
        run_experiment("geodesic", config)
    with pytest.raises(ValueError):
        run_experiment("curvature", config, "expected")

def test_sample_field(tmp_path):

    config = smallConfig(tmp_path)
    run = run_experiment("sample-field", config)
    assert [os.path.basename(path) for path in run.files] == ["sample-field.json", "sample-field.csv"]
    document = readJson(run.files[0])
    assert document["subcommand"] == "sample-field"
    assert document["config_hash"] == config.hash
    assert document["seed"] == config.seed
    assert len(document["realization"]["coefficients"]) == 8
    metadata, header, rows = read_csv(run.files[1])
    assert metadata["config_hash"] == config.hash
    assert header == ["x1", "x2", "eps", "deps1", "deps2", "E_eps2"]
    assert len(rows) == 16 * 32

def test_output_formats(tmp_path):

    run = run_experiment("sample-field", smallConfig(tmp_path, **{"output.formats": ["csv"]}))
    assert [os.path.basename(path) for path in run.files] == ["sample-field.csv"]

@pytest.mark.parametrize("mode", ["standard", "expected", "realized"])
def test_geodesic(tmp_path, mode):

    run = run_experiment("geodesic", smallConfig(tmp_path), mode)
    assert os.path.basename(run.files[0]) == "geodesic-{0}.json".format(mode)
    document = readJson(run.files[0])
    assert document["mode"] == mode
    assert len(document["final_point"]) == 2
    _, header, rows = read_csv(run.files[1])
    assert header == ["t", "x1", "x2", "v1", "v2"]
    assert float(rows[-1][0]) == 1.0

def test_transport_holonomy(tmp_path):

    config = smallConfig(tmp_path, **{"curve.latitude": 1.0})
    run = run_experiment("transport", config, "realized")
    predicted = np.mod(2 * np.pi * (1 - np.cos(1.0)), 2 * np.pi)
    assert abs(run.payload["holonomy_angle_mod_2pi"] - predicted) < 1e-6
    assert run.payload["scaling_residual"] < 1e-6
    document = readJson(run.files[0])
    assert document["holonomy"]["regime"] == "realized"
    assert os.path.basename(run.files[1]) == "transport-realized.csv"

def test_transport_open_curve(tmp_path):

    run = run_experiment("transport", smallConfig(tmp_path, **{"manifold.name": "flat-torus"}), "expected")
    assert "holonomy" not in run.payload
    assert run.payload["scaling_residual"] < 1e-6

def test_transport_brownian(tmp_path):

    run = run_experiment("transport", smallConfig(tmp_path), "brownian")
    summary = run.payload["summary"]
    assert summary["n_paths"] == 20
    assert len(run.payload["stored_paths"]) == 10
    _, header, _ = read_csv(run.files[1])
    assert header == ["t", "x1", "x2", "X1", "X2"]

def test_curvature(tmp_path):

    run = run_experiment("curvature", smallConfig(tmp_path))
    assert [os.path.basename(path) for path in run.files] == ["curvature.json"]
    report = readJson(run.files[0])["report"]
    assert report["scaling_residual"] < 1e-6
    assert abs(report["K_tilde"] - 1.0) < 1e-6

def test_gauss_bonnet(tmp_path):

    document = readJson(run_experiment("gauss-bonnet", smallConfig(tmp_path)).files[0])
    assert document["chi"] == 2
    assert abs(document["integral"] - 2.0) < 1e-6
    assert document["monte_carlo"]["n_realizations"] == 20
    with pytest.raises(ConfigError):
        run_experiment("gauss-bonnet", smallConfig(tmp_path, **{"manifold.name": "half-plane"}))

def test_laplacian(tmp_path):

    run = run_experiment("laplacian", smallConfig(tmp_path, **{"manifold.name": "half-plane"}))
    assert run.payload["residual"] < 1e-8
    _, _, rows = read_csv(run.files[1])
    assert len(rows) == 4

def test_divergence_theorem(tmp_path):

    run = run_experiment("divergence-theorem", smallConfig(tmp_path, **{"manifold.name": "flat-torus"}))
    check = readJson(run.files[0])["check"]
    assert check["grid"] == [16, 32]
    assert check["coarse"]["grid"] == [8, 16]
    with pytest.raises(ConfigError):
        run_experiment("divergence-theorem", smallConfig(tmp_path, **{"manifold.name": "half-plane"}))

def test_degenerate_policies(tmp_path):

    config = smallConfig(tmp_path, **{"field_spec.c": 100.0, "monte_carlo.degenerate_policy": "abort"})
    spec = config.build_field_spec()
    with pytest.raises(DegenerateRealizationError):
        obtain_realization(config, spec)
    dump = readJson(os.path.join(str(tmp_path), DEGENERATE_DUMP))
    assert dump["realization"]["degenerate"]

    config = smallConfig(tmp_path, **{"field_spec.c": 0.0})
    realization, rejected = obtain_realization(config, config.build_field_spec())
    assert rejected == []
    assert realization.seed == 0

def test_build_curve(tmp_path):

    config = smallConfig(tmp_path)
    torus = config.build_manifold("flat-torus")
    curve = build_curve(config, torus)
    assert curve.metadata["kind"] == "line"
    assert np.allclose(curve.position(0.0), torus.defaultPoint)
    with pytest.raises(ConfigError):
        build_curve(config.with_overrides({"curve.kind": "latitude"}), torus)
    geodesic = build_curve(config.with_overrides({"curve.kind": "geodesic"}), config.build_manifold())
    assert geodesic.samples is not None
    assert build_curve(config, config.build_manifold()).metadata["kind"] == "latitude"

def test_probe_points(tmp_path):

    config = smallConfig(tmp_path)
    sphere = config.build_manifold()
    assert probe_points(config, sphere).shape == (4, 2)
    assert probe_points(config.with_overrides({"probe.point": [1.0, 2.0]}), sphere).tolist() == [[1.0, 2.0]]
    with pytest.raises(DomainError):
        probe_points(config.with_overrides({"probe.point": [0.01, 2.0]}), sphere)
