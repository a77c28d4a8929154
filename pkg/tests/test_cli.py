import os

from click.testing import CliRunner

from torsionfield import __version__
from torsionfield.cli import main

SMALL = ["--N", "8", "--integrator.h", "0.01", "--n_theta", "16", "--n_phi", "32"]

def invoke(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)

def test_version():

    result = invoke("--version")
    assert result.exit_code == 0
    assert __version__ in result.output

def test_help():

    result = invoke("--help")
    assert result.exit_code == 0
    for subcommand in ("sample-field", "geodesic", "transport", "curvature", "gauss-bonnet", "laplacian",
                       "divergence-theorem", "verify"):
        assert subcommand in result.output

def test_bad_override(tmp_path):

    result = invoke("sample-field", "--c", "-1", "--output", str(tmp_path))
    assert result.exit_code == 2
    assert "field_spec.c" in result.output
    assert invoke("sample-field", "--nosuch.key", "1").exit_code == 2
    assert invoke("geodesic", "sideways").exit_code == 2

def test_missing_config_file(tmp_path):

    result = invoke("curvature", "--config", str(tmp_path / "missing.json"))
    assert result.exit_code == 2

def test_sample_field(tmp_path):

    result = invoke("sample-field", "--output", str(tmp_path), *SMALL)
    assert result.exit_code == 0
    assert sorted(os.listdir(str(tmp_path))) == ["sample-field.csv", "sample-field.json"]
    assert os.path.join(str(tmp_path), "sample-field.json") in result.output

def test_transport_prints_holonomy(tmp_path):

    result = invoke("transport", "realized", "--output", str(tmp_path), *SMALL)
    assert result.exit_code == 0
    assert "holonomy angle" in result.output

def test_config_file(tmp_path):

    configPath = tmp_path / "config.json"
    configPath.write_text('{"manifold": {"name": "flat-torus"}}')
    result = invoke("geodesic", "standard", "--config", str(configPath), "--output", str(tmp_path), *SMALL)
    assert result.exit_code == 0
    assert os.path.exists(os.path.join(str(tmp_path), "geodesic-standard.json"))

def test_verify(tmp_path):

    result = invoke("verify", "--c", "0", "--output", str(tmp_path), "--N", "8", "--verify.n_points", "3",
                    "--verify.n_mc", "50", "--n_paths", "50", "--verify.manifolds", '["flat-torus"]',
                    "--monte_carlo.n_realizations", "5")
    assert os.path.exists(os.path.join(str(tmp_path), "verify.json"))
    assert os.path.exists(os.path.join(str(tmp_path), "verify.txt"))
    assert "asserting checks passed" in result.output
    assert result.exit_code in (0, 1)
