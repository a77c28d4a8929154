import json

import numpy as np

from torsionfield.reports import (SCHEMA_VERSION,
                                  IdentityReport,
                                  config_hash,
                                  read_csv,
                                  residual_norm,
                                  to_jsonable,
                                  write_csv,
                                  write_json)

class Exported(object):

    def to_dict(self):
        return {"values": np.arange(2)}

def test_to_jsonable():

    converted = to_jsonable({1: np.array([1.5, 2.0]), "flag": np.bool_(True), "count": np.int64(3),
                             "missing": float("nan"), "nested": (Exported(),)})
    assert converted == {"1": [1.5, 2.0], "flag": True, "count": 3, "missing": "nan",
                         "nested": [{"values": [0, 1]}]}
    json.dumps(converted)

def test_residual_norm():

    assert residual_norm([1.0, 2.0], [1.5, 2.0]) == 0.5
    assert residual_norm([], []) == 0.0

def test_identity_report():

    report = IdentityReport("torsion.stochastic", np.zeros(3), np.full(3, 1e-9), 1e-6, point=[1.0, 2.0], seed=4)
    assert report.passed
    assert abs(report.residualNorm - 1e-9) < 1e-20
    data = report.to_dict()
    assert data["identity_id"] == "torsion.stochastic"
    assert data["pass"] is True
    assert data["point"] == [1.0, 2.0]
    assert data["seed"] == 4

    assert not IdentityReport("x", 0.0, 1.0, 0.5).passed
    assert not IdentityReport("x", 0.0, 0.0, 1.0, residualNorm=float("nan")).passed
    assert not IdentityReport("x", 0.0, 0.0, 1.0, asserting=False).to_dict()["asserting"]

def test_config_hash():

    first = config_hash({"a": 1, "b": {"c": np.float64(0.1)}})
    assert first == config_hash({"b": {"c": 0.1}, "a": 1})
    assert first != config_hash({"a": 2, "b": {"c": 0.1}})
    assert len(first) == 64

def test_write_json(tmp_path):

    path = write_json(str(tmp_path / "nested" / "out.json"), {"b": np.ones(2), "a": 1}, "abc", 7)
    with open(path) as inputFile:
        text = inputFile.read()
    document = json.loads(text)
    assert document == {"a": 1, "b": [1.0, 1.0], "schema": SCHEMA_VERSION, "config_hash": "abc", "seed": 7}
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")

def test_write_csv(tmp_path):

    path = write_csv(str(tmp_path / "table.csv"), ["t", "value"], [(0, 0.1), (1, np.float64(1 / 3))], "abc", 7)
    metadata, header, rows = read_csv(path)
    assert metadata == {"schema": str(SCHEMA_VERSION), "config_hash": "abc", "seed": "7"}
    assert header == ["t", "value"]
    assert rows == [["0", "0.1"], ["1", repr(1 / 3)]]
    assert float(rows[1][1]) == 1 / 3
