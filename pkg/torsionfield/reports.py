"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Identity reports and deterministic JSON/CSV writers
"""
import csv
import hashlib
import json
import logging
import os

import numpy as np


log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

def to_jsonable(value):
    """
    Convert numpy containers and scalars into plain JSON types
    """
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return repr(value)
        return value
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return value

def residual_norm(lhs, rhs):
    """
    Max absolute difference, ``0`` for empty inputs
    """
    difference = np.abs(np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float))
    return float(np.max(difference)) if difference.size else 0.0

class IdentityReport(object):
    """
    Outcome of one numerical identity check

    :param identityId: stable identifier such as ``torsion.formula``
    :type identityId: str
    :param lhs: left hand side value
    :param rhs: right hand side value
    :param tolerance: pass threshold on the residual
    :type tolerance: float
    :param residualNorm: residual, defaults to the max absolute difference
    :type residualNorm: float
    :param asserting: whether the report can fail the suite
    :type asserting: bool
    """
    def __init__(self, identityId, lhs, rhs, tolerance, residualNorm=None, point=None, seed=None,
                 asserting=True, extra=None):
        self.identityId = identityId
        self.lhs = lhs
        self.rhs = rhs
        self.tolerance = float(tolerance)
        self.residualNorm = residual_norm(lhs, rhs) if residualNorm is None else float(residualNorm)
        self.point = point
        self.seed = seed
        self.asserting = asserting
        self.extra = dict(extra or {})

    def __repr__(self):
        return "IdentityReport(id={0}, residual={1}, tolerance={2}, passed={3})".format(
            self.identityId, self.residualNorm, self.tolerance, self.passed)

    @property
    def passed(self):
        return bool(np.isfinite(self.residualNorm) and self.residualNorm <= self.tolerance)

    def to_dict(self):
        return to_jsonable({
            "identity_id": self.identityId,
            "point": self.point,
            "seed": self.seed,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual_norm": self.residualNorm,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "asserting": self.asserting,
            "extra": self.extra,
        })

def config_hash(resolvedConfig):
    """
    sha256 of the canonical JSON form of a resolved configuration
    """
    canonical = json.dumps(to_jsonable(resolvedConfig), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

def _prepare(path):
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)

def write_json(path, payload, configHash, seed):
    """
    Write a result document with sorted keys

    :param path: output file
    :type path: str
    :param payload: result content
    :type payload: dict
    :param configHash: hash of the resolved configuration
    :type configHash: str
    :param seed: master seed of the run
    :type seed: int
    :returns: path written
    :rtype: str
    """
    document = dict(payload)
    document.update({"schema": SCHEMA_VERSION, "config_hash": configHash, "seed": seed})
    _prepare(path)
    with open(path, "w") as outputFile:
        outputFile.write(json.dumps(to_jsonable(document), sort_keys=True, indent=2))
        outputFile.write("\n")
    log.info("Wrote '%s'", path)
    return path

def write_csv(path, header, rows, configHash, seed):
    """
    Write a table whose leading comment lines carry the configuration hash
    and the seed
    """
    _prepare(path)
    with open(path, "w", newline="") as outputFile:
        outputFile.write("# schema={0}\n# config_hash={1}\n# seed={2}\n".format(SCHEMA_VERSION, configHash, seed))
        writer = csv.writer(outputFile, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(value)) if isinstance(value, (float, np.floating)) else value
                             for value in row])
    log.info("Wrote '%s'", path)
    return path

def read_csv(path):
    """
    Read a table written by :func:`write_csv`

    :returns: metadata from the comment lines, header and rows
    :rtype: tuple
    """
    metadata = {}
    with open(path, newline="") as inputFile:
        lines = inputFile.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata[key] = value
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return metadata, rows[0], rows[1:]
