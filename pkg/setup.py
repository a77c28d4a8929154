"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE
"""
import os
import sys

from setuptools import setup, find_packages


needs_pytest = {"pytest", "test", "ptr", "coverage"}.intersection(sys.argv)
pytest_runner = ["pytest-runner"] if needs_pytest else []

versionInfo = {}
with open(os.path.join(os.path.dirname(os.path.abspath(__file__)), "torsionfield", "_version.py")) as versionFile:
    exec(versionFile.read(), versionInfo)

setup(
    author = "torsionfield authors",
    author_email = "",
    description = "Stochastic Riemannian geometry with randomized vector fields",
    entry_points = {
        "console_scripts" : [
            "torsionfield = torsionfield.cli:main"
        ]
    },
    install_requires = [
        "click",
        "jsonschema",
        "numpy",
        "scipy"
    ],
    keywords = "python riemannian geometry stochastic connection curvature",
    license = "MIT",
    name = "torsionfield",
    packages = find_packages(exclude=["tests"]),
    url = "",
    setup_requires=[] + pytest_runner,
    tests_require=["pytest", "pytest-cov", "hypothesis"],
    version = versionInfo["__version__"],
)
