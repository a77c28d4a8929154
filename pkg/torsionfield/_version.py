"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Package version, read by setup.py and the command line interface
"""
__version__ = "0.1.0"

def get_versions():
    return {"version": __version__, "full-revisionid": None, "dirty": False, "error": None}
