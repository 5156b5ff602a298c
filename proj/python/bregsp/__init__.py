"""Bregman extragradient and extrapolation solvers for convex-concave saddle point problems."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_config as _run_config

__version__ = "0.1.0"


def run_experiment(config, out_dir=None):
    """Run one experiment from a config dict. Returns (exit_code, error, summary dict)."""
    code, error, summary = _run_config(_json.dumps(config), None if out_dir is None else str(out_dir))
    return code, error, _json.loads(summary)
