"""Log-concavity along heat and Ornstein-Uhlenbeck flows."""

import json as _json

from . import _logheat
from ._logheat import *  # noqa: F401,F403


def _text(measure):
    return measure if isinstance(measure, str) else _json.dumps(measure)


def log_hessian_heat(measure, z, t):
    """-Hess log(mu * gamma_t)(z); measure is a dict or JSON text."""
    return _logheat.log_hessian_heat(_text(measure), z, t)


def build_flow_map(measure, n_points=201, steps_per_unit=100.0):
    return _logheat.build_flow_map(_text(measure), n_points, steps_per_unit)


def sample_1d(measure, n, seed=0):
    return _logheat.sample_1d(_text(measure), n, seed)
