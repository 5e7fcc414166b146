"""Tolerances and thresholds, in one table.

Values can be overridden process-wide with :func:`override` (the CLI does this
from ``--config`` files and ``--tol``).  Thresholds are global on purpose:
every diagnostic reads the same numbers.
"""

from __future__ import annotations

import contextlib
import json
from pathlib import Path

DEFAULTS = {
    # solver
    "solver_tol": 1e-12,          # Neumann increment sup-norm stopping rule
    "solver_max_iter": 400,
    "solver_budget": 0.95,        # largest admissible sup |mu|
    "dbar_tol": 2e-2,             # finite-difference dbar residual accepted
    "newton_tol": 1e-12,          # inverse evaluation residual
    "newton_max_iter": 60,
    # norms and membership
    "shell_ratio_max": 0.9,       # Cauchy criterion on the last three shells
    "growth_slope": 0.03,         # weighted profile slope counted as growth
    "bel0_threshold": 0.05,       # outermost-circle max for Bel_0
    "b0_ratio": 0.1,              # last / first decay-profile ratio for B_0
    "pos_alpha_margin": 0.05,     # alpha_hat > alpha + margin for the ">alpha" spaces
    "decay_floor": 1e-13,         # profile values below this are numerical zero
    # foliation checks
    "base2_tol": 5e-3,
    "base1_tol": 5e-2,
    "mori_margin": 0.05,
    "mori2_eps": 0.15,
    # extensions
    "aw_threshold": 0.5,          # b_norm(phi) must be below this for the section
    "de_nodes": 512,
    "de_tol": 1e-13,
    # dynamics
    "contraction_target": 0.9,
    "lehner_threshold": 0.1,
}

_current = dict(DEFAULTS)


def get(key):
    return _current[key]


def current():
    return dict(_current)


def update(values):
    unknown = set(values) - set(DEFAULTS)
    if unknown:
        raise KeyError(f"unknown config keys: {sorted(unknown)}")
    _current.update(values)


def reset():
    _current.clear()
    _current.update(DEFAULTS)


def load(path):
    update(json.loads(Path(path).read_text()))


@contextlib.contextmanager
def override(**values):
    old = dict(_current)
    update(values)
    try:
        yield
    finally:
        _current.clear()
        _current.update(old)
