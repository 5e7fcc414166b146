import json

import pytest

from teichkit import config


def test_override_restores():
    with config.override(solver_tol=1e-6):
        assert config.get("solver_tol") == 1e-6
    assert config.get("solver_tol") == config.DEFAULTS["solver_tol"]


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(KeyError):
        config.update({"no_such_key": 1})
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"bel0_threshold": 0.01}))
    config.load(p)
    assert config.get("bel0_threshold") == 0.01
    config.reset()
    assert config.current() == config.DEFAULTS
