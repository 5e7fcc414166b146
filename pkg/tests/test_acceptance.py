"""The ten acceptance criteria at their stated tolerances.

Each test prints one pass/fail line; the lines are also collected for the
terminal summary (see conftest).  The whole module takes several minutes on
one core, criterion 3 being the slowest.
"""

import json

import pytest

import conftest
from teichkit import acceptance


@pytest.mark.parametrize("k", sorted(acceptance.CRITERIA))
def test_criterion(k):
    res = acceptance.run([k])[0]
    line = f"{acceptance.summary_line(res)}  ({res['seconds']} s)"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    print(json.dumps(res["details"], default=str)[:2000])
    assert res["passed"], json.dumps(res["details"], default=str)
