"""Acceptance criteria at the default configuration (resolution 128).

Each criterion prints one ``PASS``/``FAIL`` line; the thresholds live in
``capiso.acceptance`` and are shared with the command-line runner.
"""

import json

import pytest

from capiso.acceptance import CRITERIA
from capiso.cli import _jsonable
from capiso.config import RunConfig


@pytest.fixture(scope="module")
def cfg():
    c = RunConfig()
    c.validate()
    return c


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, cfg, capsys):
    c = CRITERIA[cid](cfg)
    with capsys.disabled():
        print(f"\n{c.line()}")
        if not c.passed:
            print(json.dumps(_jsonable(c.detail), indent=1)[:4000])
    assert c.passed, c.line()
