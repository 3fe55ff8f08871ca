from __future__ import annotations

import pytest

from aitlab.config import load_slack
from aitlab.lab import build_lab


@pytest.fixture(scope="session")
def lab():
    return build_lab()


@pytest.fixture(scope="session")
def slack(lab):
    return load_slack(machine_version=lab.machine.version)
