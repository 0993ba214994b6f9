import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toyworld import make_toy_world  # noqa: E402


@pytest.fixture(scope="session")
def toy_world():
    return make_toy_world()


@pytest.fixture(scope="session")
def small_world():
    return make_toy_world(num_regular=40, num_fixtures=10, seed=11)
