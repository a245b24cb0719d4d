import time

SESSION_START = time.perf_counter()

import numpy as np
import pytest

from antgene.instance import Instance


def pytest_collection_modifyitems(config, items):
    # acceptance criteria run last so the runtime-envelope check covers the
    # whole suite
    items.sort(key=lambda item: "test_acceptance" in item.nodeid)


@pytest.fixture(scope="session")
def session_elapsed():
    return lambda: time.perf_counter() - SESSION_START


@pytest.fixture(scope="session")
def unit_square():
    """Four cities on the unit square with exact Euclidean distances."""
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    return Instance(4, dist, coords)
