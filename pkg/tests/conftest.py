import os
import tempfile

# isolated results database, set before config is imported anywhere
_DB_DIR = tempfile.mkdtemp(prefix="lmfem-tests-")
os.environ["LMFEM_DATABASE_URL"] = f"sqlite:///{os.path.join(_DB_DIR, 'results.db')}"
os.environ.setdefault("LMFEM_LOG_LEVEL", "WARNING")

import numpy as np
import pytest

from fem import AffineLevelSet, ConstantLevelSet, PatchGrid, build_mesh


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow convergence studies")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def unit_patch():
    """Corners of the Cartesian unit patch"""
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def small_grid():
    return PatchGrid((0.0, 0.0), 0.25, 4)


@pytest.fixture
def uncut_mesh(small_grid):
    return build_mesh(small_grid, ConstantLevelSet(-1.0))


@pytest.fixture
def line_mesh(small_grid):
    """Tilted straight interface crossing several patches"""
    return build_mesh(small_grid, AffineLevelSet(0.3, 1.0, -0.61))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
