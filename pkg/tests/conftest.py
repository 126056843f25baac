import warnings

import numpy as np
import pytest

from frogwild.suite import SUITE, suite_graph

ACCEPTANCE = []


@pytest.fixture(scope="session", autouse=True)
def _suite_cache(tmp_path_factory):
    # keep generated suite graphs out of the user's home directory
    mp = pytest.MonkeyPatch()
    mp.setenv("FROGWILD_SUITE_DIR", str(tmp_path_factory.mktemp("suite")))
    yield
    mp.undo()


@pytest.fixture(autouse=True)
def _quiet_partition_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*machines for .* edges", category=UserWarning)
        yield


@pytest.fixture(scope="session")
def suite_graphs(_suite_cache):
    return {name: suite_graph(name) for name in SUITE}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
