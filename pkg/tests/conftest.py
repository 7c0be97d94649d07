import os

# Keep evaluator pools single-process inside the test run: forked pools only
# slow down the small cases the suite exercises.
os.environ.setdefault("COA_THREADS", "1")

import pytest

from coabox.model import Scenario, bundled_scenario_path, load_scenario


@pytest.fixture(scope="session")
def scn14() -> Scenario:
    return load_scenario(bundled_scenario_path("scenario14"))


@pytest.fixture(scope="session")
def mini() -> Scenario:
    return load_scenario(bundled_scenario_path("mini3"))
