import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flare_lqt import config as cfg  # noqa: E402
from flare_lqt.pipeline import admissible_region, run  # noqa: E402

ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def case1_config():
    return cfg.default_config()


@pytest.fixture(scope="session")
def case1_run(case1_config):
    return run(case1_config)


REGION_DH = np.linspace(-40.0, 40.0, 21)
REGION_DTHETA = np.linspace(-2.0, 2.0, 21)


@pytest.fixture(scope="session")
def case1_region(case1_config):
    return admissible_region(case1_config, REGION_DH, REGION_DTHETA)


@pytest.fixture(scope="session")
def case1_region_tight(case1_config):
    lim = case1_config.limits
    tight = replace(case1_config, limits=replace(
        lim, elevator_min_deg=0.5 * lim.elevator_min_deg, elevator_max_deg=0.5 * lim.elevator_max_deg))
    return admissible_region(tight, REGION_DH, REGION_DTHETA)
