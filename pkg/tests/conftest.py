import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fogplace.experiment import PRESETS, generate_instance
from fogplace.model import (CLOUD, GATEWAY, ORDINARY, UNBOUNDED, ApplicationModel, Device,
                            Infrastructure, Instance, Link, Service)


def tiny_instance() -> Instance:
    """4 devices (cloud 0, gateway 1, fog 2 and 3), 3 chained services."""
    devices = [Device(0, UNBOUNDED, CLOUD), Device(1, 4, GATEWAY),
               Device(2, 5, ORDINARY), Device(3, 3, ORDINARY)]
    links = [Link(0, 2, 100.0), Link(2, 1, 80.0), Link(2, 3, 90.0), Link(1, 3, 120.0)]
    services = [Service(0, 2, 0), Service(1, 3, 0), Service(2, 1, 0)]
    cm = np.zeros((3, 3), dtype=bool)
    cm[0, 1] = cm[1, 2] = True
    rm = np.array([[True, False, False]])
    return Instance(Infrastructure(devices, links), ApplicationModel(services, cm, rm),
                    {"name": "tiny"})


@pytest.fixture
def tiny():
    return tiny_instance()


@pytest.fixture(scope="session")
def desk():
    return generate_instance(PRESETS["desk"], name="desk")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record (and print) the one-line verdict of an acceptance criterion."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
