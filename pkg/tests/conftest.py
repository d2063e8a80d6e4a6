import os

import pytest

from barrier_lab.coefficients import CutoffProfile, ModelParams

# PASS/FAIL lines from test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def fig1():
    """Magenta setup: profile scale 0.2 carried by the profile itself."""
    return ModelParams(eps=0.1, kappa_eps=0.004, kappa_T=0.1), CutoffProfile.arctan_example(eps=0.2)


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request, monkeypatch):
    monkeypatch.setenv("BARRIER_LAB_BACKEND", request.param)
    return request.param


@pytest.fixture
def numpy_backend(monkeypatch):
    monkeypatch.setenv("BARRIER_LAB_BACKEND", "numpy")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_configure(config):
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
