import numpy as np
import pytest

from rcar.model import ModelParams, NoiseSpec, fig1_params

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fig1():
    return fig1_params()


@pytest.fixture
def fig1_alpha0():
    return fig1_params(alpha1=0.0)


@pytest.fixture
def general_p2():
    # both coefficient noises active, non-Gaussian second lag
    return ModelParams(
        theta=(0.25, -0.15),
        alpha=(0.4, -0.6),
        eta=(NoiseSpec.from_variance("gaussian", 0.15), NoiseSpec("uniform", 0.5)),
        eps=NoiseSpec("gaussian", 1.3),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
