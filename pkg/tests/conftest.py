from math import pi

import numpy as np
import pytest

from skewhol.geometry import FlatTorus, ProductManifold, RoundSphere2

ACCEPTANCE_LINES = []


@pytest.fixture
def t3():
    return ProductManifold(FlatTorus((2 * pi, 2 * pi)), FlatTorus((2 * pi,)))


@pytest.fixture
def s2xt2():
    return ProductManifold(RoundSphere2(1.0), FlatTorus((2 * pi, 2 * pi)))


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
