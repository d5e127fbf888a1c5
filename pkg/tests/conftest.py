import numpy as np
import pytest

from maxvar.core import AmbientParams
from maxvar.families import annular_bump, tent, two_bump


def rel_err(a, b, floor=1e-300):
    return abs(a - b) / max(abs(a), abs(b), floor)


@pytest.fixture(scope="session")
def params2():
    return AmbientParams(2, 0.5)


@pytest.fixture(scope="session")
def params3():
    return AmbientParams(3, 0.5)


@pytest.fixture(scope="session")
def params1():
    return AmbientParams(1, 0.5)


@pytest.fixture(scope="session")
def tent_profile():
    return tent()


@pytest.fixture(scope="session")
def standard_profiles():
    return {"tent": tent(), "annular_bump": annular_bump(), "two_bump": two_bump()}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240901)
