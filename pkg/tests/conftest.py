import pathlib

import pytest

from glsnorm import GeometricSequence, LurothSequence

FIXTURE_DIR = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def luroth():
    return LurothSequence()


@pytest.fixture(scope="session")
def dyadic():
    return GeometricSequence("1/2")


@pytest.fixture(scope="session")
def third():
    return GeometricSequence("1/3")


@pytest.fixture(scope="session")
def presets(luroth, dyadic, third):
    return {"luroth": luroth, "dyadic": dyadic, "third": third}


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR
