import json
import pathlib

import pytest

from tailbound.jsonio import load_family, load_json, load_model

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def rademacher():
    return load_json(FIXTURES / "rademacher.json")


@pytest.fixture(scope="session")
def family12():
    # session scope: construction computes all pairwise norms once
    return load_family(load_json(FIXTURES / "family12.json"))


@pytest.fixture(scope="session")
def poly2_model():
    return load_model(load_json(FIXTURES / "gaussian-poly2.json"))
