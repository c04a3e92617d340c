from pathlib import Path

import numpy as np
import pytest

from liquid_delegation.formats import parse_points
from liquid_delegation.game.distance import DbInstance
from liquid_delegation.game.gadgets import CnfInstance, parse_cnf
from liquid_delegation.game.profile import PreferenceProfile

DATA_DIR = Path(__file__).parent.parent / "data"

RUNNING_CNF = "p cnf 5 3\n1 2 -3 0\n-2 -4 1 0\n-1 3 5 0\n"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def three_cycle() -> PreferenceProfile:
    """Every voter prefers the next one around a 3-cycle: no equilibrium."""
    return PreferenceProfile([[2, 1, 3, 0], [3, 2, 1, 0], [1, 3, 2, 0]])


@pytest.fixture
def four_on_a_line() -> PreferenceProfile:
    """Single-peaked with intervals [1,2], [2,4], [1,3], [3,4]; unique kernel {1, 4}."""
    return PreferenceProfile([[2, 1, 3, 4, 0], [3, 4, 2, 1, 0], [2, 1, 3, 4, 0], [3, 4, 2, 1, 0]])


@pytest.fixture
def ird_cycle_profile() -> PreferenceProfile:
    return PreferenceProfile([[2, 4, 1, 0, 3], [1, 3, 2, 0, 4], [2, 4, 3, 0, 1], [1, 3, 4, 0, 2]])


@pytest.fixture
def brd_worst_case() -> PreferenceProfile:
    """Three symmetric voters where best-response needs all three rounds."""
    return PreferenceProfile([[2, 1, 0, 3], [1, 3, 2, 0], [2, 3, 0, 1]])


@pytest.fixture
def five_points() -> DbInstance:
    return parse_points((DATA_DIR / "five_points.points").read_text())


@pytest.fixture
def running_cnf() -> CnfInstance:
    return parse_cnf(RUNNING_CNF)


@pytest.fixture
def unsatisfiable_cnf() -> CnfInstance:
    return CnfInstance(n_u=1, clauses=((1, 1, 1), (-1, -1, -1)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
