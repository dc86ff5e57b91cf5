import pytest

from src.config import TABLE1_PATH
from src.empirics import parse_table
from src.hna_core import SettingPair, build_distribution


@pytest.fixture(scope="session")
def table1_text() -> str:
    return TABLE1_PATH.read_text()


@pytest.fixture(scope="session")
def table1(table1_text):
    return parse_table(table1_text)


@pytest.fixture
def hardy_counts():
    """Counts with all three zero conditions met and q = 1/10."""
    return {
        SettingPair(1, 1): [0, 3, 4, 3],
        SettingPair(1, 2): [5, 0, 0, 5],
        SettingPair(2, 1): [2, 0, 4, 4],
        SettingPair(2, 2): [1, 4, 2, 3],
    }


@pytest.fixture
def hardy_distribution(hardy_counts):
    return build_distribution(hardy_counts)
