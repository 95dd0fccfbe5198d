import pytest

from tilevote.oracle import build_distance_table


@pytest.fixture(scope="session")
def table():
    return build_distance_table()
