import pytest

from helpers import degenerate_dataset, disjoint_dataset, pigeonhole_dataset


@pytest.fixture
def disjoint6():
    return disjoint_dataset(6)


@pytest.fixture
def pigeonhole():
    return pigeonhole_dataset()


@pytest.fixture
def degenerate():
    return degenerate_dataset()
