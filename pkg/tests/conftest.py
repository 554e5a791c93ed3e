import pytest

from spectrum_ledger.ledger import Ledger

from constants import make_genesis


@pytest.fixture
def genesis():
    return make_genesis()


@pytest.fixture
def ledger(genesis):
    return Ledger(genesis)
