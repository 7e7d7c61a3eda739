import pytest

from fwqed import LatticeParams


@pytest.fixture
def fig2():
    return LatticeParams(J=1.0, Jp=2.0, V=0.2, Omega=5.0, N=20)


@pytest.fixture
def fig5():
    return LatticeParams(J=1.0, Jp=0.6, V=0.2, Omega=2.5, N=200)


@pytest.fixture
def fig7():
    return LatticeParams(J=1.0, Jp=0.6, V=0.1, Omega=2.5, N=200)
