import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from fwqed.bessel import MAX_ARGUMENT, j0, j1


@given(st.floats(min_value=-MAX_ARGUMENT, max_value=MAX_ARGUMENT))
def test_matches_reference(x):
    assert j0(x) == pytest.approx(special.j0(x), abs=1e-15)
    assert j1(x) == pytest.approx(special.j1(x), abs=1e-15)


def test_relative_accuracy_on_working_range():
    x = np.linspace(0, 10, 100001)
    for ours, ref in ((j0, special.j0), (j1, special.j1)):
        exact = ref(x)
        # within ~1e-3 of a zero only the absolute error is meaningful
        away = np.abs(exact) > 1e-3
        rel = np.abs(ours(x)[away] - exact[away]) / np.abs(exact[away])
        assert rel.max() < 1e-12


def test_array_and_scalar_types():
    x = np.linspace(0, 3, 7)
    assert j0(x).shape == x.shape
    assert isinstance(j1(0.5), float)


def test_parity():
    x = np.linspace(0.1, 5, 11)
    np.testing.assert_allclose(j0(-x), j0(x), atol=1e-15)
    np.testing.assert_allclose(j1(-x), -j1(x), atol=1e-15)


def test_rejects_large_argument():
    with pytest.raises(ValueError):
        j0(MAX_ARGUMENT + 1)
