import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fwqed.lattice import (
    Boundary,
    LatticeParams,
    Sublattice,
    bloch_matrix,
    hoppings_at,
    pbc_momenta,
    real_space_hamiltonian,
    site_index,
    split_sublattices,
    static_dispersion,
)

hopping = st.floats(min_value=0.1, max_value=3.0)


@given(hopping, hopping, st.floats(0, 0.5), st.floats(0, 2 * np.pi))
def test_ring_spectrum_matches_bloch_bands(J, Jp, V, t):
    p = LatticeParams(J=J, Jp=Jp, V=V, Omega=5.0, N=12)
    ring = np.linalg.eigvalsh(real_space_hamiltonian(p, t))
    bands = np.linalg.eigvalsh(bloch_matrix(p, pbc_momenta(p.N), t)).ravel()
    np.testing.assert_allclose(np.sort(ring), np.sort(bands), atol=1e-10)


def test_static_dispersion_closed_form():
    p = LatticeParams(J=1.0, Jp=0.6)
    k = np.linspace(-np.pi, np.pi, 9)
    np.testing.assert_allclose(static_dispersion(p, k), np.sqrt(1 + 0.36 + 1.2 * np.cos(k)))


def test_hoppings_oscillate_out_of_phase():
    p = LatticeParams(J=1.0, Jp=2.0, V=0.3)
    j1, j2 = hoppings_at(p, 0.0)
    assert (j1, j2) == pytest.approx((1.6, 1.4))
    assert sum(hoppings_at(p, 0.37)) == pytest.approx(3.0)


def test_obc_has_no_wraparound():
    p = LatticeParams(N=5, boundary=Boundary.OBC)
    H = real_space_hamiltonian(p, 0.0)
    assert H[0, -1] == 0
    assert np.allclose(H, H.conj().T)


def test_site_layout():
    assert site_index(1, Sublattice.A) == 0
    assert site_index(3, Sublattice.B) == 5
    ca, cb = split_sublattices(np.arange(6.0))
    np.testing.assert_array_equal(ca, [0, 2, 4])
    np.testing.assert_array_equal(cb, [1, 3, 5])


@pytest.mark.parametrize(
    "kwargs, field",
    [({"J": 0}, "J"), ({"N": 1}, "N"), ({"Omega": -1}, "Omega"), ({"V": -0.1}, "V")],
)
def test_validation_names_field(kwargs, field):
    with pytest.raises(ValueError, match=f"^{field}"):
        LatticeParams(**kwargs)
