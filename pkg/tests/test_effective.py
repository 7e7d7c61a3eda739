import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from fwqed.effective import (
    CHIRAL_OPERATOR,
    VERBATIM,
    TableConvention,
    coupling_table,
    drive_coupling,
    effective_bloch,
    f_table,
    rwa_hamiltonian,
    rwa_quasienergies,
    winding_0,
    winding_0_integral,
    winding_pi,
    winding_pi_integral,
)
from fwqed.errors import GapClosedError
from fwqed.floquet import fold_quasienergy, quasienergies_bloch
from fwqed.lattice import LatticeParams, static_dispersion


def _harmonics(p, k, nt=400, nmax=4):
    """Frequencies eps + n Omega and sublattice weights |c_n|^2 of the exact Floquet states."""
    h = p.J + p.Jp * np.exp(-1j * k)
    d = p.V * (1 - np.exp(-1j * k))
    T = p.period
    dt = T / nt
    U = np.eye(2, dtype=complex)
    Us = []
    for m in range(nt):
        Us.append(U)
        off = h + 2 * d * np.cos(p.Omega * (m + 0.5) * dt)
        U = expm(-1j * dt * np.array([[0, off], [np.conj(off), 0]])) @ U
    w, v = np.linalg.eig(U)
    eps = -np.angle(w) / T
    ts = np.arange(nt) * dt
    freqs, weights = [], []
    for a in range(2):
        Phi = np.array([np.exp(1j * eps[a] * t) * (Ut @ v[:, a]) for Ut, t in zip(Us, ts)])
        for n in range(-nmax, nmax + 1):
            c = (Phi * np.exp(1j * n * p.Omega * ts)[:, None]).mean(axis=0)
            freqs.append(eps[a] + n * p.Omega)
            weights.append(np.abs(c) ** 2)
    return np.array(freqs), np.array(weights)


def test_rwa_matches_exact_quasienergies(fig2):
    k = np.linspace(-np.pi, np.pi, 201)
    plus, minus = quasienergies_bloch(fig2, k)
    rp, rm = rwa_quasienergies(fig2, k)
    rwa = np.sort([fold_quasienergy(rp, fig2.Omega), fold_quasienergy(rm, fig2.Omega)], axis=0)
    assert np.abs(rwa[0] - minus).max() < 0.02
    assert np.abs(rwa[1] - plus).max() < 0.02


def test_static_limit():
    p = LatticeParams(Jp=0.6, V=0.0, Omega=2.5)
    k = np.linspace(-3, 3, 13)
    eb = effective_bloch(p, k)
    np.testing.assert_allclose(eb.omega_d, static_dispersion(p, k), atol=1e-14)
    np.testing.assert_allclose(eb.gamma_k, 0, atol=1e-15)
    np.testing.assert_allclose(eb.lambda_k, np.abs(static_dispersion(p, k) - 1.25), atol=1e-14)


def test_small_drive_coupling_is_linear_in_V():
    k = np.array([0.4, 1.3])
    a = drive_coupling(LatticeParams(Jp=0.6, V=1e-4, Omega=2.5), k)
    b = drive_coupling(LatticeParams(Jp=0.6, V=2e-4, Omega=2.5), k)
    np.testing.assert_allclose(b / a, 2, rtol=1e-6)
    np.testing.assert_allclose(a, 2 * 1.6 * 1e-4 * np.sin(k) / 2.5, rtol=1e-6)


@given(st.floats(0.1, 3), st.floats(0, 0.5), st.floats(-np.pi, np.pi))
def test_chiral_anticommutation(Jp, V, k):
    H = rwa_hamiltonian(LatticeParams(Jp=Jp, V=V, Omega=5.0), k)
    assert np.abs(CHIRAL_OPERATOR @ H + H @ CHIRAL_OPERATOR).max() < 1e-12


@pytest.mark.parametrize(
    "Jp, nu0, nupi",
    [(0.5, 0, 0), (1.2, 1, 0), (2.0, 1, 1), (3.0, 1, 1), (4.0, 1, 0)],
)
def test_windings(Jp, nu0, nupi):
    p = LatticeParams(Jp=Jp, V=0.2, Omega=5.0)
    assert winding_0(p) == nu0
    assert winding_pi(p) == nupi


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 4.0).filter(lambda x: abs(x - 1) > 0.02 and abs(x - 1.5) > 0.02 and abs(x - 3.5) > 0.02))
def test_winding_integrality(Jp):
    p = LatticeParams(Jp=Jp, V=0.2, Omega=5.0)
    for total in (winding_0_integral(p), winding_pi_integral(p)):
        assert abs(total - round(total)) < 0.05


@pytest.mark.parametrize("Jp, fn", [(1.0, winding_0), (1.5, winding_pi), (3.5, winding_pi)])
def test_gap_closing_raises(Jp, fn):
    with pytest.raises(GapClosedError, match="invariant undefined"):
        fn(LatticeParams(Jp=Jp, V=0.2, Omega=5.0))


def test_table_weights_match_floquet_harmonics(fig7):
    for k in (0.7, 1.4, 2.0, -1.1, 2.8):
        freqs, weights = _harmonics(fig7, k)
        FA, FB, L = coupling_table(fig7, k)
        for r in range(8):
            i = np.argmin(np.abs(freqs - L[r]))
            assert abs(freqs[i] - L[r]) < 0.01
            assert abs(np.abs(FA[r]) ** 2 / 2 - weights[i, 0]) < 0.01
            assert abs(np.abs(FB[r]) ** 2 / 2 - weights[i, 1]) < 0.01


def test_table_completeness(fig7):
    # the eight rows carry the full weight of each sublattice up to O(z^2)
    k = np.linspace(-3, 3, 25)
    FA, FB, _ = coupling_table(fig7, k)
    np.testing.assert_allclose((np.abs(FA) ** 2).sum(axis=0) / 2, 1, atol=1e-3)
    np.testing.assert_allclose((np.abs(FB) ** 2).sum(axis=0) / 2, 1, atol=1e-3)


def test_conventions(fig7):
    base = coupling_table(fig7, 0.9)
    verb = coupling_table(fig7, 0.9, VERBATIM)
    lam = effective_bloch(fig7, 0.9).lambda_k
    assert base[2][6] == pytest.approx(lam - 1.5 * fig7.Omega)
    assert verb[2][6] == pytest.approx(-lam - 1.5 * fig7.Omega)
    dressed = coupling_table(fig7, 0.9, TableConvention(phase="dressed"))
    # the two phase conventions differ only at second order in the drive
    np.testing.assert_allclose(np.abs(dressed[0]), np.abs(base[0]), atol=1e-4)
    with pytest.raises(ValueError):
        TableConvention(lambda7="other")


def test_f_table_rows(fig7):
    rows = f_table(fig7, 0.5)
    assert [r.r for r in rows] == list(range(1, 9))
    assert [r.op_kind for r in rows] == ["p", "q"] * 4
