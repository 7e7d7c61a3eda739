import numpy as np
import pytest

from fwqed.dynamics import EmitterConfig
from fwqed.errors import GapClosedError
from fwqed.lattice import LatticeParams, Sublattice
from fwqed.spectral import (
    effective_self_energy,
    floquet_bound_state,
    rwa_gap_edges,
    static_bands,
    static_bound_state,
    static_self_energy,
    time_averaged_bound_state,
)
from scipy.integrate import quad


def _ring_with_emitter(p, Delta, g, cell, sub="A"):
    # independent construction: emitter first, then (a_1, b_1, ..., a_N, b_N)
    n = 2 * p.N + 1
    H = np.zeros((n, n))
    for j in range(p.N):
        a, b = 1 + 2 * j, 2 + 2 * j
        H[a, b] = H[b, a] = p.J
        nxt = 1 + 2 * ((j + 1) % p.N)
        H[b, nxt] = H[nxt, b] = p.Jp
    H[0, 0] = Delta
    site = 1 + 2 * cell + (sub == "B")
    H[0, site] = H[site, 0] = g
    return H


def test_static_self_energy_quadrature():
    p = LatticeParams(Jp=0.6)
    z = 2.3

    def integrand(k):
        w2 = 1 + 0.36 + 1.2 * np.cos(k)
        return z / (z * z - w2) / (2 * np.pi)

    ref = 0.01 * quad(integrand, -np.pi, np.pi)[0]
    assert static_self_energy(p, z, 0.1).lamb_shift == pytest.approx(ref, rel=1e-7)


def test_effective_reduces_to_static():
    p = LatticeParams(Jp=0.6, V=0.0, Omega=2.5)
    deltas = np.linspace(-5, 5, 21)
    st = static_self_energy(p, deltas, 0.1).sigma
    ef = effective_self_energy(p, deltas, 0.1).sigma
    assert np.max(np.abs(ef - st) / np.maximum(np.abs(st), 1e-12)) < 1e-6


def test_decay_vanishes_in_gaps_only(fig5):
    edges = rwa_gap_edges(fig5)
    zero = np.linspace(*edges["zero"], 7)[1:-1]
    pi = np.linspace(*edges["pi"], 7)[1:-1]
    for window in (zero, pi):
        assert np.all(np.abs(effective_self_energy(fig5, window, 0.1).decay) < 1e-8)
    band = np.array([0.6, 0.8])
    assert np.all(effective_self_energy(fig5, band, 0.1).decay > 0)


def test_sublattice_symmetry_of_sigma(fig5):
    deltas = np.linspace(-3, 3, 13)
    a = effective_self_energy(fig5, deltas, 0.1, Sublattice.A).sigma
    b = effective_self_energy(fig5, deltas, 0.1, Sublattice.B).sigma
    np.testing.assert_allclose(np.abs(a), np.abs(b), atol=1e-8)


def test_complex_probe_is_direct(fig5):
    z = 0.3 + 0.05j
    res = effective_self_energy(fig5, z, 0.1)
    assert res.z == z and np.isfinite(res.sigma)
    with pytest.raises(ValueError):
        effective_self_energy(fig5, 0.3 - 0.05j, 0.1)


def test_static_bands():
    np.testing.assert_allclose(static_bands(LatticeParams(Jp=0.6)), [(-1.6, -0.4), (0.4, 1.6)])


@pytest.mark.parametrize("Delta, sub", [(0.0, "A"), (0.15, "A"), (-0.2, "B"), (2.0, "A")])
def test_static_bound_state_matches_diagonalization(Delta, sub):
    p = LatticeParams(Jp=0.6, V=0.0, N=200)
    g, cell = 0.1, 100
    bs = static_bound_state(p, Delta, g, half_width=60, sublattice=sub)
    H = _ring_with_emitter(p, Delta, g, cell, sub)
    w, v = np.linalg.eigh(H)
    i = np.argmin(np.abs(w - bs.energy))
    assert w[i] == pytest.approx(bs.energy, abs=1e-9)
    ref = v[:, i]
    vec = np.zeros_like(ref, dtype=complex)
    vec[0] = bs.C_e[0]
    for j, c in enumerate(bs.cells):
        vec[1 + 2 * (cell + c)] = bs.C_a[0, j]
        vec[2 + 2 * (cell + c)] = bs.C_b[0, j]
    overlap = abs(np.vdot(ref, vec)) / np.linalg.norm(vec)
    assert overlap > 0.999


def test_static_bound_state_at_gap_center_is_chiral():
    bs = static_bound_state(LatticeParams(Jp=0.6, V=0.0), 0.0, 0.1)
    assert bs.energy == pytest.approx(0, abs=1e-12)
    assert np.abs(bs.C_a).max() < 1e-10
    # photon weight on B cells left of the emitter falls by J'/J per cell
    right = np.abs(bs.C_b[0, bs.cells >= 0])
    np.testing.assert_allclose(right[2:6] / right[1:5], 0.6, rtol=1e-6)


def test_static_bound_state_closed_gap():
    with pytest.raises(GapClosedError):
        static_bound_state(LatticeParams(Jp=1.0, V=0.0), 0.0, 0.1)


@pytest.fixture(scope="module")
def pi_bound_state():
    p = LatticeParams(Jp=0.6, V=0.2, Omega=2.5, N=60)
    return p, floquet_bound_state(p, EmitterConfig(Delta=1.25, cell=30, g=0.1))


def test_floquet_bound_state_is_localized(pi_bound_state):
    p, bs = pi_bound_state
    assert bs.driven and len(bs.times) == 16
    assert abs(bs.C_e[0]) ** 2 > 0.5
    a, b = time_averaged_bound_state(bs)
    far = np.r_[a[:5], a[-5:], b[:5], b[-5:]]
    assert far.max() < 1e-3 * max(a.max(), b.max())
    coh = time_averaged_bound_state(bs, coherent=True)
    assert np.all(coh[0] <= a + 1e-12)


def test_time_average_needs_samples(pi_bound_state):
    p, bs = pi_bound_state
    short = type(bs)(bs.energy, bs.times[:4], bs.C_e[:4], bs.C_a[:4], bs.C_b[:4], bs.cells, bs.period)
    with pytest.raises(ValueError):
        time_averaged_bound_state(short)
