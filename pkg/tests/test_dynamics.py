import math
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from fwqed.dynamics import (
    EmitterConfig,
    SingleExcitationState,
    evolve,
    exchange_frequency,
    first_minimum_time,
    full_hamiltonian,
    revival_horizon,
    ring_size_for,
)
from fwqed.lattice import Boundary, LatticeParams


def test_static_evolution_matches_matrix_exponential():
    p = LatticeParams(Jp=0.6, V=0.0, Omega=2.5, N=10)
    em = [EmitterConfig(Delta=0.3, cell=4, g=0.2)]
    init = SingleExcitationState.excited_emitter(1, p.N)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = evolve(p, em, init, 12.0, samples=24, keep_states=True)
    H = full_hamiltonian(p, em, 0.0)
    for t, state in zip(traj.times, traj.states):
        ref = expm(-1j * H * t) @ init.vector()
        np.testing.assert_allclose(state.vector(), ref, atol=1e-10)


def test_driven_evolution_against_fine_stepping():
    p = LatticeParams(Jp=0.6, V=0.2, Omega=2.5, N=6, boundary=Boundary.OBC)
    em = [EmitterConfig(Delta=1.25, cell=3, g=0.1)]
    init = SingleExcitationState.excited_emitter(1, p.N)
    traj = evolve(p, em, init, 2 * p.period, samples=2, steps_per_period=256, keep_states=True)
    # oracle: sixteen times finer midpoint stepping
    n = 4096
    dt = 2 * p.period / n
    psi = init.vector()
    for m in range(n):
        psi = expm(-1j * dt * full_hamiltonian(p, em, (m + 0.5) * dt)) @ psi
    np.testing.assert_allclose(traj.states[-1].vector(), psi, atol=1e-4)


def test_norm_is_conserved():
    p = LatticeParams(Jp=1.0, V=0.2, Omega=2.5, N=40)
    init = SingleExcitationState.excited_emitter(1, p.N)
    traj = evolve(p, [EmitterConfig(g=0.2, cell=20)], init, 30.0, samples=60)
    assert np.abs(traj.norms - 1).max() < 1e-9


def test_uncoupled_emitter_stays_excited():
    p = LatticeParams(N=10)
    init = SingleExcitationState.excited_emitter(1, p.N)
    traj = evolve(p, [EmitterConfig(g=0.0)], init, 5.0, samples=10)
    np.testing.assert_allclose(traj.populations[:, 0], 1.0, atol=1e-14)


def test_sample_times_are_snapped():
    p = LatticeParams(N=4, boundary=Boundary.OBC)
    init = SingleExcitationState.excited_emitter(1, p.N)
    traj = evolve(p, [EmitterConfig()], init, 3.0, samples=7)
    tau = p.period / 32
    np.testing.assert_allclose(traj.times / tau, np.round(traj.times / tau), atol=1e-9)
    assert traj.times[0] == 0


def test_revival_warning_on_rings():
    p = LatticeParams(Jp=1.0, N=4)
    assert revival_horizon(p) == pytest.approx(4.0, rel=1e-6)
    init = SingleExcitationState.excited_emitter(1, p.N)
    with pytest.warns(RuntimeWarning, match="revival"):
        evolve(p, [EmitterConfig()], init, 10.0, samples=4)


def test_emitter_validation():
    p = LatticeParams(N=4)
    init = SingleExcitationState.excited_emitter(2, p.N)
    with pytest.raises(ValueError, match="two emitters"):
        evolve(p, [EmitterConfig(cell=2), EmitterConfig(cell=2)], init, 1.0)
    with pytest.raises(ValueError, match="outside"):
        evolve(p, [EmitterConfig(cell=9)], SingleExcitationState.excited_emitter(1, p.N), 1.0)
    with pytest.raises(ValueError, match="^g"):
        EmitterConfig(g=-1)


def test_state_round_trip():
    v = np.arange(7) + 1j
    s = SingleExcitationState.from_vector(v, 1)
    np.testing.assert_array_equal(s.vector(), v)


def test_exchange_frequency_of_ideal_signal():
    G = 0.013
    t = np.linspace(0, 400, 3001)
    assert exchange_frequency(t, np.cos(G * t) ** 2) == pytest.approx(2 * G, rel=1e-5)
    with pytest.raises(ValueError):
        first_minimum_time(t[:10], np.ones(10))


def test_static_path_matches_driven_path():
    p = LatticeParams(Jp=0.6, V=0.0, Omega=2.5, N=8, boundary=Boundary.OBC)
    em = [EmitterConfig(Delta=0.2, cell=4, g=0.1)]
    init = SingleExcitationState.excited_emitter(1, p.N)
    t_end = 4 * p.period
    exact = evolve(p, em, init, t_end, samples=4)
    stepped = evolve(p.replace(V=1e-14), em, init, t_end, samples=4)
    np.testing.assert_allclose(exact.times, stepped.times)
    np.testing.assert_allclose(exact.populations, stepped.populations, atol=1e-10)


def test_ring_size_for():
    p = LatticeParams(Jp=0.6, N=200)
    n = ring_size_for(p, 5000.0)
    assert n % 2 == 0 and revival_horizon(p.replace(N=n)) >= 5000.0
    assert ring_size_for(p, 10.0) == 200
