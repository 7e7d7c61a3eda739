"""Exact single-excitation dynamics of emitters coupled to the driven bath.

The bath is simulated in the frame rotating at omega_c, so the bath block is
the real-space Hamiltonian minus omega_c and each emitter carries its detuning
Delta_n. Light-matter coupling keeps only excitation-conserving terms.
State vectors are ordered (emitters..., a_1, b_1, a_2, b_2, ...).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NormDriftError
from .floquet import DrivenHamiltonian, propagate_period
from .lattice import Boundary, LatticeParams, Sublattice, bath_matrices, site_index, split_sublattices

DEFAULT_STEPS_PER_PERIOD = 256
NORM_TOL = 1e-6


@dataclass(frozen=True)
class EmitterConfig:
    """A two-level emitter attached to one lattice site.

    Attributes:
        Delta: Detuning omega_n - omega_c.
        cell: Unit cell index, counted from 1.
        sublattice: Site within the cell.
        g: Coupling strength.
    """

    Delta: float = 0.0
    cell: int = 1
    sublattice: Sublattice = Sublattice.A
    g: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "sublattice", Sublattice(self.sublattice))
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if int(self.cell) != self.cell or self.cell < 1:
            raise ValueError(f"cell must be a positive integer, got {self.cell}")
        object.__setattr__(self, "cell", int(self.cell))


def _validate(params: LatticeParams, emitters) -> None:
    seen = set()
    for e in emitters:
        if e.cell > params.N:
            raise ValueError(f"emitter cell {e.cell} outside lattice of {params.N} cells")
        key = (e.cell, e.sublattice)
        if key in seen:
            raise ValueError(f"two emitters on cell {e.cell} sublattice {e.sublattice.value}")
        seen.add(key)


def system_matrices(params: LatticeParams, emitters) -> tuple[np.ndarray, np.ndarray]:
    """Split the full Hamiltonian as static + cos(Omega t) * drive."""
    emitters = list(emitters)
    _validate(params, emitters)
    bath_static, bath_drive = bath_matrices(params)
    ne = len(emitters)
    dim = ne + 2 * params.N
    static = np.zeros((dim, dim))
    drive = np.zeros((dim, dim))
    static[ne:, ne:] = bath_static - params.omega_c * np.eye(2 * params.N)
    drive[ne:, ne:] = bath_drive
    for n, e in enumerate(emitters):
        site = ne + site_index(e.cell, e.sublattice)
        static[n, n] = e.Delta
        static[n, site] = static[site, n] = e.g
    return static, drive


def driven_system(params: LatticeParams, emitters) -> DrivenHamiltonian:
    static, drive = system_matrices(params, emitters)
    return DrivenHamiltonian(static, drive, params.Omega)


def full_hamiltonian(params: LatticeParams, emitters, t: float) -> np.ndarray:
    """Hermitian matrix of dimension N_e + 2N at time t."""
    static, drive = system_matrices(params, emitters)
    return static + np.cos(params.Omega * t) * drive


@dataclass
class SingleExcitationState:
    """Amplitudes of the single-excitation sector at one time."""

    C_e: np.ndarray
    C_a: np.ndarray
    C_b: np.ndarray
    time: float = 0.0

    @classmethod
    def excited_emitter(cls, n_emitters: int, N: int, which: int = 0) -> SingleExcitationState:
        C_e = np.zeros(n_emitters, dtype=complex)
        C_e[which] = 1.0
        return cls(C_e, np.zeros(N, dtype=complex), np.zeros(N, dtype=complex))

    @classmethod
    def from_vector(cls, v: np.ndarray, n_emitters: int, time: float = 0.0) -> SingleExcitationState:
        ca, cb = split_sublattices(v[n_emitters:])
        return cls(v[:n_emitters].copy(), ca.copy(), cb.copy(), time)

    def vector(self) -> np.ndarray:
        bath = np.empty(2 * len(self.C_a), dtype=complex)
        bath[0::2] = self.C_a
        bath[1::2] = self.C_b
        return np.concatenate([np.asarray(self.C_e, dtype=complex), bath])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))


@dataclass
class Trajectory:
    """Sampled evolution.

    Attributes:
        times: Sample times, snapped to the sub-period sampling lattice.
        populations: |C_e,n(t)|^2, shape (len(times), N_e).
        norms: State norm at each sample.
        states: Full states when requested, else None.
    """

    times: np.ndarray
    populations: np.ndarray
    norms: np.ndarray
    states: list[SingleExcitationState] | None = None


def revival_horizon(params: LatticeParams) -> float:
    """Time for the fastest static-band wavefront to circle a periodic ring, N / v_max."""
    k = np.linspace(-np.pi, np.pi, 20001)[1:-1]
    w = np.sqrt(params.J**2 + params.Jp**2 + 2 * params.J * params.Jp * np.cos(k))
    v = np.abs(params.J * params.Jp * np.sin(k) / np.maximum(w, 1e-300))
    vmax = float(v.max())
    return math.inf if vmax == 0 else params.N / vmax


def _subsamples(period: float, spacing: float, steps: int, cap: int) -> int:
    m = 1
    while period / m > spacing and m < cap and steps % (2 * m) == 0:
        m *= 2
    return m


def evolve(
    params: LatticeParams,
    emitters,
    initial: SingleExcitationState,
    t_end: float,
    samples: int = 400,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    keep_states: bool = False,
    max_subsamples: int = 32,
) -> Trajectory:
    """Propagate a single-excitation state with the midpoint stepper.

    The one-period propagator is applied stroboscopically, and partial
    propagators inside the period give intermediate times. Requested sample
    times t_end * i / samples are snapped to the nearest multiple of
    T / m, where m is a power of two (at most ``max_subsamples``). An
    undriven system (V = 0) is instead solved exactly by one
    eigendecomposition at the requested times.

    Raises:
        NormDriftError: The state norm drifted by more than 1e-6.
    """
    emitters = list(emitters)
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    psi0 = initial.vector()
    if abs(np.linalg.norm(psi0) - 1) > 1e-9:
        raise ValueError("initial state must be normalized")
    if params.boundary is Boundary.PBC and t_end > revival_horizon(params):
        warnings.warn(
            f"t_end={t_end:.4g} exceeds the periodic-ring revival horizon {revival_horizon(params):.4g}",
            RuntimeWarning,
            stacklevel=2,
        )
    static, drive = system_matrices(params, emitters)
    if not drive.any():
        return _evolve_static(static, psi0, len(emitters), t_end, samples, keep_states)
    T = params.period
    spacing = t_end / samples if samples > 0 else T
    m = _subsamples(T, spacing, steps_per_period, max_subsamples)
    tau = T / m
    wanted = np.unique(np.rint(np.linspace(0, t_end, samples + 1) / tau).astype(np.int64))
    sub = sorted({int(n % m) for n in wanted})
    stride = steps_per_period // m
    prop = propagate_period(driven_system(params, emitters), 0.0, steps_per_period, checkpoints=[s * stride for s in sub])
    ne = len(emitters)
    times = wanted * tau
    pops = np.empty((len(wanted), ne))
    norms = np.empty(len(wanted))
    states = [] if keep_states else None
    psi = psi0
    period_index = 0
    for i, n in enumerate(wanted):
        p, s = divmod(int(n), m)
        while period_index < p:
            psi = prop.U @ psi
            period_index += 1
        v = psi if s == 0 else prop.checkpoints[s * stride] @ psi
        nrm = np.linalg.norm(v)
        if abs(nrm - 1) > NORM_TOL:
            raise NormDriftError(
                f"norm drift {abs(nrm - 1):.3e} at t={times[i]:.6g}; "
                f"increase steps_per_period (now {steps_per_period}, dt={T / steps_per_period:.3e})"
            )
        norms[i] = nrm
        pops[i] = np.abs(v[:ne]) ** 2
        if keep_states:
            states.append(SingleExcitationState.from_vector(v, ne, float(times[i])))
    return Trajectory(times=times, populations=pops, norms=norms, states=states)


def _evolve_static(H, psi0, ne, t_end, samples, keep_states):
    w, v = np.linalg.eigh(H)
    c = v.conj().T @ psi0
    times = np.linspace(0.0, t_end, samples + 1) if samples > 0 else np.array([0.0])
    phases = np.exp(-1j * np.outer(times, w)) * c
    pops = np.abs(phases @ v[:ne].T) ** 2
    norms = np.linalg.norm(phases, axis=1)
    if np.abs(norms - 1).max() > NORM_TOL:
        raise NormDriftError(f"norm drift {np.abs(norms - 1).max():.3e} in the static eigenbasis")
    states = [SingleExcitationState.from_vector(v @ ph, ne, float(t)) for t, ph in zip(times, phases)] if keep_states else None
    return Trajectory(times=times, populations=pops, norms=norms, states=states)


def ring_size_for(params: LatticeParams, t_end: float) -> int:
    """Smallest even N >= params.N whose revival horizon reaches t_end."""
    horizon = revival_horizon(params)
    if horizon >= t_end:
        return params.N
    n = math.ceil(params.N * t_end / horizon)
    return n + n % 2


@dataclass
class ExchangeResult:
    times: np.ndarray
    pop1: np.ndarray
    pop2: np.ndarray


def exchange_trajectory(
    params: LatticeParams,
    emitter1: EmitterConfig,
    emitter2: EmitterConfig,
    t_end: float,
    samples: int = 400,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
) -> ExchangeResult:
    """Populations of two emitters starting from emitter 1 excited."""
    initial = SingleExcitationState.excited_emitter(2, params.N, 0)
    traj = evolve(params, [emitter1, emitter2], initial, t_end, samples, steps_per_period)
    return ExchangeResult(traj.times, traj.populations[:, 0], traj.populations[:, 1])


def first_minimum_time(times: np.ndarray, values: np.ndarray, below: float = 0.5) -> float:
    """Time of the first local minimum under ``below``, refined by a parabola.

    Raises:
        ValueError: No such minimum within the samples.
    """
    v = np.asarray(values)
    for i in range(1, len(v) - 1):
        if v[i] < below and v[i] <= v[i - 1] and v[i] <= v[i + 1]:
            t0, t1, t2 = times[i - 1 : i + 2]
            y0, y1, y2 = v[i - 1 : i + 2]
            denom = y0 - 2 * y1 + y2
            if denom <= 0 or not np.isclose(t1 - t0, t2 - t1):
                return float(t1)
            return float(t1 + 0.5 * (t1 - t0) * (y0 - y2) / denom)
    raise ValueError("no local minimum below threshold in the sampled trajectory")


def exchange_frequency(times: np.ndarray, pop1: np.ndarray) -> float:
    """Exchange angular frequency 2|G| = pi / t_min from pop1 = cos^2(|G| t)."""
    return math.pi / first_minimum_time(times, pop1)
