"""One-period propagators, quasi-energies and Floquet modes.

Propagation uses the piecewise-constant midpoint rule: every sub-step is the
exact exponential of the Hermitian Hamiltonian at the sub-step midpoint, so
propagators are unitary by construction and the time discretization error is
second order in the step.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from .errors import NonHermitianError, ResolutionError
from .lattice import (
    Boundary,
    LatticeParams,
    Sublattice,
    bath_matrices,
    drive_hopping,
    k_grid,
    split_sublattices,
    static_hopping,
)

DEFAULT_STEPS = 512
UNITARITY_TOL = 1e-9


@dataclass
class DrivenHamiltonian:
    """H(t) = static + cos(omega t) * drive with real symmetric parts.

    The cosine form lets the propagator reuse sub-step exponentials that share
    the same drive value, which halves the work per period.
    """

    static: np.ndarray
    drive: np.ndarray
    omega: float

    def __post_init__(self):
        for name in ("static", "drive"):
            M = getattr(self, name)
            if not np.allclose(M, M.conj().T, rtol=0, atol=1e-13 * max(1.0, np.abs(M).max())):
                raise NonHermitianError(f"{name} part of the driven Hamiltonian is not Hermitian")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def dimension(self) -> int:
        return self.static.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        return self.static + np.cos(self.omega * t) * self.drive


def driven_bath(params: LatticeParams) -> DrivenHamiltonian:
    static, drive = bath_matrices(params)
    return DrivenHamiltonian(static, drive, params.Omega)


@dataclass
class Propagator:
    """U(t0 + T, t0) plus any partial propagators U(t0 + s*h, t0) requested.

    Attributes:
        U: Full-period propagator.
        t0: Start time.
        T: Period.
        steps: Number of midpoint sub-steps of size h = T / steps.
        checkpoints: Map from sub-step count s to U(t0 + s*h, t0).
    """

    U: np.ndarray
    t0: float
    T: float
    steps: int
    checkpoints: dict[int, np.ndarray] = field(default_factory=dict)

    def unitarity_residual(self) -> float:
        I = np.eye(self.U.shape[0])
        return float(np.abs(self.U.conj().T @ self.U - I).max())

    def quasienergies(self, center: float = 0.0) -> np.ndarray:
        """Folded quasi-energies -arg(eigenvalue)/T, sorted ascending."""
        w = np.linalg.eigvals(self.U)
        return np.sort(fold_quasienergy(-np.angle(w) / self.T, 2 * np.pi / self.T, center))


def _check_hermitian(H: np.ndarray, t: float) -> None:
    scale = max(1.0, float(np.abs(H).max()))
    residual = float(np.abs(H - H.conj().T).max())
    if residual > 1e-12 * scale:
        raise NonHermitianError(
            f"Hamiltonian at t={t:.6g} is not Hermitian (max |H - H^dagger| = {residual:.3e})"
        )


def step_unitary(H: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for Hermitian H via its eigendecomposition."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def propagate_period(
    hamiltonian: Callable[[float], np.ndarray],
    t0: float = 0.0,
    steps: int = DEFAULT_STEPS,
    period: float | None = None,
    checkpoints: Iterable[int] = (),
) -> Propagator:
    """Time-ordered propagator over one drive period.

    Args:
        hamiltonian: Either a DrivenHamiltonian or any callable returning a
            Hermitian matrix at time t.
        t0: Start of the period.
        steps: Number of midpoint sub-steps.
        period: Required for plain callables; taken from a DrivenHamiltonian.
        checkpoints: Sub-step counts s at which U(t0 + s*T/steps, t0) is kept.

    Returns:
        Propagator for [t0, t0 + T].

    Raises:
        NonHermitianError: The provider returned a non-Hermitian matrix.
        ResolutionError: Accumulated rounding broke unitarity.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    driven = isinstance(hamiltonian, DrivenHamiltonian)
    if period is None:
        if not driven:
            raise ValueError("period is required for a generic Hamiltonian provider")
        period = hamiltonian.period
    keep = {int(s) for s in checkpoints}
    if any(s < 0 or s > steps for s in keep):
        raise ValueError("checkpoints must lie in [0, steps]")
    h = period / steps
    cache: dict[float, np.ndarray] = {}
    U = None
    saved = {0: None} if 0 in keep else {}
    for m in range(steps):
        t_mid = t0 + (m + 0.5) * h
        if driven:
            c = float(np.cos(hamiltonian.omega * t_mid))
            key = round(c, 13)
            step = cache.get(key)
            if step is None:
                step = step_unitary(hamiltonian.static + c * hamiltonian.drive, h)
                cache[key] = step
        else:
            H = np.asarray(hamiltonian(t_mid))
            _check_hermitian(H, t_mid)
            step = step_unitary(H, h)
        U = step.astype(complex) if U is None else step @ U
        if m + 1 in keep:
            saved[m + 1] = U.copy()
    dim = U.shape[0]
    if 0 in saved:
        saved[0] = np.eye(dim, dtype=complex)
    prop = Propagator(U=U, t0=t0, T=period, steps=steps, checkpoints=saved)
    residual = prop.unitarity_residual()
    if residual > UNITARITY_TOL:
        raise ResolutionError(f"propagator unitarity residual {residual:.3e} exceeds {UNITARITY_TOL}")
    return prop


def fold_quasienergy(eps, Omega: float, center: float = 0.0):
    """Map quasi-energies into the zone [center - Omega/2, center + Omega/2)."""
    eps = np.asarray(eps, dtype=float)
    lo = center - Omega / 2
    out = lo + np.mod(eps - lo, Omega)
    out = np.where(out >= lo + Omega, out - Omega, out)
    return out if out.ndim else float(out)


def zone_distance(eps, target: float, Omega: float):
    """Distance between quasi-energies and a target, modulo Omega."""
    return np.abs(fold_quasienergy(np.asarray(eps) - target, Omega, 0.0))


def bloch_propagators(params: LatticeParams, k, steps: int = DEFAULT_STEPS, t0: float = 0.0):
    """One-period 2x2 Bloch propagators for an array of momenta, shape (..., 2, 2)."""
    k = np.asarray(k, dtype=float)
    h = static_hopping(params, k)
    d = drive_hopping(params, k)
    dt = params.period / steps
    U = np.broadcast_to(np.eye(2, dtype=complex), k.shape + (2, 2)).copy()
    phase = np.exp(-1j * params.omega_c * dt)
    for m in range(steps):
        off = h + 2 * d * np.cos(params.Omega * (t0 + (m + 0.5) * dt))
        a = np.abs(off) * dt
        sinc = -1j * dt * np.sinc(a / np.pi)
        step = np.empty(k.shape + (2, 2), dtype=complex)
        step[..., 0, 0] = step[..., 1, 1] = np.cos(a)
        step[..., 0, 1] = sinc * off
        step[..., 1, 0] = sinc * np.conj(off)
        U = phase * (step @ U)
    return U


def quasienergies_bloch(params: LatticeParams, k, steps: int = DEFAULT_STEPS):
    """Exact Bloch quasi-energies (eps_plus, eps_minus) folded around omega_c.

    Works on scalar or array k; eps_plus >= eps_minus inside the zone.
    """
    U = bloch_propagators(params, k, steps)
    w = np.linalg.eigvals(U)
    eps = fold_quasienergy(-np.angle(w) / params.period, params.Omega, params.omega_c)
    eps = np.sort(np.asarray(eps), axis=-1)
    plus, minus = eps[..., 1], eps[..., 0]
    if plus.ndim == 0:
        return float(plus), float(minus)
    return plus, minus


def bulk_gaps(params: LatticeParams, grid_size: int = 2001, steps: int = DEFAULT_STEPS):
    """Half-widths of the bulk 0-gap and pi-gap from Bloch quasi-energies.

    Returns:
        (w0, wpi): distance from omega_c, and from omega_c + Omega/2, to the
        closest bulk quasi-energy on the k-grid.
    """
    ks = k_grid(grid_size)
    plus, minus = quasienergies_bloch(params, ks, steps)
    eps = np.concatenate([plus, minus])
    w0 = float(zone_distance(eps, params.omega_c, params.Omega).min())
    wpi = float(zone_distance(eps, params.omega_c + params.Omega / 2, params.Omega).min())
    return w0, wpi


@dataclass
class FloquetMode:
    """A Floquet eigenstate with its periodic part sampled at chosen times.

    Attributes:
        quasienergy: Folded quasi-energy.
        states: Map from sample time t0 in [0, T) to the normalized amplitude
            vector of the Floquet state at t0.
        period: Drive period T.
    """

    quasienergy: float
    states: dict[float, np.ndarray]
    period: float

    def state_at(self, t0: float) -> np.ndarray:
        for t, v in self.states.items():
            if abs(t - t0) < 1e-9 * max(1.0, self.period):
                return v
        raise KeyError(f"mode not sampled at t0={t0}; available {sorted(self.states)}")

    def ipr(self, t0: float = 0.0) -> float:
        """Inverse participation ratio sum |psi|^4 of the sampled state."""
        return float(np.sum(np.abs(self.state_at(t0)) ** 4))


def _sample_indices(sample_times, period, steps):
    out = {}
    h = period / steps
    for t in sample_times:
        if not 0 <= t < period:
            raise ValueError(f"sample time {t} outside [0, T)")
        s = int(round(t / h))
        if abs(s * h - t) > 1e-9 * period:
            raise ValueError(f"sample time {t} is not on the sub-step grid T/{steps}")
        out[float(t)] = s
    return out


def floquet_modes(
    hamiltonian: DrivenHamiltonian,
    sample_times: Iterable[float] = (0.0,),
    steps: int = DEFAULT_STEPS,
    center: float = 0.0,
    symmetry: np.ndarray | None = None,
    degeneracy_tol: float = 1e-7,
) -> list[FloquetMode]:
    """Diagonalize the one-period propagator and sample the Floquet modes.

    Eigenvectors come from a complex Schur decomposition, which is orthonormal
    for the normal matrix U. Within a (near) degenerate cluster the vectors are
    rotated to eigenvectors of ``symmetry`` so the basis is reproducible.

    Returns:
        Modes sorted by folded quasi-energy.
    """
    T = hamiltonian.period
    idx = _sample_indices(sample_times, T, steps)
    prop = propagate_period(hamiltonian, 0.0, steps, checkpoints=set(idx.values()) | {0})
    Tm, Z = schur(prop.U, output="complex")
    eps = fold_quasienergy(-np.angle(np.diag(Tm)) / T, hamiltonian.omega, center)
    order = np.argsort(eps, kind="stable")
    eps = eps[order]
    Z = Z[:, order]
    if symmetry is not None:
        Z = _stabilize_degenerate(eps, Z, symmetry, hamiltonian.omega, degeneracy_tol)
    modes = []
    for a in range(len(eps)):
        states = {}
        for t, s in idx.items():
            v = prop.checkpoints[s] @ Z[:, a]
            states[t] = v / np.linalg.norm(v)
        modes.append(FloquetMode(quasienergy=float(eps[a]), states=states, period=T))
    return modes


def _stabilize_degenerate(eps, Z, symmetry, Omega, tol):
    n = len(eps)
    # clusters of consecutive sorted quasi-energies, including the zone wrap
    breaks = [i for i in range(1, n) if eps[i] - eps[i - 1] > tol]
    groups = np.split(np.arange(n), breaks)
    if len(groups) > 1 and eps[0] + Omega - eps[-1] <= tol:
        groups[0] = np.concatenate([groups[-1], groups[0]])
        groups.pop()
    Z = Z.copy()
    for grp in groups:
        if len(grp) < 2:
            continue
        Q = Z[:, grp]
        R = Q.conj().T @ symmetry @ Q
        _, rot = np.linalg.eigh((R + R.conj().T) / 2)
        Z[:, grp] = Q @ rot
    return Z


def reflection_operator(N: int) -> np.ndarray:
    """Site reflection a_j <-> b_{N+1-j}, a symmetry of the open driven chain."""
    return np.fliplr(np.eye(2 * N))


def quasienergy_spectrum_obc(
    params: LatticeParams,
    sample_times: Iterable[float] = (0.0,),
    steps: int = DEFAULT_STEPS,
) -> list[FloquetMode]:
    """All 2N Floquet modes of the open chain, sorted by quasi-energy."""
    if params.boundary is not Boundary.OBC:
        raise ValueError("quasienergy_spectrum_obc requires boundary=OBC")
    return floquet_modes(
        driven_bath(params),
        sample_times,
        steps,
        center=params.omega_c,
        symmetry=reflection_operator(params.N),
    )


def edge_state_profile(mode: FloquetMode, t0: float) -> tuple[np.ndarray, np.ndarray]:
    """Sublattice-resolved magnitudes (|C_a,j|, |C_b,j|) at time t0."""
    ca, cb = split_sublattices(mode.state_at(t0))
    return np.abs(ca), np.abs(cb)


def edge_sublattice(profile: tuple[np.ndarray, np.ndarray], edge: str = "left") -> tuple[Sublattice, float]:
    """Dominant sublattice on one half of the chain and its weight fraction there."""
    ca, cb = profile
    half = len(ca) // 2
    sl = slice(0, half) if edge == "left" else slice(len(ca) - half, len(ca))
    wa = float(np.sum(ca[sl] ** 2))
    wb = float(np.sum(cb[sl] ** 2))
    if wa >= wb:
        return Sublattice.A, wa / (wa + wb)
    return Sublattice.B, wb / (wa + wb)


@dataclass
class EdgeStates:
    """Edge modes found in each gap of an open chain.

    Attributes:
        zero: Modes inside the 0-gap.
        pi: Modes inside the pi-gap.
        gap_zero: Bulk 0-gap half-width.
        gap_pi: Bulk pi-gap half-width.
    """

    zero: list[FloquetMode]
    pi: list[FloquetMode]
    gap_zero: float
    gap_pi: float


def find_edge_states(
    params: LatticeParams,
    modes: list[FloquetMode],
    steps: int = DEFAULT_STEPS,
    window: float = 0.05,
    closed_tol: float = 1e-3,
) -> EdgeStates:
    """Classify open-chain modes as 0-gap or pi-gap edge states.

    A mode is an edge state when its quasi-energy lies strictly inside the
    corresponding bulk gap, measured from the Bloch spectrum. When the bulk
    gap is closed the rule falls back to a quasi-energy window around the gap
    center combined with an inverse participation ratio above 4/N.
    """
    w0, wpi = bulk_gaps(params, steps=steps)
    centers = (params.omega_c, params.omega_c + params.Omega / 2)
    found = []
    for center, width in zip(centers, (w0, wpi)):
        picked = []
        for mode in modes:
            dist = float(zone_distance(mode.quasienergy, center, params.Omega))
            if width > closed_tol:
                inside = dist < width - 1e-6
            else:
                t0 = next(iter(mode.states))
                inside = dist < window and mode.ipr(t0) > 4 / params.N
            if inside:
                picked.append(mode)
        found.append(picked)
    return EdgeStates(zero=found[0], pi=found[1], gap_zero=w0, gap_pi=wpi)
