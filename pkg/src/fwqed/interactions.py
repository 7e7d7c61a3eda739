"""Photon-mediated emitter-emitter couplings and reduced two-emitter dynamics.

Couplings follow from the rotating-frame coupling table. Equal-frequency
emitters exchange through

    G_nm = g^2/(2N) sum_{r,k} F^a_r conj(F^b_r) e^{ik j_nm} / (Delta - lam_r),

and emitters detuned by exactly Omega exchange through the rows shifted by
two, G^Omega = g^2/(2N) sum_{k, r<=6} F^a_r conj(F^b_{r+2}) e^{ik j_12} / (Delta_2 - lam_{r+2}).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import EmitterConfig
from .effective import DEFAULT_CONVENTION, TableConvention, coupling_table
from .ksum import ETA_SCHEDULE, regularized_sum
from .lattice import LatticeParams, Sublattice
from .spectral import effective_self_energy

DETUNING_TOL = 1e-9


@dataclass(frozen=True)
class CouplingResult:
    """Coherent and dissipative parts of the photon-mediated coupling.

    Attributes:
        G: Coherent exchange rate (Hermitian part).
        Gamma_collective: Collective decay (anti-Hermitian part, times 2i).
        distance: j_nm = j_n - j_m.
        sublattices: (alpha, beta).
        Delta: Emitter detuning.
    """

    G: complex
    Gamma_collective: complex
    distance: int
    sublattices: tuple[Sublattice, Sublattice]
    Delta: float


def _pair_table(params, alpha, beta, j, convention, shift):
    a, b = Sublattice(alpha), Sublattice(beta)

    def table(ks):
        FA, FB, L = coupling_table(params, ks, convention)
        Fa = FA if a is Sublattice.A else FB
        Fb = FB if b is Sublattice.B else FA
        phase = np.exp(1j * ks * j)
        if shift == 0:
            return 0.5 * Fa * np.conj(Fb) * phase, L
        return 0.5 * Fa[:-shift] * np.conj(Fb[shift:]) * phase, L[shift:]

    key = ("pair", params.J, params.Jp, params.V, params.Omega, a, b, int(j), convention, shift)
    return table, key


def _hermitian_parts(table, key, Delta, scale, etas, tol):
    plus = regularized_sum(table, Delta, scale, etas, tol, cache_key=key, side=+1)[0]
    minus = regularized_sum(table, Delta, scale, etas, tol, cache_key=key, side=-1)[0]
    return (plus + minus) / 2, 1j * (plus - minus)


def dipole_coupling(
    params: LatticeParams,
    Delta: float,
    alpha: Sublattice,
    beta: Sublattice,
    j_nm: int,
    g: float,
    convention: TableConvention = DEFAULT_CONVENTION,
    etas=ETA_SCHEDULE,
    tol: float = 1e-10,
) -> CouplingResult:
    """Exchange rate and collective decay between two equal-frequency emitters.

    The pole sum is evaluated at Delta +- i eta and split into Hermitian and
    anti-Hermitian parts, so G_nm = conj(G_mn) holds by construction. For
    alpha = beta and j_nm = 0 this is the self-energy: G = Lamb shift and
    Gamma_collective = decay rate.
    """
    table, key = _pair_table(params, alpha, beta, j_nm, convention, 0)
    G, Gam = _hermitian_parts(table, key, Delta, g * g, etas, tol)
    return CouplingResult(complex(G), complex(Gam), int(j_nm), (Sublattice(alpha), Sublattice(beta)), float(Delta))


def dipole_coupling_detuned(
    params: LatticeParams,
    Delta1: float,
    Delta2: float,
    alpha: Sublattice,
    beta: Sublattice,
    j_12: int,
    g: float,
    convention: TableConvention = DEFAULT_CONVENTION,
    etas=ETA_SCHEDULE,
    tol: float = 1e-10,
) -> complex:
    """Drive-assisted coupling between emitters whose detunings differ by Omega.

    Raises:
        ValueError: |Delta1 - Delta2| differs from Omega by more than 1e-9.
    """
    gap = Delta1 - Delta2
    if abs(gap + params.Omega) <= DETUNING_TOL:
        return np.conj(dipole_coupling_detuned(params, Delta2, Delta1, beta, alpha, -j_12, g, convention, etas, tol))
    if abs(gap - params.Omega) > DETUNING_TOL:
        raise ValueError(f"|Delta1 - Delta2| = {abs(gap)} must equal Omega = {params.Omega}")
    table, key = _pair_table(params, alpha, beta, j_12, convention, 2)
    G, _ = _hermitian_parts(table, key, Delta2, g * g, etas, tol)
    return complex(G)


def coupling_profile(
    params: LatticeParams,
    Delta: float,
    alpha: Sublattice,
    beta: Sublattice,
    distances,
    g: float,
    convention: TableConvention = DEFAULT_CONVENTION,
) -> list[CouplingResult]:
    return [dipole_coupling(params, Delta, alpha, beta, int(j), g, convention) for j in distances]


def effective_two_emitter_dynamics(
    model: str,
    G: complex,
    lamb_shifts,
    times,
    detunings=(0.0, 0.0),
    Omega: float | None = None,
    Gamma=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Populations of the reduced two-emitter model, emitter 1 initially excited.

    In the interaction picture the model is

        H = sum_n dw_n |n><n| + (G e^{i nu t} |1><2| + h.c.),

    with nu = 0 for ``model="equal"`` and nu = Delta1 - Delta2 - Omega for
    ``model="detuned"``. Moving to the frame of the phase makes H static, so
    the solution is the closed-form two-level evolution. An optional 2x2
    decay matrix Gamma adds -i Gamma / 2 (no-jump evolution).

    Returns:
        (pop1, pop2) at ``times``.
    """
    if model == "equal":
        nu = 0.0
    elif model == "detuned":
        if Omega is None:
            raise ValueError("detuned model needs Omega")
        nu = detunings[0] - detunings[1] - Omega
    else:
        raise ValueError(f"model must be 'equal' or 'detuned', got {model!r}")
    d1, d2 = lamb_shifts
    H = np.array([[d1, G], [np.conj(G), d2 - nu]], dtype=complex)
    if Gamma is not None:
        H = H - 0.5j * np.asarray(Gamma, dtype=complex)
    t = np.asarray(times, dtype=float)
    U = expm(-1j * t[:, None, None] * H)
    c = U[:, :, 0]
    return np.abs(c[:, 0]) ** 2, np.abs(c[:, 1]) ** 2


@dataclass
class MasterEquationRates:
    """Born-Markov rates of the reduced emitter dynamics.

    Attributes:
        lamb_shifts: delta omega_n per emitter.
        G: Coherent coupling matrix; the diagonal holds the Lamb shifts.
        Gamma: Decay matrix.
        case: "I", "II" or "III".
    """

    lamb_shifts: np.ndarray
    G: np.ndarray
    Gamma: np.ndarray
    case: str


def master_equation_rates(
    params: LatticeParams,
    emitters: list[EmitterConfig],
    convention: TableConvention = DEFAULT_CONVENTION,
) -> MasterEquationRates:
    """Rates for one emitter (case I), equal detunings (case II), or a pair detuned by Omega (case III).

    Raises:
        ValueError: Emitter detunings fit none of the three cases.
    """
    emitters = list(emitters)
    n = len(emitters)
    if n == 0:
        raise ValueError("at least one emitter is required")
    deltas = np.array([e.Delta for e in emitters])
    G = np.zeros((n, n), dtype=complex)
    Gam = np.zeros((n, n), dtype=complex)
    if np.allclose(deltas, deltas[0], rtol=0, atol=DETUNING_TOL):
        for a, b in itertools.product(range(n), repeat=2):
            ea, eb = emitters[a], emitters[b]
            res = dipole_coupling(params, ea.Delta, ea.sublattice, eb.sublattice, ea.cell - eb.cell, 1.0, convention)
            G[a, b] = ea.g * eb.g * res.G
            Gam[a, b] = ea.g * eb.g * res.Gamma_collective
        case = "I" if n == 1 else "II"
    elif n == 2 and abs(abs(deltas[0] - deltas[1]) - params.Omega) <= DETUNING_TOL:
        for a, e in enumerate(emitters):
            se = effective_self_energy(params, e.Delta, e.g, e.sublattice, convention)
            G[a, a] = se.lamb_shift
            Gam[a, a] = se.decay
        e1, e2 = emitters
        G12 = dipole_coupling_detuned(params, e1.Delta, e2.Delta, e1.sublattice, e2.sublattice, e1.cell - e2.cell, 1.0, convention)
        G[0, 1] = e1.g * e2.g * G12
        G[1, 0] = np.conj(G[0, 1])
        case = "III"
    else:
        raise ValueError("emitters must share Delta, or be a pair detuned by exactly Omega")
    return MasterEquationRates(lamb_shifts=np.real(np.diag(G)).copy(), G=G, Gamma=Gam, case=case)


@dataclass(frozen=True)
class TermClass:
    """A second-order term sigma_n^dagger O_r O_r'^dagger sigma_m and its fate under the RWA."""

    n: int
    m: int
    r: int
    rp: int
    frequency: float | None
    retained: bool


_LADDER = {1: 1.5, 2: 1.5, 3: 0.5, 4: 0.5, 5: -0.5, 6: -0.5, 7: -1.5, 8: -1.5}


def rwa_term_classes(Delta1: float, Delta2: float, Omega: float, tol: float = DETUNING_TOL) -> list[TermClass]:
    """Enumerate all (n, m, r, r') term classes of the two-emitter second-order expansion.

    Terms pairing a p row with a q row vanish (different bath modes) and get
    frequency None. Same-kind rows differ by a multiple of Omega, so the term
    oscillates at Delta_n - Delta_m - (o_r - o_r') Omega with o_r the Omega
    offset of row r; it is retained when that frequency vanishes.
    """
    deltas = {1: Delta1, 2: Delta2}
    out = []
    for n, m in itertools.product((1, 2), repeat=2):
        for r, rp in itertools.product(range(1, 9), repeat=2):
            if r % 2 != rp % 2:
                out.append(TermClass(n, m, r, rp, None, False))
                continue
            freq = deltas[n] - deltas[m] - (_LADDER[r] - _LADDER[rp]) * Omega
            out.append(TermClass(n, m, r, rp, freq, abs(freq) <= tol))
    return out
