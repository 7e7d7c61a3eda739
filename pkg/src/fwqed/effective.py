"""Bessel-renormalized rotating-frame model of the driven bath.

Expanding the drive with the Jacobi-Anger identity and keeping only the J_0
and J_1 terms turns the driven Bloch Hamiltonian into a static one in a frame
rotating at Omega/2. Its eigenvalues +-lambda(k) give the quasi-energies
omega_c + (2m+1) Omega/2 +- lambda(k). The approximation is controlled when
one-photon resonances dominate (2|J - J'| < Omega < 2|J + J'| region and weak
drives); tests exercise it only in that regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bessel import j0, j1
from .errors import GapClosedError, ResolutionError
from .lattice import LatticeParams, Sublattice, drive_hopping, drive_phase, k_grid, static_hopping

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# sigma_x anticommutes with delta sigma_z - gamma sigma_y
CHIRAL_OPERATOR = SIGMA_X

_SMALL_Z = 1e-6


@dataclass(frozen=True)
class EffectiveBloch:
    """Renormalized per-momentum quantities; fields are floats or arrays."""

    k: np.ndarray | float
    omega_d: np.ndarray | float
    theta_d: np.ndarray | float
    gamma_k: np.ndarray | float
    lambda_k: np.ndarray | float
    phi_k: np.ndarray | float


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def dressed_hopping(params: LatticeParams, k):
    """h_k^d = h_k (1 + J0(2z))/2 + e^{2i beta} conj(h_k) (1 - J0(2z))/2."""
    k = np.asarray(k, dtype=float)
    h = static_hopping(params, k)
    z = 2 * np.abs(drive_hopping(params, k)) / params.Omega
    b0 = j0(2 * z)
    return h * (1 + b0) / 2 + np.exp(2j * drive_phase(k)) * np.conj(h) * (1 - b0) / 2


def drive_coupling(params: LatticeParams, k):
    """gamma_k = J1(2z)(J + J') V sin(k) / |d_k|, with its small-z limit."""
    k = np.asarray(k, dtype=float)
    ad = np.abs(drive_hopping(params, k))
    z = 2 * ad / params.Omega
    small = z < _SMALL_Z
    safe = np.where(small, 1.0, ad)
    exact = j1(2 * z) * (params.J + params.Jp) * params.V * np.sin(k) / safe
    # J1(2z) -> z = 2|d|/Omega as z -> 0
    limit = 2 * (params.J + params.Jp) * params.V * np.sin(k) / params.Omega
    return np.where(small, limit, exact)


def effective_bloch(params: LatticeParams, k) -> EffectiveBloch:
    hd = dressed_hopping(params, k)
    gamma = drive_coupling(params, k)
    omega_d = np.abs(hd)
    delta = omega_d - params.Omega / 2
    return EffectiveBloch(
        k=_scalar(k),
        omega_d=_scalar(omega_d),
        theta_d=_scalar(np.angle(hd)),
        gamma_k=_scalar(gamma),
        lambda_k=_scalar(np.hypot(delta, gamma)),
        phi_k=_scalar(np.arctan2(gamma, delta)),
    )


def rwa_quasienergies(params: LatticeParams, k, m: int = -1):
    """(eps_plus, eps_minus) = omega_c + (2m+1) Omega/2 +- lambda(k)."""
    lam = effective_bloch(params, k).lambda_k
    base = params.omega_c + (2 * m + 1) * params.Omega / 2
    return base + lam, base - lam


def rwa_hamiltonian(params: LatticeParams, k) -> np.ndarray:
    """Rotating-frame Bloch Hamiltonian delta_k sigma_z - gamma_k sigma_y in the (u, l) basis."""
    eb = effective_bloch(params, k)
    delta = np.asarray(eb.omega_d) - params.Omega / 2
    gamma = np.asarray(eb.gamma_k)
    return delta[..., None, None] * SIGMA_Z - gamma[..., None, None] * SIGMA_Y


def _loop(grid_size: int) -> np.ndarray:
    # Closed loop traversed with decreasing k; with this orientation both
    # invariants equal +1 in the topological phases.
    return k_grid(grid_size)[::-1]


def winding_0_integral(params: LatticeParams, grid_size: int = 2001, tol: float = 1e-9, max_grid: int = 2**20) -> float:
    """Unrounded winding of the dressed hopping phase theta_k^d around the Brillouin zone.

    Raises:
        GapClosedError: omega_d(k) vanishes, so the 0-gap is closed.
    """
    probe = np.concatenate([k_grid(grid_size), [0.0, np.pi]])
    wmin = float(np.abs(dressed_hopping(params, probe)).min())
    if wmin < tol:
        raise GapClosedError(f"invariant undefined: 0-gap closed (min omega_d = {wmin:.3e})")
    M = grid_size
    while True:
        ks = _loop(M)
        theta = np.angle(dressed_hopping(params, ks))
        steps = np.diff(np.append(theta, theta[0]))
        steps = (steps + np.pi) % (2 * np.pi) - np.pi
        if np.abs(steps).max() < np.pi / 2:
            break
        M *= 2
        if M > max_grid:
            raise ResolutionError("winding_0: phase increments stay above pi/2 after refinement")
    return float(steps.sum() / (2 * np.pi))


def _integer(total, name):
    nu = int(round(total))
    if abs(total - nu) >= 0.05:
        raise ResolutionError(f"{name} residual {abs(total - nu):.3f} too large")
    return nu


def winding_0(params: LatticeParams, grid_size: int = 2001, tol: float = 1e-9, max_grid: int = 2**20) -> int:
    """0-gap winding number nu_0.

    Raises:
        GapClosedError: omega_d(k) vanishes, so the 0-gap is closed.
        ResolutionError: The integral is not within 0.05 of an integer.
    """
    return _integer(winding_0_integral(params, grid_size, tol, max_grid), "winding_0")


def winding_pi_integral(params: LatticeParams, grid_size: int = 2001, tol: float = 1e-9) -> float:
    """Unrounded (1/4 pi) loop integral of tr{tau_c H^-1 i dH/dk}.

    Derivatives are centered finite differences on the closed loop.

    Raises:
        GapClosedError: lambda(k) vanishes, so the pi-gap is closed.
    """
    probe = np.concatenate([k_grid(grid_size), [0.0, np.pi]])
    lmin = float(np.min(effective_bloch(params, probe).lambda_k))
    if lmin < tol:
        raise GapClosedError(f"invariant undefined: pi-gap closed (min lambda = {lmin:.3e})")
    ks = _loop(grid_size)
    dk = ks[1] - ks[0]
    H = rwa_hamiltonian(params, ks)
    dH = (np.roll(H, -1, axis=0) - np.roll(H, 1, axis=0)) / (2 * dk)
    integrand = np.einsum("ij,kjl,kli->k", CHIRAL_OPERATOR, np.linalg.inv(H), 1j * dH)
    return float(np.real(integrand.sum()) * dk / (4 * np.pi))


def winding_pi(params: LatticeParams, grid_size: int = 2001, tol: float = 1e-9) -> int:
    """pi-gap winding number nu_pi.

    Raises:
        GapClosedError: lambda(k) vanishes, so the pi-gap is closed.
        ResolutionError: The integral is not within 0.05 of an integer.
    """
    return _integer(winding_pi_integral(params, grid_size, tol), "winding_pi")


@dataclass(frozen=True)
class TableConvention:
    """Choices for the coupling table that the printed table leaves ambiguous.

    Attributes:
        lambda7: "corrected" uses lambda_7 = lambda(k) - 3 Omega/2, restoring the
            ladder lambda_{r+2} = lambda_r - Omega of the p rows; "verbatim"
            keeps the printed -lambda(k) - 3 Omega/2.
        phase: "bare" uses theta_k as printed; "dressed" uses theta_k^d.
    """

    lambda7: str = "corrected"
    phase: str = "bare"

    def __post_init__(self):
        if self.lambda7 not in ("corrected", "verbatim"):
            raise ValueError(f"unknown lambda7 convention {self.lambda7!r}")
        if self.phase not in ("bare", "dressed"):
            raise ValueError(f"unknown phase convention {self.phase!r}")


DEFAULT_CONVENTION = TableConvention()
VERBATIM = TableConvention(lambda7="verbatim")


@dataclass(frozen=True)
class FRow:
    """One row of the coupling table: operator p or q, frequency and couplings."""

    r: int
    op_kind: str
    lambda_r: float
    F_A: complex
    F_B: complex


def coupling_table(params: LatticeParams, k, convention: TableConvention = DEFAULT_CONVENTION):
    """Vectorized coupling table.

    Args:
        params: Bath parameters.
        k: Scalar or array of momenta.
        convention: Table convention.

    Returns:
        (F_A, F_B, lam), each of shape (8,) + shape(k), row r at index r-1.
    """
    k = np.asarray(k, dtype=float)
    eb = effective_bloch(params, k)
    h = static_hopping(params, k)
    z = 2 * np.abs(drive_hopping(params, k)) / params.Omega
    beta = drive_phase(k)
    theta = np.angle(h) if convention.phase == "bare" else np.asarray(eb.theta_d)
    c = np.cos(np.asarray(eb.phi_k) / 2)
    s = np.sin(np.asarray(eb.phi_k) / 2)
    b0 = j0(z)
    b1 = j1(z)
    E = np.exp(1j * (beta - theta))
    D = np.exp(-1j * beta)
    et = np.exp(-1j * theta)
    FA = np.array([
        -E * b1 * c,
        -E * b1 * s,
        b0 * c - 1j * E * b1 * s,
        b0 * s + 1j * E * b1 * c,
        -1j * b0 * s + E * b1 * c,
        1j * b0 * c + E * b1 * s,
        1j * E * b1 * s,
        -1j * E * b1 * c,
    ])
    FB = np.array([
        -D * b1 * c,
        -D * b1 * s,
        et * b0 * c + 1j * D * b1 * s,
        et * b0 * s - 1j * D * b1 * c,
        1j * et * b0 * s + D * b1 * c,
        -1j * et * b0 * c + D * b1 * s,
        -1j * D * b1 * s,
        1j * D * b1 * c,
    ])
    lam = np.asarray(eb.lambda_k)
    W = params.Omega
    lam7 = lam - 1.5 * W if convention.lambda7 == "corrected" else -lam - 1.5 * W
    L = np.array([
        lam + 1.5 * W,
        -lam + 1.5 * W,
        lam + 0.5 * W,
        -lam + 0.5 * W,
        lam - 0.5 * W,
        -lam - 0.5 * W,
        lam7,
        -lam - 1.5 * W,
    ])
    return FA, FB, L


def f_table(params: LatticeParams, k: float, convention: TableConvention = DEFAULT_CONVENTION) -> list[FRow]:
    """The eight table rows at one momentum."""
    FA, FB, L = coupling_table(params, float(k), convention)
    return [
        FRow(r=r + 1, op_kind="p" if r % 2 == 0 else "q", lambda_r=float(L[r]), F_A=complex(FA[r]), F_B=complex(FB[r]))
        for r in range(8)
    ]


def sublattice_couplings(params: LatticeParams, k, sublattice: Sublattice, convention=DEFAULT_CONVENTION):
    """(F, lam) for one sublattice, shapes (8,) + shape(k)."""
    FA, FB, L = coupling_table(params, k, convention)
    return (FA if Sublattice(sublattice) is Sublattice.A else FB), L
