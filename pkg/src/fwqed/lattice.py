"""Driven SSH bath in real space and momentum space.

Energies are in units of the intra-cell hopping J and times in units of 1/J.
The cavity frequency omega_c only shifts the whole spectrum, so it defaults
to 0 and emitters carry their detunings Delta = omega_n - omega_c.

Real-space sites are ordered (a_1, b_1, a_2, b_2, ...) so that sublattice
amplitudes are stride-2 slices of a state vector.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Boundary(str, Enum):
    PBC = "PBC"
    OBC = "OBC"


class Sublattice(str, Enum):
    A = "A"
    B = "B"

    @property
    def offset(self) -> int:
        """Position of this sublattice inside a unit cell."""
        return 0 if self is Sublattice.A else 1


@dataclass(frozen=True)
class LatticeParams:
    """Constants of the driven SSH bath.

    Attributes:
        J: Intra-cell hopping, the energy unit.
        Jp: Inter-cell hopping J'.
        V: Drive amplitude of the modulated hoppings.
        Omega: Drive frequency.
        omega_c: Cavity frequency offset.
        N: Number of unit cells.
        boundary: Periodic or open chain.
    """

    J: float = 1.0
    Jp: float = 2.0
    V: float = 0.2
    Omega: float = 5.0
    omega_c: float = 0.0
    N: int = 20
    boundary: Boundary = Boundary.PBC

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not self.J > 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if not self.Jp >= 0:
            raise ValueError(f"Jp must be non-negative, got {self.Jp}")
        if not self.V >= 0:
            raise ValueError(f"V must be non-negative, got {self.V}")
        if not (self.Omega > 0 and np.isfinite(self.Omega)):
            raise ValueError(f"Omega must be positive and finite, got {self.Omega}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def period(self) -> float:
        return 2 * np.pi / self.Omega

    def replace(self, **changes) -> LatticeParams:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class BlochSnapshot:
    """Static and drive amplitudes of one Bloch momentum."""

    k: float
    h_k: complex
    d_k: complex
    theta_k: float
    beta_k: float
    z_k: float


def k_grid(M: int) -> np.ndarray:
    """Uniform grid k_m = -pi + 2 pi m / M, m = 0..M-1."""
    return -np.pi + 2 * np.pi * np.arange(M) / M


def pbc_momenta(N: int) -> np.ndarray:
    """The N momenta allowed by a periodic chain, mapped into (-pi, pi]."""
    k = 2 * np.pi * np.arange(N) / N
    return np.where(k > np.pi, k - 2 * np.pi, k)


def static_hopping(params: LatticeParams, k):
    """h_k = J + J' exp(-ik)."""
    return params.J + params.Jp * np.exp(-1j * np.asarray(k))


def drive_hopping(params: LatticeParams, k):
    """d_k = V (1 - exp(-ik))."""
    return params.V * (1 - np.exp(-1j * np.asarray(k)))


def drive_phase(k):
    """beta_k = arg(1 - exp(-ik)), set to 0 at k = 0 where d_k vanishes."""
    k = np.asarray(k, dtype=float)
    beta = np.where(k == 0, 0.0, np.angle(1 - np.exp(-1j * k)))
    return beta if beta.ndim else float(beta)


def bloch_snapshot(params: LatticeParams, k: float) -> BlochSnapshot:
    h = complex(static_hopping(params, k))
    d = complex(drive_hopping(params, k))
    return BlochSnapshot(
        k=float(k),
        h_k=h,
        d_k=d,
        theta_k=float(np.angle(h)),
        beta_k=drive_phase(k),
        z_k=2 * abs(d) / params.Omega,
    )


def hoppings_at(params: LatticeParams, t: float) -> tuple[float, float]:
    """Instantaneous intra-cell and inter-cell hoppings (J1, J2)."""
    c = 2 * params.V * np.cos(params.Omega * t)
    return params.J + c, params.Jp - c


def bloch_matrix(params: LatticeParams, k, t: float) -> np.ndarray:
    """2x2 Bloch Hamiltonian in the (a, b) basis; stacks along leading axes for array k."""
    off = static_hopping(params, k) + 2 * drive_hopping(params, k) * np.cos(params.Omega * t)
    off = np.asarray(off)
    H = np.empty(off.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = params.omega_c
    H[..., 1, 1] = params.omega_c
    H[..., 0, 1] = off
    H[..., 1, 0] = np.conj(off)
    return H


def static_dispersion(params: LatticeParams, k):
    """omega(k) = |h_k|, the upper static band measured from omega_c."""
    J, Jp = params.J, params.Jp
    w2 = J * J + Jp * Jp + 2 * J * Jp * np.cos(k)
    return np.sqrt(np.maximum(w2, 0.0))


def bath_matrices(params: LatticeParams) -> tuple[np.ndarray, np.ndarray]:
    """Split the real-space bath as H(t) = static + cos(Omega t) * drive.

    Both matrices are real symmetric. The static part includes omega_c on the
    diagonal.
    """
    N = params.N
    dim = 2 * N
    static = np.diag(np.full(dim, float(params.omega_c)))
    drive = np.zeros((dim, dim))
    a = 2 * np.arange(N)
    b = a + 1
    static[a, b] = static[b, a] = params.J
    drive[a, b] = drive[b, a] = 2 * params.V
    ncells = N if params.boundary is Boundary.PBC else N - 1
    bj = b[:ncells]
    an = (a[:ncells] + 2) % dim
    static[an, bj] = static[bj, an] = params.Jp
    drive[an, bj] = drive[bj, an] = -2 * params.V
    return static, drive


def real_space_hamiltonian(params: LatticeParams, t: float) -> np.ndarray:
    """2N x 2N bath Hamiltonian at time t with hoppings J1(t), J2(t)."""
    static, drive = bath_matrices(params)
    return static + np.cos(params.Omega * t) * drive


def site_index(cell: int, sublattice: Sublattice) -> int:
    """Index of (cell, sublattice) in the site ordering, cells counted from 1."""
    return 2 * (cell - 1) + Sublattice(sublattice).offset


def split_sublattices(vector: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (C_a, C_b) from a bath amplitude vector."""
    return vector[0::2], vector[1::2]
