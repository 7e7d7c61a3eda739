"""Self-energies, Lamb shifts, decay rates and emitter-photon bound states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import EmitterConfig, driven_system
from .effective import DEFAULT_CONVENTION, TableConvention, coupling_table, effective_bloch
from .errors import GapClosedError
from .floquet import DEFAULT_STEPS, bulk_gaps, floquet_modes, zone_distance
from .ksum import ETA_SCHEDULE, pole_sum, regularized_sum
from .lattice import LatticeParams, Sublattice, k_grid, split_sublattices, static_dispersion, static_hopping


@dataclass(frozen=True)
class SelfEnergyResult:
    """Self-energy at probe energies z; fields are scalars or arrays.

    Attributes:
        z: Probe energy (real part Delta; i0+ implied when real).
        sigma: Complex self-energy.
        lamb_shift: Re sigma.
        decay: -2 Im sigma.
    """

    z: complex | np.ndarray
    sigma: complex | np.ndarray
    lamb_shift: float | np.ndarray
    decay: float | np.ndarray


def _result(z, sigma, scalar):
    if scalar:
        z, sigma = complex(np.ravel(z)[0]), complex(sigma[0])
        return SelfEnergyResult(z, sigma, sigma.real, -2 * sigma.imag)
    return SelfEnergyResult(z, sigma, sigma.real, -2 * sigma.imag)


def _static_table(params):
    def table(ks):
        w = static_dispersion(params, ks)
        half = np.full((2, len(ks)), 0.5)
        return half, np.stack([w, -w])

    return table, ("static", params.J, params.Jp)


def _effective_table(params, sublattice, convention):
    sub = Sublattice(sublattice)

    def table(ks):
        FA, FB, L = coupling_table(params, ks, convention)
        F = FA if sub is Sublattice.A else FB
        return 0.5 * np.abs(F) ** 2, L

    return table, ("eff", params.J, params.Jp, params.V, params.Omega, sub, convention)


def _evaluate(table, key, z, g, etas, tol):
    z_arr = np.asarray(z)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr).astype(complex)
    scale = g * g
    out = np.empty(len(z_arr), dtype=complex)
    real = z_arr.imag == 0
    if real.any():
        out[real] = regularized_sum(table, z_arr[real].real, scale, etas, tol, cache_key=key)
    if (~real).any():
        if np.any(z_arr[~real].imag < 0):
            raise ValueError("probe energies need Im z >= 0")
        out[~real] = pole_sum(table, z_arr[~real], tol=tol, scale=scale, cache_key=key)
    return _result(z_arr if not scalar else z_arr[0], out, scalar)


def static_self_energy(
    params: LatticeParams,
    z,
    g: float,
    sublattice: Sublattice = Sublattice.A,
    etas=ETA_SCHEDULE,
    tol: float = 1e-8,
) -> SelfEnergyResult:
    """Static-bath self-energy g^2 mean_k z / (z^2 - omega(k)^2).

    Real z is evaluated at z + i eta over ``etas`` and extrapolated to eta -> 0;
    complex z with Im z > 0 is used as given. Both sublattices give the same
    result because the integrand depends on |h_k| only.
    """
    Sublattice(sublattice)
    table, key = _static_table(params)
    return _evaluate(table, key, z, g, etas, tol)


def effective_self_energy(
    params: LatticeParams,
    z,
    g: float,
    sublattice: Sublattice = Sublattice.A,
    convention: TableConvention = DEFAULT_CONVENTION,
    etas=ETA_SCHEDULE,
    tol: float = 1e-8,
) -> SelfEnergyResult:
    """Self-energy of the rotating-frame model, g^2/(2N) sum_{r,k} |F_r|^2 / (z - lam_r)."""
    table, key = _effective_table(params, sublattice, convention)
    return _evaluate(table, key, z, g, etas, tol)


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def static_bands(params: LatticeParams) -> list[tuple[float, float]]:
    """Static band intervals measured from omega_c."""
    lo, hi = abs(params.J - params.Jp), params.J + params.Jp
    return _merge([(-hi, -lo), (lo, hi)])


def effective_bands(
    params: LatticeParams,
    rows=(3, 4, 5, 6),
    grid_size: int = 4001,
    convention: TableConvention = DEFAULT_CONVENTION,
) -> list[tuple[float, float]]:
    """Ranges of lam_r(k) over the zone for the chosen table rows, merged."""
    _, _, L = coupling_table(params, k_grid(grid_size), convention)
    return _merge([(float(L[r - 1].min()), float(L[r - 1].max())) for r in rows])


@dataclass
class BoundState:
    """Emitter-photon bound state.

    Attributes:
        energy: Energy (static) or quasi-energy (driven).
        times: Sample times over one period; a single 0 for the static case.
        C_e: Emitter amplitude per sample time.
        C_a: Sublattice A amplitudes, shape (len(times), len(cells)).
        C_b: Sublattice B amplitudes, same shape.
        cells: Cell labels; relative to the emitter cell for the static case.
        period: Drive period for driven states, else None.
    """

    energy: float
    times: np.ndarray
    C_e: np.ndarray
    C_a: np.ndarray
    C_b: np.ndarray
    cells: np.ndarray
    period: float | None = None

    @property
    def driven(self) -> bool:
        return self.period is not None


def _static_real_sigma(params, E, g, warn=True):
    table, key = _static_table(params)
    return float(pole_sum(table, [E + 0j], tol=1e-13, scale=g * g, cache_key=key, warn=warn)[0].real)


def _bz_mean(f, cells, tol=1e-12, start=2001, max_grid=2**20):
    # mean_k exp(ik j) f(k) for each j, refined by grid doubling
    prev = None
    M = start
    while True:
        ks = k_grid(M)
        vals = np.exp(1j * np.outer(cells, ks)) @ f(ks) / M
        if prev is not None and np.abs(vals - prev).max() < tol:
            return vals
        if M > max_grid:
            return vals
        prev = vals
        M *= 2


def static_bound_state(
    params: LatticeParams,
    Delta: float,
    g: float,
    half_width: int = 30,
    sublattice: Sublattice = Sublattice.A,
) -> BoundState:
    """Bound state of one emitter with the static (V = 0) bath.

    The energy solves E = Delta + Re Sigma(E) inside the central gap when
    |Delta| < J + J', or outside the bands otherwise. Amplitudes are

        C_a,j = g C_e mean_k E e^{ikj} / (E^2 - omega^2)
        C_b,j = g C_e mean_k conj(h_k) e^{ikj} / (E^2 - omega^2)

    for an emitter on A (roles of E and h swap for B), j measured from the
    emitter cell, and C_e fixed by normalization over the infinite chain.

    Raises:
        GapClosedError: No bound state in the bracketing gap.
    """
    sub = Sublattice(sublattice)
    lo, hi = abs(params.J - params.Jp), params.J + params.Jp
    shrink = 1e-6
    if abs(Delta) < hi:
        if lo <= shrink:
            raise GapClosedError("invariant undefined: static central gap is closed (J' = J)")
        bracket = (-lo + shrink, lo - shrink)
    elif Delta >= hi:
        bracket = (hi + shrink, Delta + g + 1.0)
    else:
        bracket = (Delta - g - 1.0, -hi - shrink)

    # iterates can sit next to band-edge divergences where the sum converges
    # slowly; the root itself lies well inside the gap
    def residual(E):
        return E - Delta - _static_real_sigma(params, E, g, warn=False)

    if g == 0:
        E = float(Delta)
        if not bracket[0] < E < bracket[1]:
            raise GapClosedError("uncoupled emitter energy lies in a band")
    else:
        f_lo, f_hi = residual(bracket[0]), residual(bracket[1])
        if f_lo * f_hi > 0:
            raise GapClosedError(f"no bound-state pole in gap {bracket} for Delta={Delta}")
        E = brentq(residual, *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def denom(ks):
        return E * E - static_dispersion(params, ks) ** 2

    norm_int = np.real(_bz_mean(lambda ks: (E * E + static_dispersion(params, ks) ** 2) / denom(ks) ** 2, [0]))[0]
    C_e = 1 / np.sqrt(1 + g * g * norm_int)
    cells = np.arange(-half_width, half_width + 1)
    same = _bz_mean(lambda ks: E / denom(ks), cells) * g * C_e
    if sub is Sublattice.A:
        other = _bz_mean(lambda ks: np.conj(static_hopping(params, ks)) / denom(ks), cells) * g * C_e
        C_a, C_b = same, other
    else:
        other = _bz_mean(lambda ks: static_hopping(params, ks) / denom(ks), cells) * g * C_e
        C_a, C_b = other, same
    return BoundState(
        energy=float(E),
        times=np.zeros(1),
        C_e=np.array([C_e], dtype=complex),
        C_a=C_a[None, :],
        C_b=C_b[None, :],
        cells=cells,
    )


def floquet_bound_state(
    params: LatticeParams,
    emitter: EmitterConfig,
    steps: int = DEFAULT_STEPS // 2,
    samples: int = 16,
) -> BoundState:
    """Bound state of one emitter with the driven bath from the Floquet propagator.

    The gap targeted is the 0-gap or the pi-gap, whichever center is closer
    to Delta. Among modes whose quasi-energy lies inside that bulk gap the
    one with the largest emitter weight is returned, sampled at
    t0 = i T / samples.

    Raises:
        GapClosedError: No Floquet mode lies inside the targeted gap.
    """
    if steps % samples:
        raise ValueError("steps must be a multiple of samples")
    T = params.period
    times = T * np.arange(samples) / samples
    modes = floquet_modes(driven_system(params, [emitter]), times, steps, center=0.0)
    w0, wpi = bulk_gaps(params.replace(omega_c=0.0), steps=steps)
    d0 = float(zone_distance(emitter.Delta, 0.0, params.Omega))
    dpi = float(zone_distance(emitter.Delta, params.Omega / 2, params.Omega))
    center, width = (0.0, w0) if d0 <= dpi else (params.Omega / 2, wpi)
    inside = [m for m in modes if float(zone_distance(m.quasienergy, center, params.Omega)) < width]
    if not inside:
        raise GapClosedError(f"no Floquet mode inside the gap around {center:g}")
    best = max(inside, key=lambda m: abs(m.state_at(0.0)[0]) ** 2)
    C_e = np.array([best.states[t][0] for t in best.states])
    bath = [split_sublattices(best.states[t][1:]) for t in best.states]
    return BoundState(
        energy=best.quasienergy,
        times=np.array(list(best.states)),
        C_e=C_e,
        C_a=np.array([b[0] for b in bath]),
        C_b=np.array([b[1] for b in bath]),
        cells=np.arange(1, params.N + 1),
        period=T,
    )


def time_averaged_bound_state(bs: BoundState, coherent: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Period average of the photonic profile.

    Args:
        bs: Bound state with uniformly spaced samples over one period.
        coherent: If False, average |C| (the default). If True, return
            |mean_t C(t) e^{i eps t}|, the zeroth harmonic of the periodic part.

    Returns:
        (profile_a, profile_b) over ``bs.cells``.
    """
    if bs.driven and len(bs.times) < 16:
        raise ValueError("time averaging needs at least 16 samples per period")
    if not coherent:
        return np.abs(bs.C_a).mean(axis=0), np.abs(bs.C_b).mean(axis=0)
    phase = np.exp(1j * bs.energy * bs.times)[:, None]
    return np.abs((bs.C_a * phase).mean(axis=0)), np.abs((bs.C_b * phase).mean(axis=0))


def rwa_gap_edges(params: LatticeParams, grid_size: int = 4001) -> dict[str, tuple[float, float]]:
    """Open 0-gap and pi-gap windows of the rotating-frame model.

    Returns:
        {"zero": (lo, hi), "pi": (lo, hi)}; a closed gap has lo >= hi.
    """
    lam = np.asarray(effective_bloch(params, k_grid(grid_size)).lambda_k)
    W = params.Omega
    half0 = W / 2 - lam.max()
    return {"zero": (-half0, half0), "pi": (W / 2 - lam.min(), W / 2 + lam.min())}
