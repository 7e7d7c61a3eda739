"""Command-line front end producing plot-ready tables for each figure.

Usage:
    fwqed <command> [--config PATH] [--set key=value ...] [--out PATH]
                    [--format csv|json] [--threads N]

Without --config the shipped default for the command is used. Exit codes:
0 success, 2 invalid configuration, 3 physics-domain failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import (
    COMMANDS,
    ConfigError,
    RunConfig,
    apply_override,
    default_config_dict,
    parse_override,
    shipped_configs,
)
from .dynamics import SingleExcitationState, evolve, exchange_trajectory, ring_size_for
from .effective import rwa_quasienergies, winding_0, winding_pi
from .errors import FwqedError, GapClosedError
from .floquet import edge_state_profile, find_edge_states, fold_quasienergy, quasienergies_bloch, quasienergy_spectrum_obc
from .interactions import (
    dipole_coupling,
    dipole_coupling_detuned,
    effective_two_emitter_dynamics,
)
from .lattice import Boundary, static_dispersion
from .spectral import effective_self_energy, floquet_bound_state, static_self_energy, time_averaged_bound_state

SCHEMA_VERSION = 1


def _threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("FWQED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("FWQED_THREADS", f"expected an integer, got {env!r}") from None
    return 1


def _fan_out(fn, items, threads):
    # results come back in input order regardless of completion order
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _sweep(knobs, name):
    return np.linspace(knobs[f"{name}_min"], knobs[f"{name}_max"], knobs[f"{name}_points"])


def _need_emitters(cfg, n):
    if len(cfg.emitters) < n:
        raise ConfigError("emitters", f"command {cfg.command} needs {n} emitter(s), got {len(cfg.emitters)}")


def cmd_bands(cfg, threads):
    p, kn = cfg.lattice, cfg.knobs
    ks = np.linspace(-np.pi, np.pi, kn["k_points"])
    plus, minus = quasienergies_bloch(p, ks, kn["steps"])
    rp, rm = rwa_quasienergies(p, ks, kn["m"])
    rwa = np.sort(np.stack([fold_quasienergy(rp, p.Omega, p.omega_c), fold_quasienergy(rm, p.Omega, p.omega_c)]), axis=0)
    cols = ["k", "omega_static", "eps_exact_minus", "eps_exact_plus", "eps_rwa_minus", "eps_rwa_plus"]
    rows = zip(ks, static_dispersion(p, ks), minus, plus, rwa[0], rwa[1])
    return cols, [list(r) for r in rows]


def cmd_quasienergy_sweep(cfg, threads):
    p = cfg.lattice.replace(boundary=Boundary.OBC)
    steps = cfg.knobs["steps"]

    def point(jp):
        q = p.replace(Jp=float(jp))
        modes = quasienergy_spectrum_obc(q, steps=steps)
        edges = find_edge_states(q, modes, steps=steps)
        zero = {id(m) for m in edges.zero}
        pi = {id(m) for m in edges.pi}
        return [[jp, i, m.quasienergy, m.ipr(), int(id(m) in zero), int(id(m) in pi)] for i, m in enumerate(modes)]

    blocks = _fan_out(point, _sweep(cfg.knobs, "Jp"), threads)
    return ["Jp", "index", "quasienergy", "ipr", "edge_zero", "edge_pi"], [r for b in blocks for r in b]


def _invariant(fn, params, grid):
    try:
        return fn(params, grid)
    except GapClosedError:
        return math.nan


def cmd_winding(cfg, threads):
    grid = cfg.knobs["grid_size"]

    def point(jp):
        q = cfg.lattice.replace(Jp=float(jp))
        return [jp, _invariant(winding_0, q, grid), _invariant(winding_pi, q, grid)]

    return ["Jp", "nu_0", "nu_pi"], _fan_out(point, _sweep(cfg.knobs, "Jp"), threads)


def cmd_edge_profile(cfg, threads):
    p = cfg.lattice.replace(boundary=Boundary.OBC)
    steps = cfg.knobs["steps"]
    times = [f * p.period for f in cfg.knobs["t0_fractions"]]
    modes = quasienergy_spectrum_obc(p, times, steps)
    edges = find_edge_states(p, modes, steps=steps)
    rows = []
    for gap, found in (("zero", edges.zero), ("pi", edges.pi)):
        for idx, mode in enumerate(found):
            for t0 in times:
                ca, cb = edge_state_profile(mode, t0)
                for j in range(p.N):
                    rows.append([gap, idx, mode.quasienergy, t0, j + 1, ca[j], cb[j]])
    return ["gap", "mode", "quasienergy", "t0", "cell", "abs_Ca", "abs_Cb"], rows


def cmd_selfenergy(cfg, threads):
    _need_emitters(cfg, 1)
    e = cfg.emitters[0]
    p = cfg.lattice
    etas = tuple(cfg.knobs["eta"])
    deltas = _sweep(cfg.knobs, "Delta")
    chunks = np.array_split(deltas, max(1, threads))

    def part(ds):
        st = static_self_energy(p, ds, e.g, e.sublattice, etas=etas)
        ef = effective_self_energy(p, ds, e.g, e.sublattice, etas=etas)
        return list(zip(ds, st.lamb_shift, st.decay, ef.lamb_shift, ef.decay))

    rows = [list(r) for c in _fan_out(part, [c for c in chunks if len(c)], threads) for r in c]
    return ["Delta", "lamb_static", "decay_static", "lamb_eff", "decay_eff"], rows


def cmd_decay(cfg, threads):
    _need_emitters(cfg, 1)
    e = cfg.emitters[0]
    p, kn = cfg.lattice, cfg.knobs
    init = SingleExcitationState.excited_emitter(1, p.N)
    traj = evolve(p, [e], init, kn["t_end"], kn["samples"], kn["steps"])
    gamma = effective_self_energy(p, e.Delta, e.g, e.sublattice).decay
    rows = [[t, pop, math.exp(-gamma * t)] for t, pop in zip(traj.times, traj.populations[:, 0])]
    return ["t", "pop", "markov"], rows


def cmd_bound_state(cfg, threads):
    _need_emitters(cfg, 1)
    bs = floquet_bound_state(cfg.lattice, cfg.emitters[0], cfg.knobs["steps"], cfg.knobs["samples"])
    rows = []
    for i, t0 in enumerate(bs.times):
        for j, cell in enumerate(bs.cells):
            rows.append(["snapshot", t0, cell, abs(bs.C_a[i, j]), abs(bs.C_b[i, j])])
    avg_a, avg_b = time_averaged_bound_state(bs)
    for j, cell in enumerate(bs.cells):
        rows.append(["average", math.nan, cell, avg_a[j], avg_b[j]])
    return ["kind", "t0", "cell", "abs_Ca", "abs_Cb"], rows


def exchange_setup(params, e1, e2, lamb_correction=False):
    """Reduced-model ingredients for a two-emitter exchange run.

    Returns:
        (model, G, actual emitters, lamb shifts). Lamb shifts and G are
        evaluated at the configured detunings. With ``lamb_correction`` the
        first emitter is moved to Delta_1 - Re Sigma_eff(Delta_1) so that its
        shifted frequency sits exactly Omega above emitter 2.
    """
    j12 = e1.cell - e2.cell
    if math.isclose(e1.Delta, e2.Delta, abs_tol=1e-9):
        model = "equal"
        G = dipole_coupling(params, e1.Delta, e1.sublattice, e2.sublattice, j12, 1.0).G * e1.g * e2.g
    elif math.isclose(abs(e1.Delta - e2.Delta), params.Omega, abs_tol=1e-9):
        model = "detuned"
        G = dipole_coupling_detuned(params, e1.Delta, e2.Delta, e1.sublattice, e2.sublattice, j12, 1.0) * e1.g * e2.g
    else:
        raise ConfigError("emitters", "exchange needs equal detunings or detunings differing by Omega")
    shifts = tuple(float(effective_self_energy(params, e.Delta, e.g, e.sublattice).lamb_shift) for e in (e1, e2))
    if lamb_correction:
        e1 = type(e1)(e1.Delta - shifts[0], e1.cell, e1.sublattice, e1.g)
    return model, G, (e1, e2), shifts


def cmd_exchange(cfg, threads):
    _need_emitters(cfg, 2)
    p, kn = cfg.lattice, cfg.knobs
    model, G, (e1, e2), shifts = exchange_setup(p, cfg.emitters[0], cfg.emitters[1], kn["lamb_correction"])
    t_end = kn["t_end"] if kn["t_end"] is not None else kn["periods"] * math.pi / abs(G)
    with warnings.catch_warnings():
        # gap-mediated exchange is insensitive to ring revivals
        warnings.simplefilter("ignore", RuntimeWarning)
        exact = exchange_trajectory(p, e1, e2, t_end, kn["samples"], kn["steps"])
        static = None
        if kn["static_control"]:
            # undriven bands are gapless at these energies; a ring long enough
            # that no photon returns within t_end stands in for the continuum
            ctrl = p.replace(V=0.0)
            ctrl = ctrl.replace(N=ring_size_for(ctrl, t_end))
            static = exchange_trajectory(ctrl, e1, e2, t_end, kn["samples"], kn["steps"])
    eff1, eff2 = effective_two_emitter_dynamics(model, G, shifts, exact.times, (e1.Delta, e2.Delta), p.Omega)
    cols = ["t", "pop1", "pop2", "pop1_eff", "pop2_eff"]
    data = [exact.times, exact.pop1, exact.pop2, eff1, eff2]
    if static is not None:
        cols += ["pop1_static", "pop2_static"]
        data += [static.pop1, static.pop2]
    return cols, [list(r) for r in zip(*data)]


def cmd_coupling_profile(cfg, threads):
    p, kn = cfg.lattice, cfg.knobs
    _need_emitters(cfg, 1)
    e = cfg.emitters[0]
    distances = list(range(kn["j_min"], kn["j_max"] + 1))

    def point(j):
        aa = dipole_coupling(p, kn["Delta"], "A", "A", j, e.g).G
        ab = dipole_coupling(p, kn["Delta"], "A", "B", j, e.g).G
        return [j, aa.real, aa.imag, ab.real, ab.imag]

    rows = _fan_out(point, distances, threads)
    cols = ["distance", "re_G_AA", "im_G_AA", "re_G_AB", "im_G_AB"]
    if kn["bound_state"]:
        emitter = type(e)(kn["Delta"], e.cell, "A", e.g)
        bs = floquet_bound_state(p, emitter, kn["steps"], kn["samples"])
        avg_a, avg_b = time_averaged_bound_state(bs)
        cols += ["bs_a", "bs_b"]
        for row, j in zip(rows, distances):
            # G_12(j_12) pairs emitter 1 with a partner at cell j_1 - j_12
            cell = e.cell - j
            inside = 1 <= cell <= p.N
            row += [avg_a[cell - 1] if inside else math.nan, avg_b[cell - 1] if inside else math.nan]
    return cols, rows


HANDLERS = {
    "bands": cmd_bands,
    "quasienergy-sweep": cmd_quasienergy_sweep,
    "winding": cmd_winding,
    "edge-profile": cmd_edge_profile,
    "selfenergy": cmd_selfenergy,
    "decay": cmd_decay,
    "bound-state": cmd_bound_state,
    "exchange": cmd_exchange,
    "coupling-profile": cmd_coupling_profile,
}


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _json_value(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return None if math.isnan(x) else x


def render(cfg: RunConfig, columns, rows) -> str:
    """Serialize a result table; identical inputs give identical text."""
    config_json = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    if cfg.format == "json":
        doc = {
            "schema": f"fwqed/{cfg.command}/v{SCHEMA_VERSION}",
            "version": __version__,
            "columns": list(columns),
            "config": cfg.to_dict(),
            "rows": [[_json_value(v) for v in r] for r in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema fwqed/{cfg.command}/v{SCHEMA_VERSION} columns={','.join(columns)}\n")
    buf.write(f"# config {config_json}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def run(cfg: RunConfig, threads: int = 1) -> str:
    """Execute a validated config and return the serialized table."""
    columns, rows = HANDLERS[cfg.command](cfg, threads)
    return render(cfg, columns, rows)


def load_config(command: str, path: str | None, overrides: list[str]) -> RunConfig:
    if path is None:
        data = default_config_dict(command)
    elif not os.path.exists(path) and path in shipped_configs():
        data = default_config_dict(path)
    else:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
        except OSError as exc:
            raise ConfigError(path, exc.strerror or str(exc)) from None
        if isinstance(data, dict):
            data.setdefault("command", command)
    for text in overrides:
        key, value = parse_override(text)
        apply_override(data, key, value)
    cfg = RunConfig.from_dict(data)
    if cfg.command != command:
        raise ConfigError("command", f"config is for {cfg.command!r}, not {command!r}")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwqed", description="Driven SSH waveguide-QED simulations")
    parser.add_argument("--version", action="version", version=f"fwqed {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config path or shipped config name such as exchange-fig9b")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. lattice.Jp=0.6 or emitters.0.Delta=1.25")
    parser.add_argument("--out", help="output path (default: config output, else stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--threads", type=int, help="worker threads for sweeps (fallback: FWQED_THREADS)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.overrides)
        if args.format:
            cfg.format = args.format
        if args.out:
            cfg.output = args.out
        threads = _threads(args.threads)
    except ConfigError as exc:
        print(f"fwqed: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        text = run(cfg, threads)
    except ConfigError as exc:
        print(f"fwqed: invalid config: {exc}", file=sys.stderr)
        return 2
    except FwqedError as exc:
        print(f"fwqed: {exc}", file=sys.stderr)
        return 3
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
