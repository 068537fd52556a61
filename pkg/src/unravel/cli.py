"""Command-line front end.

Subcommands: trajectories, ensemble, check, solve-me, export. Options can
come from a JSON config file (--config); explicit flags win. Exit codes:
0 success, 1 usage/config error, 2 positivity violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from ._backend import backend_name
from .ensemble import compare_to_oracle, run_ensemble, write_ensemble_csv
from .errors import PositivityViolation, UnravelError
from .generators import (
    DiagonalGenerator,
    as_diagonal,
    load_generator_file,
    save_generator_file,
)
from .master_equation import solve_me, write_me_csv
from .models import get_preset, preset_names
from .positivity import check_cp_via_ancilla, check_kossakowski
from .sde import SdeConfig, run_trajectory

_CONFIG_KEYS = (
    "model", "generator_file", "state", "dt", "t_final", "traj", "seed", "mode",
    "workers", "oracle", "out", "sample_stride", "time_unit_scale", "rates", "samples",
    "positivity_tol",
)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run-config file; explicit flags override it")
    common.add_argument("--model", help=f"preset name ({', '.join(preset_names())})")
    common.add_argument("--generator-file", dest="generator_file",
                        help="generator JSON file (see docs/generator.schema.json)")
    common.add_argument("--state", help="initial state: 1-based basis index, '+', '-', "
                        "or JSON amplitude list [[re,im],...]")
    common.add_argument("--rates", help="comma-separated rate override for diagonal generators")
    common.add_argument("--dt", type=float, help="integration step (1/cm^-1)")
    common.add_argument("--t-final", dest="t_final", type=float, help="final time (1/cm^-1)")
    common.add_argument("--traj", type=int, help="number of trajectories")
    common.add_argument("--seed", type=int, help="base RNG seed")
    common.add_argument("--mode", choices=["gtro", "standard_qsd", "auto"],
                        help="unraveling mode (auto: standard_qsd iff all rates >= 0)")
    common.add_argument("--workers", type=int,
                        help="worker processes (default: $UNRAVEL_WORKERS or 1)")
    common.add_argument("--oracle", action="store_true", default=None,
                        help="co-run the master-equation oracle and report z-scores")
    common.add_argument("--out", help="output file path")
    common.add_argument("--sample-stride", dest="sample_stride", type=int,
                        help="record every k-th step (default 10)")
    common.add_argument("--time-unit-scale", dest="time_unit_scale", type=float,
                        help="scalar applied to the time axis at output (default 1)")
    common.add_argument("--samples", type=int, help="sample count for positivity checks")
    common.add_argument("--positivity-tol", dest="positivity_tol", type=float,
                        help="abort threshold factor for rate-operator eigenvalues "
                        "(default 1e-10, or the preset's documented tolerance)")

    p = argparse.ArgumentParser(prog="unravel",
                                description="Stochastic unraveling of positive quantum dynamics")
    p.add_argument("--version", action="version", version=f"unravel {__version__} ({backend_name()} backend)")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("trajectories", parents=[common],
                   help="integrate single trajectories and dump them as JSON lines")
    sub.add_parser("ensemble", parents=[common],
                   help="run a trajectory ensemble and write mean/stderr CSV")
    sub.add_parser("check", parents=[common],
                   help="positivity / complete-positivity diagnostics")
    sub.add_parser("solve-me", parents=[common],
                   help="deterministic master-equation solution as CSV")
    sub.add_parser("export", parents=[common],
                   help="write a model preset as a generator JSON file")
    return p


_DEFAULTS = {
    "dt": 1e-3, "t_final": 1.0, "traj": 1, "seed": 0, "mode": "auto",
    "oracle": False, "sample_stride": 10, "time_unit_scale": 1.0, "samples": 1000,
}


def _resolve_options(args: argparse.Namespace) -> dict:
    opts = dict(_DEFAULTS)
    opts.update({k: None for k in _CONFIG_KEYS if k not in opts})
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise UnravelError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise UnravelError(f"config file is not valid JSON: {exc}")
        unknown = set(doc) - set(_CONFIG_KEYS)
        if unknown:
            raise UnravelError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update(doc)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if opts.get("workers") is None:
        opts["workers"] = int(os.environ.get("UNRAVEL_WORKERS", "1"))
    return opts


def _load_generator(opts: dict):
    if bool(opts.get("model")) == bool(opts.get("generator_file")):
        raise UnravelError("exactly one of --model / --generator-file is required")
    if opts.get("model"):
        preset = get_preset(opts["model"])
        gen, default_state = preset.generator, preset.default_initial_state
        if opts.get("positivity_tol") is None:
            opts["positivity_tol"] = preset.positivity_tol
    else:
        gen, default_state = load_generator_file(opts["generator_file"]), None
    if opts.get("positivity_tol") is None:
        opts["positivity_tol"] = 1e-10
    diag = as_diagonal(gen)
    if opts.get("rates"):
        rates = np.array([float(x) for x in str(opts["rates"]).split(",")])
        if len(rates) != diag.n_channels:
            raise UnravelError(
                f"--rates has {len(rates)} entries, generator has {diag.n_channels} channels")
        diag = DiagonalGenerator(dim=diag.dim, hamiltonian=diag.hamiltonian,
                                 rates=rates, lindblad_ops=diag.lindblad_ops)
    return diag, default_state


def _parse_state(spec, n: int, default_state) -> np.ndarray:
    if spec is None:
        if default_state is None:
            raise UnravelError("--state is required with --generator-file")
        return np.asarray(default_state, dtype=complex)
    if isinstance(spec, str) and spec.strip() in ("+", "-"):
        sign = 1.0 if spec.strip() == "+" else -1.0
        psi = np.zeros(n, dtype=complex)
        psi[0], psi[1] = 1.0, sign
        return psi / np.sqrt(2)
    try:
        idx = int(spec)
    except (TypeError, ValueError):
        idx = None
    if idx is not None:
        if not 1 <= idx <= n:
            raise UnravelError(f"basis index {idx} outside 1..{n}")
        psi = np.zeros(n, dtype=complex)
        psi[idx - 1] = 1.0
        return psi
    try:
        pairs = json.loads(spec) if isinstance(spec, str) else spec
        arr = np.asarray(pairs, dtype=float)
        if arr.shape != (n, 2):
            raise ValueError
    except (ValueError, TypeError):
        raise UnravelError(f"cannot parse state {spec!r}")
    psi = arr[:, 0] + 1j * arr[:, 1]
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise UnravelError("state amplitudes are all zero")
    return psi / nrm


def _pick_mode(mode: str, gen: DiagonalGenerator) -> str:
    if mode != "auto":
        return mode
    if len(gen.rates) == 0 or gen.rates.min() >= 0:
        return "standard_qsd"
    return "gtro"


def _require_out(opts):
    if not opts.get("out"):
        raise UnravelError("--out is required for this command")
    return opts["out"]


def cmd_trajectories(opts: dict) -> int:
    gen, default_state = _load_generator(opts)
    psi0 = _parse_state(opts.get("state"), gen.dim, default_state)
    mode = _pick_mode(opts["mode"], gen)
    cfg = SdeConfig(dt=opts["dt"], t_final=opts["t_final"], mode=mode, seed=opts["seed"],
                    positivity_tol=opts["positivity_tol"])
    out = _require_out(opts)
    scale = opts["time_unit_scale"]
    aborts = []
    with open(out, "w") as fh:
        for i in range(opts["traj"]):
            traj = run_trajectory(gen, psi0, cfg, sample_stride=opts["sample_stride"],
                                  traj_index=i)
            for t, psi in zip(traj.times, traj.states):
                rec = {
                    "traj_id": i,
                    "t": t * scale,
                    "amplitudes": [[float(z.real), float(z.imag)] for z in psi],
                }
                fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            if traj.aborted:
                aborts.append(traj)
    if aborts:
        worst = aborts[0]
        print(
            f"positivity violation: min eigenvalue {worst.abort_min_eigenvalue:.6g} "
            f"at t={worst.aborted_at:g}; witness state "
            f"{[[float(z.real), float(z.imag)] for z in worst.abort_state]}",
            file=sys.stderr,
        )
        return 2
    return 0


def cmd_ensemble(opts: dict) -> int:
    gen, default_state = _load_generator(opts)
    psi0 = _parse_state(opts.get("state"), gen.dim, default_state)
    mode = _pick_mode(opts["mode"], gen)
    cfg = SdeConfig(dt=opts["dt"], t_final=opts["t_final"], mode=mode, seed=opts["seed"],
                    positivity_tol=opts["positivity_tol"])
    out = _require_out(opts)
    stats = run_ensemble(gen, psi0, cfg, n_traj=opts["traj"], workers=opts["workers"],
                         sample_stride=opts["sample_stride"])
    write_ensemble_csv(out, stats, time_unit_scale=opts["time_unit_scale"])
    print(f"wrote {out}: {stats.n_traj} trajectories ({stats.n_aborted} aborted), "
          f"{len(stats.times)} sample times, backend={backend_name()}")
    if opts["oracle"]:
        if stats.n_traj < 2:
            print("oracle comparison skipped: needs n_traj >= 2 for stderr")
            return 0
        rho0 = np.outer(psi0, psi0.conj())
        times, rhos = solve_me(gen, rho0, dt=cfg.dt, t_final=cfg.t_final,
                               sample_stride=opts["sample_stride"])
        report = compare_to_oracle(stats, times, rhos)
        print(report.summary())
    return 0


def cmd_check(opts: dict) -> int:
    gen, _ = _load_generator(opts)
    verdict = check_kossakowski(gen, n_samples=opts["samples"], rng_seed=opts["seed"])
    print("[rate-operator scan]")
    print(verdict.summary())
    violated = verdict.kind == "violation_found"
    if gen.dim <= 11:
        anc = check_cp_via_ancilla(gen, n_samples=opts["samples"], rng_seed=opts["seed"])
        print("[ancilla extension]")
        print(anc.summary())
        violated = violated or anc.kind == "violation_found"
    return 2 if violated else 0


def cmd_solve_me(opts: dict) -> int:
    gen, default_state = _load_generator(opts)
    psi0 = _parse_state(opts.get("state"), gen.dim, default_state)
    out = _require_out(opts)
    rho0 = np.outer(psi0, psi0.conj())
    times, rhos = solve_me(gen, rho0, dt=opts["dt"], t_final=opts["t_final"],
                           sample_stride=opts["sample_stride"])
    write_me_csv(out, times, rhos, time_unit_scale=opts["time_unit_scale"])
    print(f"wrote {out}: {len(times)} sample times")
    return 0


def cmd_export(opts: dict) -> int:
    if not opts.get("model"):
        raise UnravelError("export needs --model")
    preset = get_preset(opts["model"])
    out = _require_out(opts)
    save_generator_file(preset.generator, out)
    print(f"wrote {out}")
    return 0


_COMMANDS = {
    "trajectories": cmd_trajectories,
    "ensemble": cmd_ensemble,
    "check": cmd_check,
    "solve-me": cmd_solve_me,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        opts = _resolve_options(args)
        return _COMMANDS[args.command](opts)
    except PositivityViolation as exc:
        print(f"positivity violation: {exc}", file=sys.stderr)
        return 2
    except UnravelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
