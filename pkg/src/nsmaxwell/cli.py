"""Batch front end: simulate / picard / verify / split / norms.

Exit codes: 0 success, 1 numerical blowup (partial outputs flushed with a
truncation record), 2 configuration error.  Diagnostics go to standard
error; data only to files.  Identical config + seed produce bit-identical
outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .checks import (
    PINNED_BOUNDS,
    product_law_report,
    write_reports_csv,
    write_reports_jsonl,
)
from .config import ConfigError, RunConfig, parse_config
from .dyadic import NormSpec, build_partition, norm_hst
from .ensembles import FieldEnsembleSpec, gen_field
from .grid import Grid, SpectralField, lp_norm_physical
from .propagators import BlowupError
from .snapshots import read_snapshot, write_snapshot
from .system import (
    MhdState,
    picard_iterate,
    simulate,
    split_initial_data,
    taylor_green_velocity,
)

__all__ = ["main", "build_initial_state", "run_subcommand"]

DIAG_COLUMNS = ("time", "energy", "grad_v_sq", "j_sq")


def build_initial_state(cfg: RunConfig) -> MhdState:
    grid = Grid(cfg.d, cfg.n, cfg.box_length)
    if cfg.init == "taylor-green":
        v = taylor_green_velocity(grid, cfg.amplitude)
        E = SpectralField.zeros(grid)
        B = SpectralField.zeros(grid)
    elif cfg.init in ("random", "shell"):
        rng = np.random.default_rng(cfg.seed)
        shell = cfg.shell if cfg.init == "shell" else None
        part = build_partition(grid)
        v = gen_field(grid, rng, cfg.slope, shell, True, part)
        E = gen_field(grid, rng, cfg.slope, shell, False, part)
        B = gen_field(grid, rng, cfg.slope, shell, True, part)
        for f in (v, E, B):
            f.coeffs *= cfg.amplitude
    else:  # file: one snapshot per field, <prefix>_v/_E/_B.nsmw
        v, t0 = read_snapshot(cfg.init_file + "_v.nsmw")
        E, _ = read_snapshot(cfg.init_file + "_E.nsmw")
        B, _ = read_snapshot(cfg.init_file + "_B.nsmw")
        return MhdState(v, E, B, time=t0).prepared()
    return MhdState(v, E, B, time=0.0).prepared()


def _norm_column(state: MhdState, name: str, part) -> float:
    field = {"v": state.v, "E": state.E, "B": state.B}[name.split("_")[0]]
    kind = name.split("_", 1)[1]
    if kind == "l2":
        return lp_norm_physical(field, 2)
    if kind == "h1":
        return norm_hst(field, part, NormSpec.sobolev(1.0))
    return norm_hst(field, part, NormSpec.sobolev_log(0.0))  # l2log


def _write_diagnostics(path, rows: list, norms: tuple,
                       truncated: str | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(DIAG_COLUMNS + norms) + "\n")
        for row in rows:
            fh.write(",".join(repr(row[c]) for c in DIAG_COLUMNS + norms) + "\n")
        if truncated is not None:
            fh.write(f"# truncated: {truncated}\n")


def _diag_rows(traj, norms: tuple, part) -> list:
    rows = []
    for state, diag in zip(traj.states, traj.diagnostics):
        row = dict(diag)
        for name in norms:
            row[name] = _norm_column(state, name, part)
        rows.append(row)
    return rows


def _cmd_simulate(cfg: RunConfig) -> int:
    initial = build_initial_state(cfg)
    part = build_partition(initial.grid)
    try:
        traj = simulate(initial, cfg.T, cfg.dt, scheme=cfg.scheme)
    except BlowupError as exc:
        print(f"blowup at step {exc.step}", file=sys.stderr)
        # Partial outputs: rerun up to the last completed step.
        t_ok = exc.step * cfg.dt
        if exc.step > 0:
            traj = simulate(initial, t_ok, cfg.dt, scheme=cfg.scheme)
            rows = _diag_rows(traj, cfg.norms, part)
            _write_snapshots(cfg, traj)
        else:
            rows = []
        _write_diagnostics(
            os.path.join(cfg.out_dir, "diagnostics.csv"), rows, cfg.norms,
            truncated=f"blowup at step {exc.step} (t = {exc.step * cfg.dt!r})",
        )
        return 1
    rows = _diag_rows(traj, cfg.norms, part)
    _write_diagnostics(os.path.join(cfg.out_dir, "diagnostics.csv"),
                       rows, cfg.norms)
    _write_snapshots(cfg, traj)
    return 0


def _write_snapshots(cfg: RunConfig, traj) -> None:
    for idx in range(0, len(traj.states), cfg.stride):
        state = traj.states[idx]
        stem = os.path.join(cfg.out_dir, f"snap_{idx:06d}")
        for name, fld in (("v", state.v), ("E", state.E), ("B", state.B)):
            write_snapshot(f"{stem}_{name}.nsmw", fld, time=state.time)


def _cmd_picard(cfg: RunConfig) -> int:
    base = build_initial_state(cfg)
    path = os.path.join(cfg.out_dir, "picard.csv")
    rows = []
    for eps in cfg.epsilons:
        initial = base.scaled(eps)
        _, ratios = picard_iterate(initial, cfg.T, cfg.dt, cfg.picard_iters)
        worst = max(ratios) if ratios else 0.0
        rows.append((eps, worst))
    with open(path, "w") as fh:
        fh.write("epsilon,max_contraction_ratio\n")
        for eps, worst in rows:
            fh.write(f"{eps!r},{worst!r}\n")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    reports = []
    for est in cfg.estimates:
        d = 2 if est.endswith("2D") else 3
        n = cfg.n if d == cfg.d else (128 if d == 2 else 64)
        spec = FieldEnsembleSpec(seed=cfg.seed, count=cfg.count, d=d, n=n,
                                 slope=cfg.slope)
        reports.append(
            product_law_report(est, spec, T=cfg.T, bound=PINNED_BOUNDS[est])
        )
    write_reports_jsonl(reports, os.path.join(cfg.out_dir, "reports.jsonl"))
    write_reports_csv(reports, os.path.join(cfg.out_dir, "summary.csv"))
    return 0


def _cmd_split(cfg: RunConfig) -> int:
    initial = build_initial_state(cfg)
    regular, tail, Q, achieved = split_initial_data(initial, cfg.delta_target)
    payload = {
        "cutoff_shell": Q,
        "delta_target": cfg.delta_target,
        "achieved_tail_norm": achieved,
        "reached_target": achieved < cfg.delta_target,
        "regular_energy": float(
            lp_norm_physical(regular.v, 2) ** 2
            + lp_norm_physical(regular.E, 2) ** 2
            + lp_norm_physical(regular.B, 2) ** 2
        ),
        "tail_energy": float(
            lp_norm_physical(tail.v, 2) ** 2
            + lp_norm_physical(tail.E, 2) ** 2
            + lp_norm_physical(tail.B, 2) ** 2
        ),
    }
    with open(os.path.join(cfg.out_dir, "split.json"), "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return 0


def _cmd_norms(cfg: RunConfig) -> int:
    initial = build_initial_state(cfg)
    part = build_partition(initial.grid)
    norms = cfg.norms or ("v_l2", "E_l2", "B_l2", "v_h1", "E_l2log", "B_l2log")
    traj = simulate(initial, cfg.T, cfg.dt, scheme=cfg.scheme)
    rows = _diag_rows(traj, norms, part)
    _write_diagnostics(os.path.join(cfg.out_dir, "norms.csv"), rows, norms)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "picard": _cmd_picard,
    "verify": _cmd_verify,
    "split": _cmd_split,
    "norms": _cmd_norms,
}


def run_subcommand(cmd: str, cfg: RunConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return _COMMANDS[cmd](cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nsmw",
        description="Pseudo-spectral simulator and estimate verifier "
                    "for the viscous fluid / damped Maxwell system.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config", help="path to a key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out-dir", default=None)
    parser.add_argument("--stride", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        for message in exc.errors:
            print(f"config error: {message}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if args.stride is not None:
        if args.stride < 1:
            print("config error: --stride must be positive", file=sys.stderr)
            return 2
        cfg.stride = args.stride

    try:
        return run_subcommand(args.command, cfg)
    except BlowupError as exc:  # raised outside simulate's own handler
        print(f"blowup at step {exc.step}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
