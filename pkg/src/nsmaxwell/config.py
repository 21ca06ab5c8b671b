"""Run configuration: flat key=value files, all errors reported at once.

Format: one ``key = value`` pair per line; ``#`` starts a comment; lists
are comma-separated.  Unknown keys are rejected.  Every parse or
validation problem is collected (with its line number) before failing,
so a bad file reports all of its defects in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

__all__ = ["RunConfig", "ConfigError", "parse_config"]

INIT_PRESETS = ("taylor-green", "random", "shell", "file")
SCHEMES = ("exp-euler", "exp-trapezoid")
ESTIMATE_IDS = (
    "est1-2D", "est4-2D", "est3-uB-2D",
    "est1-3D", "est4-3D", "est3-uB-3D",
)
NORM_COLUMNS = (
    "v_l2", "E_l2", "B_l2", "v_h1", "E_l2log", "B_l2log",
)


class ConfigError(ValueError):
    """Carries every collected problem, one per line of ``errors``."""

    def __init__(self, errors: list):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class RunConfig:
    d: int = 2
    n: int = 64
    box_length: float = 2.0 * math.pi
    init: str = "taylor-green"
    seed: int = 0
    slope: float = 0.0
    shell: int = 2
    amplitude: float = 1.0
    init_file: str = ""
    T: float = 1.0
    dt: float = 1e-2
    scheme: str = "exp-trapezoid"
    stride: int = 10
    out_dir: str = "out"
    count: int = 20
    picard_iters: int = 6
    delta_target: float = 0.1
    epsilons: tuple = (0.01, 0.1, 1.0)
    q_values: tuple = (2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12)
    estimates: tuple = ESTIMATE_IDS
    norms: tuple = ()


_LIST_ELEM = {"epsilons": float, "q_values": int, "estimates": str, "norms": str}


def _convert(name: str, kind, raw: str):
    if name in _LIST_ELEM:
        elem = _LIST_ELEM[name]
        items = [s.strip() for s in raw.split(",") if s.strip()]
        return tuple(elem(s) for s in items)
    if kind is int:
        v = int(raw)
        return v
    if kind is float:
        return float(raw)
    return raw


def _validate(cfg: RunConfig, where) -> list:
    errors = []

    def bad(key: str, message: str):
        errors.append(f"line {where(key)}: {key}: {message}")

    if cfg.d not in (2, 3):
        bad("d", f"dimension must be 2 or 3, got {cfg.d}")
    if cfg.n < 4 or (cfg.n & (cfg.n - 1)) != 0:
        bad("n", f"grid size must be a power of two >= 4, got {cfg.n}")
    for key in ("box_length", "amplitude", "T", "dt", "delta_target"):
        if getattr(cfg, key) <= 0:
            bad(key, f"must be positive, got {getattr(cfg, key)}")
    for key in ("stride", "count", "picard_iters"):
        if getattr(cfg, key) < 1:
            bad(key, f"must be a positive integer, got {getattr(cfg, key)}")
    if cfg.seed < 0:
        bad("seed", f"must be nonnegative, got {cfg.seed}")
    if 0 < cfg.T < cfg.dt:
        bad("dt", f"dt = {cfg.dt} exceeds T = {cfg.T}")
    if cfg.init not in INIT_PRESETS:
        bad("init", f"unknown preset {cfg.init!r}; choose from {INIT_PRESETS}")
    if cfg.init == "file" and not cfg.init_file:
        bad("init_file", "required when init = file")
    if cfg.scheme not in SCHEMES:
        bad("scheme", f"unknown scheme {cfg.scheme!r}; choose from {SCHEMES}")
    if any(e <= 0 for e in cfg.epsilons):
        bad("epsilons", f"all entries must be positive, got {cfg.epsilons}")
    if not cfg.epsilons:
        bad("epsilons", "must not be empty")
    if not cfg.q_values:
        bad("q_values", "must not be empty")
    for est in cfg.estimates:
        if est not in ESTIMATE_IDS:
            bad("estimates", f"unknown estimate id {est!r}")
    for norm in cfg.norms:
        if norm not in NORM_COLUMNS:
            bad("norms", f"unknown norm column {norm!r}; "
                         f"choose from {NORM_COLUMNS}")
    return errors


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing *all* problems."""
    kinds = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    values: dict = {}
    lines_of: dict = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {lineno}: expected 'key = value', got {body!r}")
            continue
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in kinds:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r} "
                          f"(first set on line {lines_of[key]})")
            continue
        try:
            values[key] = _convert(key, kinds[key], raw)
            lines_of[key] = lineno
        except ValueError:
            errors.append(f"line {lineno}: {key}: cannot parse {raw!r} "
                          f"as {kinds[key].__name__}")
    # Validate whatever did parse, so constraint violations are reported
    # alongside parse errors instead of only on a second attempt.
    cfg = RunConfig(**values)
    errors.extend(_validate(cfg, lambda k: lines_of.get(k, 0)))
    if errors:
        raise ConfigError(errors)
    return cfg
