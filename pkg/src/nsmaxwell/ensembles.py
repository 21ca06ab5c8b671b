"""Reproducible random spectral field ensembles for the estimate checkers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, SpectralField, leray_project
from .dyadic import DyadicPartition, block, build_partition

__all__ = ["FieldEnsembleSpec", "gen_field", "gen_ensemble"]


@dataclass(frozen=True)
class FieldEnsembleSpec:
    """Gaussian spectral fields with power-law amplitude |k|^{-beta}.

    ``shell`` optionally concentrates the field on one dyadic shell;
    ``divergence_free`` applies the Leray projection after sampling.
    Identical seeds produce bit-identical ensembles.
    """

    seed: int
    count: int
    d: int = 2
    n: int = 64
    box_length: float = 2.0 * np.pi
    slope: float = 0.0
    shell: int | None = None
    divergence_free: bool = False

    def grid(self) -> Grid:
        return Grid(self.d, self.n, self.box_length)


def gen_field(grid: Grid, rng: np.random.Generator, slope: float = 0.0,
              shell: int | None = None, divergence_free: bool = False,
              part: DyadicPartition | None = None) -> SpectralField:
    """One random field: real white noise shaped to |k|^{-slope} amplitudes."""
    white = rng.standard_normal((3,) + grid.shape)
    f = SpectralField.from_physical(grid, white)
    kmag = grid.k_magnitude()
    ksafe = np.where(kmag > 0, kmag, 1.0)
    envelope = np.where(kmag > 0, ksafe ** (-slope), 0.0)
    f = SpectralField(grid, f.coeffs * envelope)
    f.dealias()
    f.zero_nyquist()
    if shell is not None:
        if part is None:
            part = build_partition(grid)
        f = block(f, part, shell)
    if divergence_free:
        f = leray_project(f)
    return f


def gen_ensemble(spec: FieldEnsembleSpec, part: DyadicPartition | None = None) -> list:
    grid = spec.grid()
    rng = np.random.default_rng(spec.seed)
    if spec.shell is not None and part is None:
        part = build_partition(grid)
    return [
        gen_field(grid, rng, spec.slope, spec.shell, spec.divergence_free, part)
        for _ in range(spec.count)
    ]
