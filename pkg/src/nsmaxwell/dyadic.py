"""Dyadic frequency localization, paraproducts, and the hybrid norms.

The partition is built from a smooth radial bump phi supported in
[3/4, 8/3] (exp(-1/x) transition), rescaled to the physical wavevectors
k = (2 pi / L) m, so that |k| = 1 separates "low" (q <= 0) from "high"
(q > 0) shells.  Boundary shells absorb the truncated telescoping tails so
that the partition of unity is exact on every resolved nonzero mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, SpectralField

__all__ = [
    "DyadicPartition",
    "DyadicBlocks",
    "NormSpec",
    "smooth_step",
    "chi_profile",
    "phi_profile",
    "build_partition",
    "block",
    "low_pass",
    "bony_decompose",
    "norm_hst",
    "norm_besov",
    "ShellSeries",
    "shell_series",
    "spacetime_norm_from_series",
    "spacetime_norm",
]

# Support edges of the radial profile before dyadic scaling.
PHI_LO = 0.75
PHI_HI = 8.0 / 3.0
CHI_LO = 0.75
CHI_HI = 4.0 / 3.0


def smooth_step(t):
    """C-infinity step: 0 for t<=0, 1 for t>=1, exp(-1/t) transition."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g = np.where(1 - t > 0, np.exp(-1.0 / np.maximum(1 - t, 1e-300)), 0.0)
    return f / (f + g)


def chi_profile(r):
    """Smooth cutoff: 1 for r <= 3/4, 0 for r >= 4/3."""
    r = np.asarray(r, dtype=np.float64)
    return 1.0 - smooth_step((r - CHI_LO) / (CHI_HI - CHI_LO))


def phi_profile(r):
    """Radial bump phi(r) = chi(r/2) - chi(r), supported in [3/4, 8/3]."""
    r = np.asarray(r, dtype=np.float64)
    return chi_profile(r / 2.0) - chi_profile(r)


@dataclass
class DyadicPartition:
    """Tabulated shell weights w_q(k) with exact partition of unity.

    Interior shells carry phi(2^-q |k|); the boundary shells q_min and
    q_max absorb the telescoping tails (sum_{j<=q_min} and sum_{j>=q_max}),
    so sum_q w_q(k) = 1 exactly for every nonzero resolved k.
    """

    grid: Grid
    q_min: int
    q_max: int
    weights: dict = field(repr=False)

    def shells(self) -> range:
        return range(self.q_min, self.q_max + 1)

    def weight(self, q: int) -> np.ndarray:
        if q < self.q_min or q > self.q_max:
            raise ValueError(f"shell index {q} outside [{self.q_min}, {self.q_max}]")
        return self.weights[q]

    def lowpass_weight(self, q: int) -> np.ndarray:
        """Multiplier of S_q = sum_{j<q} Delta_j plus the k=0 mode."""
        w = np.zeros(self.grid.shape)
        zero = (0,) * self.grid.d
        w[zero] = 1.0
        for j in range(self.q_min, min(q, self.q_max + 1)):
            w += self.weights[j]
        return w

    def partition_sum(self) -> np.ndarray:
        total = np.zeros(self.grid.shape)
        for q in self.shells():
            total += self.weights[q]
        return total


def build_partition(grid: Grid) -> DyadicPartition:
    kmag = grid.k_magnitude()
    resolved = ~grid.nyquist_mask()
    resolved[(0,) * grid.d] = False
    if not np.any(resolved):
        raise ValueError("grid has no resolved nonzero modes")
    k_lo = float(np.min(kmag[resolved]))
    k_hi = float(np.max(kmag[resolved]))

    # Smallest shell reaching k_lo, largest shell starting below k_hi.
    q_min = math.ceil(math.log2(k_lo / PHI_HI))
    q_max = math.floor(math.log2(k_hi / PHI_LO))
    if q_max < q_min + 1:
        raise ValueError("grid too small to host two disjoint dyadic shells")

    weights = {}
    for q in range(q_min, q_max + 1):
        if q == q_min:
            w = chi_profile(kmag / 2.0**(q + 1))
        elif q == q_max:
            w = 1.0 - chi_profile(kmag / 2.0**q)
        else:
            w = phi_profile(kmag / 2.0**q)
        w = np.where(resolved, w, 0.0)
        weights[q] = w
    return DyadicPartition(grid=grid, q_min=q_min, q_max=q_max, weights=weights)


def block(u: SpectralField, part: DyadicPartition, q: int) -> SpectralField:
    """Delta_q u: per-mode multiply by the tabulated shell weight."""
    return SpectralField(u.grid, u.coeffs * part.weight(q))


def low_pass(u: SpectralField, part: DyadicPartition, q: int) -> SpectralField:
    """S_q u: sum of blocks below q plus the mean mode."""
    return SpectralField(u.grid, u.coeffs * part.lowpass_weight(q))


@dataclass
class DyadicBlocks:
    partition: DyadicPartition
    blocks: dict

    @classmethod
    def decompose(cls, u: SpectralField, part: DyadicPartition) -> "DyadicBlocks":
        return cls(part, {q: block(u, part, q) for q in part.shells()})

    def reconstruct(self) -> SpectralField:
        out = SpectralField.zeros(self.partition.grid)
        for f in self.blocks.values():
            out = out + f
        return out


def _product(a: SpectralField, b: SpectralField, combiner: str) -> SpectralField:
    from .grid import pointwise_product

    return pointwise_product(a, b, combiner)


def bony_decompose(u: SpectralField, v: SpectralField, part: DyadicPartition,
                   combiner: str = "scalar"):
    """Bony split of the (dealiased) product u v into (T_u v, T_v u, R).

    T_u v = sum_q S_{q-1} u Delta_q v and R = sum_q Delta_q u
    (Delta_{q-1} + Delta_q + Delta_{q+1}) v, with shell indices clipped to
    the resolved range.  Both paraproducts keep the argument order u-then-v
    (the second is sum_q Delta_q u S_{q-1} v), so asymmetric combiners such
    as the cross product reconstruct exactly.  The mean-mean product is folded into R's k=0 mode
    so the three parts reconstruct the dealiased product exactly.
    """
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    grid = u.grid
    t_uv = SpectralField.zeros(grid)
    t_vu = SpectralField.zeros(grid)
    r_uv = SpectralField.zeros(grid)
    for q in part.shells():
        dq_v = block(v, part, q)
        dq_u = block(u, part, q)
        t_uv = t_uv + _product(low_pass(u, part, q - 1), dq_v, combiner)
        t_vu = t_vu + _product(dq_u, low_pass(v, part, q - 1), combiner)
        tilde = SpectralField.zeros(grid)
        for j in (q - 1, q, q + 1):
            if part.q_min <= j <= part.q_max:
                tilde = tilde + block(v, part, j)
        r_uv = r_uv + _product(dq_u, tilde, combiner)
    # Mean-mean cross term is covered by none of the three sums.
    mu, mv = u.mean(), v.mean()
    if combiner == "scalar":
        mm = mu * mv
    elif combiner == "cross":
        mm = np.cross(mu, mv)
    else:
        raise ValueError(f"combiner {combiner!r} not supported in bony_decompose")
    zero = (0,) * grid.d
    r_uv.coeffs[(slice(None),) + zero] += mm
    return t_uv, t_vu, r_uv


@dataclass(frozen=True)
class NormSpec:
    """Parameters selecting one of the hybrid / Besov / space-time norms.

    s: low-frequency regularity (shells q <= 0)
    t: high-frequency regularity (shells q > 0)
    alpha: logarithmic weight power on high shells
    time_exponent: r' in {1, 2, inf} for space-time norms
    tilde: per-shell time norm before the shell sum (Chemin-Lerner)
    """

    s: float
    t: float
    alpha: float = 0.0
    time_exponent: float = np.inf
    tilde: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    @classmethod
    def sobolev(cls, s: float, **kw) -> "NormSpec":
        """Shorthand H^s = H^{s,s}_0."""
        return cls(s=s, t=s, alpha=0.0, **kw)

    @classmethod
    def sobolev_log(cls, s: float, **kw) -> "NormSpec":
        """Shorthand H^s_log = H^{s,s}_1."""
        return cls(s=s, t=s, alpha=1.0, **kw)

    def shell_weight_sq(self, q: int) -> float:
        """Squared weight of shell q in the two-sum norm formula."""
        if q <= 0:
            return 4.0 ** (q * self.s)
        return float(q) ** self.alpha * 4.0 ** (q * self.t)


def _block_l2(u: SpectralField, part: DyadicPartition) -> np.ndarray:
    """Array of ||Delta_q u||_{L^2} over the shell range."""
    vol = u.grid.box_length**u.grid.d
    power = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    out = np.empty(part.q_max - part.q_min + 1)
    for i, q in enumerate(part.shells()):
        out[i] = math.sqrt(vol * float(np.sum(part.weight(q) ** 2 * power)))
    return out


def norm_hst(u: SpectralField, part: DyadicPartition, spec: NormSpec) -> float:
    """The hybrid Sobolev norm: sqrt of
    sum_{q<=0} 2^{2qs} ||Delta_q u||^2 + sum_{q>0} q^alpha 2^{2qt} ||Delta_q u||^2,
    with the k=0 mode excluded (homogeneous norm)."""
    b = _block_l2(u, part)
    total = 0.0
    for i, q in enumerate(part.shells()):
        total += spec.shell_weight_sq(q) * b[i] ** 2
    return math.sqrt(total)


def norm_besov(u: SpectralField, part: DyadicPartition, s: float, p, r) -> float:
    """Homogeneous Besov norm: l^r over shells of 2^{qs} ||Delta_q u||_{L^p}."""
    from .grid import lp_norm_physical

    if p == 2:
        b = _block_l2(u, part)
    elif p == np.inf or p == "inf":
        b = np.array(
            [lp_norm_physical(block(u, part, q), np.inf) for q in part.shells()]
        )
    else:
        raise ValueError(f"unsupported Lebesgue exponent {p!r}")
    qs = np.array(list(part.shells()), dtype=float)
    terms = 2.0 ** (qs * s) * b
    if r == 1:
        return float(np.sum(terms))
    if r == 2:
        return float(np.sqrt(np.sum(terms**2)))
    if r == np.inf or r == "inf":
        return float(np.max(terms)) if terms.size else 0.0
    raise ValueError(f"unsupported summability exponent {r!r}")


# ---------------------------------------------------------------------------
# Space-time norms over shell-norm time series.


@dataclass
class ShellSeries:
    """Per-shell L^2 block norms sampled on a uniform time grid.

    ``block_l2`` has shape (n_times, n_shells); ``linf`` optionally carries
    the physical sup-norm time series for mixed L^r_T L^infty norms.
    """

    times: np.ndarray
    q_values: np.ndarray
    block_l2: np.ndarray
    linf: np.ndarray | None = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def shell_series(fields, times, part: DyadicPartition, with_linf: bool = False) -> ShellSeries:
    """Reduce a sequence of SpectralFields to per-shell norm time series."""
    from .grid import lp_norm_physical

    times = np.asarray(times, dtype=float)
    if len(fields) != len(times) or len(times) < 2:
        raise ValueError("need >= 2 samples with matching times")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-10, atol=1e-14):
        raise ValueError("time grid must be uniform")
    rows = [_block_l2(f, part) for f in fields]
    linf = None
    if with_linf:
        linf = np.array([lp_norm_physical(f, np.inf) for f in fields])
    return ShellSeries(
        times=times,
        q_values=np.array(list(part.shells())),
        block_l2=np.array(rows),
        linf=linf,
    )


def time_lebesgue(values: np.ndarray, times: np.ndarray, r) -> float:
    """L^r norm in time by trapezoidal quadrature (max for r = inf)."""
    values = np.asarray(values, dtype=float)
    if r == np.inf or r == "inf":
        return float(np.max(values))
    if r == 1:
        return float(np.trapezoid(values, times))
    if r == 2:
        return float(np.sqrt(np.trapezoid(values**2, times)))
    raise ValueError(f"unsupported time exponent {r!r}")


def spacetime_norm_from_series(series: ShellSeries, spec: NormSpec) -> float:
    """Space-time norm from a shell series.

    tilde=True: time norm per shell, then the weighted l^2 shell sum.
    tilde=False: spatial norm per sample, then the time norm.
    """
    r = spec.time_exponent
    if spec.tilde:
        total = 0.0
        for i, q in enumerate(series.q_values):
            bq = time_lebesgue(series.block_l2[:, i], series.times, r)
            total += spec.shell_weight_sq(int(q)) * bq**2
        return math.sqrt(total)
    w = np.array([spec.shell_weight_sq(int(q)) for q in series.q_values])
    spatial = np.sqrt(series.block_l2**2 @ w)
    return time_lebesgue(spatial, series.times, r)


def spacetime_norm(traj, field_selector, part: DyadicPartition, spec: NormSpec) -> float:
    """Space-time norm of one field component of a trajectory.

    ``field_selector`` maps a state to a SpectralField (e.g. operator
    attrgetter('v')).
    """
    fields = [field_selector(state) for state in traj.states]
    series = shell_series(fields, traj.times, part)
    return spacetime_norm_from_series(series, spec)
