"""Numerical checkers for the norm inequalities the solver relies on.

Each checker measures both sides of one inequality on concrete data and
reports the ratio LHS/RHS; implicit constants are measured, never assumed.
Time-dependent inputs for the product-law and decay checkers are
*separable* trajectories u(t, x) = e^{-rate t} U(x), so every space-time
norm factorizes into (spatial norm) x (closed-form envelope integral) and
arbitrarily long windows cost nothing.  The decaying envelope also makes
all time integrals converge within t = O(1), so a window sweep
T in {1, 10, 100} probes the T-independence of the constants rather than
the convergence of the integrals.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Grid,
    SpectralField,
    gradient_component,
    leray_project,
    lp_norm_physical,
    pointwise_product,
)
from .dyadic import (
    DyadicPartition,
    NormSpec,
    block,
    bony_decompose,
    build_partition,
    low_pass,
    norm_besov,
    norm_hst,
)
from .propagators import PropagatorTable, phi_shell
from .ensembles import FieldEnsembleSpec, gen_ensemble, gen_field
from .latticeblocks import (
    besov_norm as lattice_besov,
    hst_norm as lattice_hst,
    l2_norm as lattice_l2,
    bony_paraproducts,
    criticality_packets,
    lowpass_blocks,
    paraproduct_pieces,
    real_pair,
    remainder_cluster_stats,
)

__all__ = [
    "EstimateReport",
    "SeparableTrajectory",
    "envelope_time_norm",
    "separable_product",
    "check_bernstein",
    "check_parabolic_smoothing",
    "check_l2linfty",
    "concentrated_packet",
    "check_maxwell_energy_decay",
    "check_product_law",
    "product_law_report",
    "log_criticality_experiment",
    "fast_eigenmode_state",
    "heat_forced_coeffs",
    "write_reports_jsonl",
    "write_reports_csv",
    "PRODUCT_LAW_IDS",
    "PINNED_BOUNDS",
]


# ---------------------------------------------------------------------------
# Reports.


@dataclass
class EstimateReport:
    """Measured LHS/RHS pairs for one inequality on one ensemble."""

    estimate_id: str
    params: dict
    lhs: list = field(default_factory=list)
    rhs: list = field(default_factory=list)
    bound: float | None = None

    def add_sample(self, lhs: float, rhs: float) -> None:
        if lhs < 0 or rhs < 0:
            raise ValueError("norms must be nonnegative")
        self.lhs.append(float(lhs))
        self.rhs.append(float(rhs))

    @property
    def ratios(self) -> list:
        out = []
        for l, r in zip(self.lhs, self.rhs):
            if r == 0.0:
                if l != 0.0:
                    raise ValueError("nonzero LHS with zero RHS")
                continue
            out.append(l / r)
        return out

    @property
    def max_ratio(self) -> float:
        rs = self.ratios
        return max(rs) if rs else 0.0

    @property
    def median_ratio(self) -> float:
        rs = self.ratios
        return statistics.median(rs) if rs else 0.0

    @property
    def passed(self) -> bool:
        return self.bound is None or self.max_ratio <= self.bound

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "estimate_id": self.estimate_id,
                "params": self.params,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "max_ratio": self.max_ratio,
                "median_ratio": self.median_ratio,
                "bound": self.bound,
                "pass": self.passed,
            },
            sort_keys=True,
        )

    def csv_row(self) -> str:
        params = ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        bound = "" if self.bound is None else repr(self.bound)
        return (
            f"{self.estimate_id},{params},{self.max_ratio!r},"
            f"{bound},{int(self.passed)}"
        )


CSV_HEADER = "estimate_id,params,max_ratio,bound,pass"


def write_reports_jsonl(reports, path) -> None:
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json_line() + "\n")


def write_reports_csv(reports, path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in reports:
            fh.write(r.csv_row() + "\n")


# ---------------------------------------------------------------------------
# Separable trajectories.


def envelope_time_norm(rate: float, T: float, p) -> float:
    """L^p(0, T) norm of e^{-rate t} in closed form."""
    if p == np.inf or p == "inf":
        return 1.0
    if rate <= 0:
        if p == 1:
            return T
        if p == 2:
            return math.sqrt(T)
        raise ValueError(f"unsupported time exponent {p!r}")
    if p == 1:
        return (1.0 - math.exp(-rate * T)) / rate
    if p == 2:
        return math.sqrt((1.0 - math.exp(-2.0 * rate * T)) / (2.0 * rate))
    raise ValueError(f"unsupported time exponent {p!r}")


@dataclass
class SeparableTrajectory:
    """u(t, x) = e^{-rate t} field(x); norms factorize exactly.

    Both the plain and the Chemin-Lerner space-time norms of a separable
    trajectory equal (spatial norm) x (envelope L^p(0,T) norm), so
    ``spacetime`` evaluates either in closed form.
    """

    field: SpectralField
    rate: float = 2.0

    def spacetime(self, part: DyadicPartition, spec: NormSpec, T: float) -> float:
        return norm_hst(self.field, part, spec) * envelope_time_norm(
            self.rate, T, spec.time_exponent
        )

    def besov_spacetime(self, part: DyadicPartition, s: float, time_p, T: float) -> float:
        return norm_besov(self.field, part, s, 2, 1) * envelope_time_norm(
            self.rate, T, time_p
        )

    def linf_spacetime(self, time_p, T: float) -> float:
        return lp_norm_physical(self.field, np.inf) * envelope_time_norm(
            self.rate, T, time_p
        )


def separable_product(a: SeparableTrajectory, b: SeparableTrajectory,
                      combiner: str) -> SeparableTrajectory:
    """Pointwise product of separable trajectories (rates add)."""
    return SeparableTrajectory(
        field=pointwise_product(a.field, b.field, combiner),
        rate=a.rate + b.rate,
    )


# ---------------------------------------------------------------------------
# Bernstein.


def check_bernstein(spec: FieldEnsembleSpec, q: int, k_order: int = 1,
                    part: DyadicPartition | None = None) -> EstimateReport:
    """Both-sided derivative bound on shell-q blocks.

    Per sample: max_axis ||d^k Delta_q f|| / (2^{qk} ||Delta_q f||).  The
    report's LHS/RHS carry the ratio and 1 so the empirical two-sided
    constant is max(max_ratio, 1/min nonzero ratio); we store both
    orientations as separate samples.
    """
    grid = spec.grid()
    if part is None:
        part = build_partition(grid)
    report = EstimateReport(
        "bernstein", {"q": q, "k_order": k_order, "seed": spec.seed}
    )
    for f in gen_ensemble(spec, part):
        bq = block(f, part, q)
        base = lp_norm_physical(bq, 2)
        if base == 0.0:
            raise ValueError(f"shell {q} empty for this ensemble")
        best = 0.0
        for axis in range(grid.d):
            g = bq
            for _ in range(k_order):
                g = gradient_component(g, axis)
            best = max(best, lp_norm_physical(g, 2))
        ratio = best / (2.0 ** (q * k_order) * base)
        report.add_sample(ratio, 1.0)
        report.add_sample(1.0, ratio)
    return report


# ---------------------------------------------------------------------------
# Forced heat flow (closed-form per mode, no quadrature error in the solve).


def heat_forced_coeffs(u0: SpectralField, forcings, t: float) -> SpectralField:
    """Solution at time t of u_t - Lap u = sum_i e^{-rate_i t} F_i.

    ``forcings`` is a list of (SpectralField, rate) pairs.  Per mode the
    Duhamel integral of an exponential envelope has a closed form, so the
    solve is exact.
    """
    grid = u0.grid
    ksq = grid.k_squared()
    out = u0.coeffs * np.exp(-t * ksq)
    for F, lam in forcings:
        denom = ksq - lam
        near = np.abs(denom) < 1e-12
        safe = np.where(near, 1.0, denom)
        factor = np.where(
            near,
            t * np.exp(-ksq * t),
            (np.exp(-lam * t) - np.exp(-ksq * t)) / safe,
        )
        out = out + F.coeffs * factor
    return SpectralField(grid, out)


def _besov_tilde_from_rows(rows: np.ndarray, times: np.ndarray, q_values,
                           s: float, time_p) -> float:
    """l^1 over shells of 2^{qs} ||row_q||_{L^p_T} (trapezoid in time)."""
    total = 0.0
    for i, q in enumerate(q_values):
        col = rows[:, i]
        if time_p == np.inf:
            tq = float(np.max(col))
        elif time_p == 1:
            tq = float(np.trapezoid(col, times))
        elif time_p == 2:
            tq = float(np.sqrt(np.trapezoid(col**2, times)))
        else:
            raise ValueError(f"unsupported time exponent {time_p!r}")
        total += 2.0 ** (q * s) * tq
    return total


def check_parabolic_smoothing(u0: SpectralField, forcing, T: float, p,
                              s: float, r, dt: float = 0.01,
                              part: DyadicPartition | None = None) -> EstimateReport:
    """Heat regularization in Besov-(2,1) scale.

    LHS = sup_t ||u(t)||_{B^s_{2,1}} + tilde-L^p_T B^{s+2/p}_{2,1};
    RHS = ||u0||_{B^s_{2,1}} + tilde-L^r_T B^{s-2+2/r}_{2,1} of the forcing.
    ``forcing`` is None or (SpectralField, rate).
    """
    from .dyadic import _block_l2

    grid = u0.grid
    if part is None:
        part = build_partition(grid)
    forcings = [] if forcing is None else [forcing]
    times = np.arange(0.0, T + dt / 2, dt)
    rows = np.array(
        [_block_l2(heat_forced_coeffs(u0, forcings, t), part) for t in times]
    )
    q_values = list(part.shells())

    sup_besov = max(
        float(np.sum([2.0 ** (q * s) * rows[i, j] for j, q in enumerate(q_values)]))
        for i in range(len(times))
    )
    smoothed = _besov_tilde_from_rows(rows, times, q_values, s + 2.0 / p, p)
    lhs = sup_besov + smoothed

    rhs = norm_besov(u0, part, s, 2, 1)
    if forcing is not None:
        F, lam = forcing
        rhs += norm_besov(F, part, s - 2.0 + 2.0 / r, 2, 1) * envelope_time_norm(
            lam, T, r
        )
    report = EstimateReport(
        "parabolic-smoothing", {"s": s, "p": p, "r": r, "T": T, "dt": dt}
    )
    report.add_sample(lhs, rhs)
    return report


def concentrated_packet(grid: Grid, q: int, center_scale: float = 1.25,
                        rel_width: float = 0.25,
                        component: int = 2) -> SpectralField:
    """Real modulated Gaussian wave packet at shell ~q: one spatial bump
    per box, spectrum centered at |k| = center_scale * 2^q with width
    proportional to 2^q.

    Unlike a random shell field (which fills the box), the packet is the
    periodization of a single dilated bump, so all of its norms scale as
    they do on the whole space: ||.||_{L^inf} ~ 2^{qd/2} ||.||_{L^2}
    (Bernstein saturated).  The box must resolve the packet: the lattice
    spacing 2*pi/L should be well below rel_width * 2^q.
    """
    ks = grid.wavevectors()
    c = np.zeros(grid.d)
    c[0] = center_scale * 2.0**q
    dist_sq = sum((ks[a] - c[a]) ** 2 for a in range(grid.d))
    sigma = rel_width * 2.0**q
    coeffs = np.zeros((3,) + grid.shape, dtype=np.complex128)
    coeffs[component] = np.exp(-dist_sq / (2.0 * sigma**2))
    f = SpectralField(grid, coeffs)
    f.enforce_hermitian()
    f.zero_nyquist()
    f.dealias()
    return f


def check_l2linfty(u0: SpectralField, f1, f2, T: float, dt: float = 0.01,
                   part: DyadicPartition | None = None) -> EstimateReport:
    """Smoothing estimate ||u||_{L^2_T L^inf} against the three data norms.

    f1, f2 are None or (SpectralField, rate): forcing pieces measured in
    L^1_T H^{d/2-1} and tilde-L^2_T B^{d/2-2}_{2,1} respectively; the heat
    solve sees their sum.
    """
    grid = u0.grid
    d = grid.d
    if part is None:
        part = build_partition(grid)
    forcings = [f for f in (f1, f2) if f is not None]
    times = np.arange(0.0, T + dt / 2, dt)
    sup_series = np.array(
        [
            lp_norm_physical(heat_forced_coeffs(u0, forcings, t), np.inf)
            for t in times
        ]
    )
    lhs = float(np.sqrt(np.trapezoid(sup_series**2, times)))

    spec = NormSpec.sobolev(d / 2.0 - 1.0)
    rhs = norm_hst(u0, part, spec)
    if f1 is not None:
        F, lam = f1
        rhs += norm_hst(F, part, spec) * envelope_time_norm(lam, T, 1)
    if f2 is not None:
        F, lam = f2
        rhs += norm_besov(F, part, d / 2.0 - 2.0, 2, 1) * envelope_time_norm(lam, T, 2)
    report = EstimateReport("l2-linfty", {"T": T, "dt": dt, "d": d})
    report.add_sample(lhs, rhs)
    return report


# ---------------------------------------------------------------------------
# Damped Maxwell energy / decay.


def fast_eigenmode_state(grid: Grid, rng: np.random.Generator,
                         k_max: float = 0.3):
    """Random (E, B) supported on modes |k| < 1/2, projected per mode onto
    the faster-decaying eigenvector of the damped transverse system.

    Every excited mode then decays with rate >= 3/4, so all time integrals
    of the evolution converge within t = O(1); window sweeps probe
    constants, not unconverged integrals.  Requires a box large enough to
    resolve |k| < 1/2.
    """
    k1, k2, k3 = grid.wavevectors()
    kmag = grid.k_magnitude()
    E = np.zeros((3,) + grid.shape, dtype=np.complex128)
    Bc = np.zeros_like(E)
    sel = (kmag > 0) & (kmag < min(k_max, 0.499)) & ~grid.nyquist_mask()
    idx = np.argwhere(sel)
    if idx.size == 0:
        raise ValueError("box too small: no modes with |k| < 1/2")
    khat = np.stack([k1, k2, k3]) / np.where(kmag > 0, kmag, 1.0)
    for ind in idx:
        ind = tuple(ind)
        k = kmag[ind]
        lam = -0.5 - math.sqrt(0.25 - k * k)
        kh = np.array([khat[c][ind] for c in range(3)])
        # Random transverse polarization (complex, orthogonal to k).
        p = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        p -= kh * np.dot(kh, p)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        E[(slice(None),) + ind] = k * amp * p
        F = (1.0 + lam) * amp * p
        Bc[(slice(None),) + ind] = 1j * np.cross(kh, F)
    Ef = SpectralField(grid, E)
    Bf = SpectralField(grid, Bc)
    for f in (Ef, Bf):
        f.enforce_hermitian()
        f.zero_nyquist()
        f.dealias()
    return Ef, leray_project(Bf)


def check_maxwell_energy_decay(E0: SpectralField, B0: SpectralField, G,
                               T: float, dt: float, alpha: float,
                               part: DyadicPartition | None = None):
    """Damped Maxwell with forcing G(t) = e^{-rate t} G0 in the E equation.

    Returns (energy_report, decay_report): the first bounds
    ||E||_{tilde-Linf ^ L2} + ||B||_{tilde-Linf} in H^{d/2-1}_alpha, the
    second bounds ||B||_{L2 H^{d/2, d/2-1}_alpha}; both against
    ||(E0,B0)||_{H^{d/2-1}_alpha} + ||G||_{L2_T H^{d/2-1}_alpha}.
    """
    from .dyadic import _block_l2

    grid = E0.grid
    d = grid.d
    if part is None:
        part = build_partition(grid)
    table = PropagatorTable.build(grid, dt)
    n_steps = int(round(T / dt))
    times = np.arange(n_steps + 1) * dt

    G0, rate = (None, 0.0) if G is None else G
    E, B = E0, B0
    rows_E = [_block_l2(E, part)]
    rows_B = [_block_l2(B, part)]
    for n in range(n_steps):
        E, B = table.apply_maxwell(E, B)
        if G0 is not None:
            # Exponential trapezoid for the forcing Duhamel integral.
            g_old = G0 * math.exp(-rate * times[n])
            g_new = G0 * math.exp(-rate * times[n + 1])
            gE, gB = table.apply_maxwell(g_old, SpectralField.zeros(grid))
            E = E + (gE + g_new) * (dt / 2.0)
            B = B + gB * (dt / 2.0)
        rows_E.append(_block_l2(E, part))
        rows_B.append(_block_l2(B, part))
    rows_E = np.array(rows_E)
    rows_B = np.array(rows_B)
    q_values = list(part.shells())

    spec_data = NormSpec(d / 2.0 - 1.0, d / 2.0 - 1.0, alpha)
    w = np.array([spec_data.shell_weight_sq(q) for q in q_values])
    spec_decay = NormSpec(d / 2.0, d / 2.0 - 1.0, alpha)
    w_decay = np.array([spec_decay.shell_weight_sq(q) for q in q_values])

    def tilde_linf(rows):
        per_shell = np.max(rows, axis=0)
        return math.sqrt(float(np.sum(w * per_shell**2)))

    def tilde_l2(rows, weights):
        per_shell = np.sqrt(np.trapezoid(rows**2, times, axis=0))
        return math.sqrt(float(np.sum(weights * per_shell**2)))

    lhs_energy = tilde_linf(rows_E) + tilde_l2(rows_E, w) + tilde_linf(rows_B)
    lhs_decay = tilde_l2(rows_B, w_decay)

    rhs = math.sqrt(
        norm_hst(E0, part, spec_data) ** 2 + norm_hst(B0, part, spec_data) ** 2
    )
    if G0 is not None:
        rhs += norm_hst(G0, part, spec_data) * envelope_time_norm(rate, T, 2)

    params = {"T": T, "dt": dt, "alpha": alpha, "d": d}
    energy = EstimateReport("maxwell-energy", dict(params))
    energy.add_sample(lhs_energy, rhs)
    decay = EstimateReport("maxwell-b-decay", dict(params))
    decay.add_sample(lhs_decay, rhs)
    return energy, decay


# ---------------------------------------------------------------------------
# Product laws.

PRODUCT_LAW_IDS = (
    "est1-2D",
    "est4-2D",
    "est3-uB-2D",
    "est1-3D",
    "est4-3D",
    "est3-uB-3D",
)

# Regression-pinned ratio bounds: first measured max ratio x 1.5 safety
# factor, on the reference ensembles (seed 0, 20 samples, slope 2,
# n = 128 in 2D / 64 in 3D, T = 100, separable rate 2).
PINNED_BOUNDS = {
    "est1-2D": 0.307918,
    "est4-2D": 0.149395,
    "est3-uB-2D": 0.112186,
    "est1-3D": 0.0205801,
    "est4-3D": 0.0575577,
    "est3-uB-3D": 0.00814992,
}


def _tensor_gradient_power(u: SpectralField, v: SpectralField) -> np.ndarray:
    """Sum over i,j,l of |FT[d_l(u_i v_j)]|^2 per mode (dealiased)."""
    grid = u.grid
    mask = grid.dealias_mask()

    def phys(f):
        c = f.coeffs.copy()
        c[:, mask] = 0.0
        return np.fft.ifftn(c, axes=grid.spatial_axes).real * grid.n**grid.d

    up, vp = phys(u), phys(v)
    ks = grid.wavevectors()
    power = np.zeros(grid.shape)
    for i in range(3):
        for j in range(3):
            c = np.fft.fftn(up[i] * vp[j], axes=tuple(range(grid.d))) / grid.n**grid.d
            c[mask] = 0.0
            csq = np.abs(c) ** 2
            for l in range(grid.d):
                power += ks[l] ** 2 * csq
    return power


def _power_l2(power: np.ndarray, grid: Grid) -> float:
    return math.sqrt(grid.box_length**grid.d * float(np.sum(power)))


def _power_hst(power: np.ndarray, part: DyadicPartition, spec: NormSpec) -> float:
    vol = part.grid.box_length**part.grid.d
    total = 0.0
    for q in part.shells():
        bq_sq = vol * float(np.sum(part.weight(q) ** 2 * power))
        total += spec.shell_weight_sq(q) * bq_sq
    return math.sqrt(total)


def _intersection(*norms) -> float:
    """Norm of an intersection space, taken as the sum of the pieces."""
    return float(sum(norms))


def check_product_law(estimate_id: str, T: float,
                      u: SeparableTrajectory | None = None,
                      v: SeparableTrajectory | None = None,
                      E: SeparableTrajectory | None = None,
                      B: SeparableTrajectory | None = None,
                      part: DyadicPartition | None = None) -> EstimateReport:
    """One sample of one of the six bilinear estimates; LHS sum-space norms
    use the paraproduct-induced split (an upper bound for the true
    infimum, and the split the estimates are proved through)."""
    if estimate_id not in PRODUCT_LAW_IDS:
        raise ValueError(f"unknown estimate id {estimate_id!r}")
    ref = next(t for t in (u, v, E, B) if t is not None)
    grid = ref.field.grid
    d = grid.d
    if part is None:
        part = build_partition(grid)
    report = EstimateReport(estimate_id, {"T": T, "d": d})

    if estimate_id.startswith("est1"):
        power = _tensor_gradient_power(u.field, v.field)
        env = envelope_time_norm(u.rate + v.rate, T, 1)
        if d == 2:
            lhs = _power_l2(power, grid) * env
            s_high = 1.0
        else:
            lhs = _power_hst(power, part, NormSpec.sobolev(0.5)) * env
            s_high = 1.5
        rhs = 1.0
        for traj in (u, v):
            rhs *= _intersection(
                traj.linf_spacetime(2, T),
                traj.spacetime(part, NormSpec.sobolev(s_high, time_exponent=2), T),
            )
        report.add_sample(lhs, rhs)
        return report

    if estimate_id.startswith("est4"):
        if d == 2:
            t_eb, t_be, r = bony_decompose(E.field, B.field, part, "cross")
            rate = E.rate + B.rate
            env2 = envelope_time_norm(rate, T, 2)
            env1 = envelope_time_norm(rate, T, 1)
            lhs = (
                norm_besov(t_eb + t_be, part, -1.0, 2, 1) * env2
                + lp_norm_physical(low_pass(r, part, 2), 2) * env1
                + norm_besov(r - low_pass(r, part, 2), part, -1.0, 2, 1) * env2
            )
            log_spec = NormSpec.sobolev_log(0.0)
            rhs = E.spacetime(part, NormSpec.sobolev_log(0.0, time_exponent=2), T) * (
                _intersection(
                    B.spacetime(part, log_spec, T),
                    B.spacetime(part, NormSpec(1.0, 0.0, 0.0, time_exponent=2), T),
                )
            )
        else:
            prod = separable_product(E, B, "cross")
            lhs = prod.besov_spacetime(part, -0.5, 2, T)
            rhs = E.spacetime(part, NormSpec.sobolev(0.5, time_exponent=2), T) * (
                B.spacetime(part, NormSpec.sobolev(0.5), T)
            )
        report.add_sample(lhs, rhs)
        return report

    # est3-uB
    prod = separable_product(u, B, "cross")
    if d == 2:
        lhs = prod.spacetime(part, NormSpec.sobolev_log(0.0, time_exponent=2), T)
        rhs = _intersection(
            u.linf_spacetime(2, T),
            u.spacetime(part, NormSpec.sobolev(1.0, time_exponent=2), T),
        ) * B.spacetime(part, NormSpec.sobolev_log(0.0), T)
    else:
        lhs = prod.spacetime(part, NormSpec.sobolev(0.5, time_exponent=2), T)
        rhs = _intersection(
            u.linf_spacetime(2, T),
            u.spacetime(part, NormSpec.sobolev(1.5, time_exponent=2), T),
        ) * B.spacetime(part, NormSpec.sobolev(0.5), T)
    report.add_sample(lhs, rhs)
    return report


def product_law_report(estimate_id: str, spec: FieldEnsembleSpec, T: float,
                       rate: float = 2.0, bound: float | None = None,
                       part: DyadicPartition | None = None) -> EstimateReport:
    """Ensemble version: pairs of random fields as separable trajectories."""
    grid = spec.grid()
    if part is None:
        part = build_partition(grid)
    rng = np.random.default_rng(spec.seed)
    merged = EstimateReport(
        estimate_id,
        {"T": T, "seed": spec.seed, "count": spec.count, "slope": spec.slope},
        bound=bound,
    )
    for _ in range(spec.count):
        fa = gen_field(grid, rng, spec.slope, spec.shell, True, part)
        fb = gen_field(grid, rng, spec.slope, spec.shell, spec.divergence_free, part)
        a = SeparableTrajectory(fa, rate)
        b = SeparableTrajectory(fb, rate)
        if estimate_id.startswith("est1"):
            sample = check_product_law(estimate_id, T, u=a, v=b, part=part)
        elif estimate_id.startswith("est4"):
            sample = check_product_law(estimate_id, T, E=a, B=b, part=part)
        else:
            sample = check_product_law(estimate_id, T, u=a, B=b, part=part)
        merged.add_sample(sample.lhs[0], sample.rhs[0])
    return merged


# ---------------------------------------------------------------------------
# Logarithmic criticality (2D): sparse-lattice route, shells up to q = 12+.


def log_criticality_experiment(q_values, seed: int | None = 0,
                               rate: float = 2.0, T: float = 100.0) -> list:
    """Ratio curves of the 2D cross-product estimate over a shell sweep.

    For each q, both factors are superpositions of shell-q wave packets
    whose pairwise products are localized bumps with flat spectra spread
    evenly over all output scales — the interaction that drives the
    logarithmic loss.  Returns rows of (q, lhs, rhs_unweighted,
    rhs_weighted, ratio_unweighted, ratio_weighted).  All norms are exact
    lattice sums; no grid, no aliasing.
    """
    rng = None if seed is None else np.random.default_rng(seed)
    env2 = envelope_time_norm(2.0 * rate, T, 2)
    env1 = envelope_time_norm(2.0 * rate, T, 1)
    envf2 = envelope_time_norm(rate, T, 2)
    rows = []
    for q in q_values:
        p_list, b_list = criticality_packets(q, rng)
        t_ab, t_ba = bony_paraproducts(p_list, b_list)
        s2r, comp = remainder_cluster_stats(p_list, b_list,
                                            t_blocks=t_ab + t_ba)
        lhs = (
            lattice_besov(t_ab + t_ba, -1.0) * env2
            + s2r * env1
            + sum(2.0 ** (-j) * v for j, v in comp.items()) * env2
        )
        a_blocks = [blk for pb in p_list for blk in real_pair(pb)]
        b_blocks = [blk for qb in b_list for blk in real_pair(qb)]
        b_h10 = lattice_hst(b_blocks, 1.0, 0.0, 0.0)
        rhs_unw = envf2 * lattice_l2(a_blocks) * (
            lattice_l2(b_blocks) + envf2 * b_h10
        )
        rhs_w = (
            envf2
            * lattice_hst(a_blocks, 0.0, 0.0, 1.0)
            * (lattice_hst(b_blocks, 0.0, 0.0, 1.0) + envf2 * b_h10)
        )
        rows.append((q, lhs, rhs_unw, rhs_w, lhs / rhs_unw, lhs / rhs_w))
    return rows


def fit_growth_exponent(q_values, ratios) -> float:
    """Slope of log(ratio) against log(q): > 0 means superconstant growth."""
    x = np.log(np.asarray(q_values, dtype=float))
    y = np.log(np.asarray(ratios, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
