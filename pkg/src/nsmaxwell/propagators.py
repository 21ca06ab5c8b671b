"""Exact per-mode linear propagators and Duhamel time stepping.

The linear generator acts blockwise: the heat semigroup e^{t Lap} on the
velocity and the damped-Maxwell group on (E, B).  The Maxwell block is
solved two independent ways: (a) eigen-decomposition of the per-mode 2x2
generator restricted to the transverse sector (eigenvalues
-1/2 +- sqrt(1/4 - |k|^2)), and (b) the damped-wave multiplier route
B(t) = L1(t) B0 + L2(t) (B0/2 + B1) with B1 = -curl E0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, SpectralField, curl, leray_project

__all__ = [
    "phi_multipliers",
    "phi_shell",
    "heat_apply",
    "maxwell_apply",
    "maxwell_wave_route",
    "maxwell_apply_undamped",
    "PropagatorTable",
    "duhamel_step",
    "BlowupError",
]


class BlowupError(RuntimeError):
    """Raised when a NaN/Inf coefficient appears during time stepping."""

    def __init__(self, step: int, message: str = "numerical blowup"):
        super().__init__(f"{message} at step {step}")
        self.step = step


def phi_multipliers(t, ksq):
    """The damped-wave scalar multipliers Phi1, Phi2.

    Phi1 = e^{-t/2} cosh(sqrt(1/4 - ksq) t),
    Phi2 = e^{-t/2} sinh(sqrt(1/4 - ksq) t) / sqrt(1/4 - ksq),
    evaluated stably across the three regimes (hyperbolic, oscillatory, and
    a 4-term Taylor series near the branch point x = 1/4 - ksq = 0).
    Broadcasts over array arguments; always returns real values.
    """
    t = np.asarray(t, dtype=np.float64)
    ksq = np.asarray(ksq, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    if np.any(ksq < 0):
        raise ValueError("ksq must be nonnegative")
    x = 0.25 - ksq
    t, x = np.broadcast_arrays(t, x)
    phi1 = np.empty(x.shape)
    phi2 = np.empty(x.shape)

    taylor = np.abs(x) * t**2 < 1e-8
    hyper = (x > 0) & ~taylor
    osc = (x < 0) & ~taylor

    if np.any(hyper):
        # Fold the e^{-t/2} damping into the exponentials so the slow
        # branch e^{(mu - 1/2) t} never overflows at large t (mu < 1/2).
        mu = np.sqrt(x[hyper])
        th = t[hyper]
        ep = np.exp((mu - 0.5) * th)
        em = np.exp(-(mu + 0.5) * th)
        phi1[hyper] = 0.5 * (ep + em)
        phi2[hyper] = (ep - em) / (2.0 * mu)
    if np.any(osc):
        om = np.sqrt(-x[osc])
        to = t[osc]
        damp = np.exp(-to / 2.0)
        phi1[osc] = np.cos(om * to) * damp
        phi2[osc] = np.sin(om * to) / om * damp
    if np.any(taylor):
        xt = x[taylor]
        tt = t[taylor]
        z = xt * tt**2
        damp = np.exp(-tt / 2.0)
        phi1[taylor] = (1.0 + z / 2.0 + z**2 / 24.0 + z**3 / 720.0) * damp
        phi2[taylor] = tt * (1.0 + z / 6.0 + z**2 / 120.0 + z**3 / 5040.0) * damp

    return phi1, phi2


def phi_shell(q: int, t, which: int):
    """Low-shell envelope Phi_q^i(t) = Phi_i(t, 2^{2(q-1)}).

    Uses 1/4 - 2^{2(q-1)} consistently inside both the sinh and the
    denominator.
    """
    phi1, phi2 = phi_multipliers(t, 4.0 ** (q - 1))
    return phi1 if which == 1 else phi2


def heat_apply(u: SpectralField, t: float) -> SpectralField:
    """Per-mode multiply by e^{-t |k|^2}."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    return SpectralField(u.grid, u.coeffs * np.exp(-t * u.grid.k_squared()))


def _maxwell_coefficients(ksq: np.ndarray, t: float):
    """Entries of exp(t M) for the 2x2 transverse generator
    M = [[-1, k], [-k, 0]], via the eigenvalues -1/2 +- sqrt(1/4 - ksq)."""
    mu = np.sqrt(0.25 - ksq.astype(np.complex128))
    lp = -0.5 + mu
    lm = -0.5 - mu
    ep = np.exp(lp * t)
    em = np.exp(lm * t)
    k = np.sqrt(ksq)

    degenerate = np.abs(mu) * t < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        a11 = (lp * ep - lm * em) / (2.0 * mu)
        a12 = k * (ep - em) / (2.0 * mu)
        a22 = (lp * em - lm * ep) / (2.0 * mu)
    if np.any(degenerate):
        e = np.exp(-0.5 * t)
        a11 = np.where(degenerate, e * (1.0 - 0.5 * t), a11)
        a12 = np.where(degenerate, e * k * t, a12)
        a22 = np.where(degenerate, e * (1.0 + 0.5 * t), a22)
    return a11.real, a12.real, a22.real


def _transverse_split(grid: Grid, coeffs: np.ndarray):
    """Split coefficients into parts parallel and transverse to k."""
    k1, k2, k3 = grid.wavevectors()
    ksq = grid.k_squared()
    ksq_safe = np.where(ksq == 0, 1.0, ksq)
    kdotc = k1 * coeffs[0] + k2 * coeffs[1] + k3 * coeffs[2]
    par = np.stack([k1, k2, k3]) * (kdotc / ksq_safe)
    return par, coeffs - par


def _khat_cross(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """i khat x coeffs per mode (zero at k = 0)."""
    k1, k2, k3 = grid.wavevectors()
    kmag = np.sqrt(k1**2 + k2**2 + k3**2)
    safe = np.where(kmag == 0, 1.0, kmag)
    h1, h2, h3 = k1 / safe, k2 / safe, k3 / safe
    c1, c2, c3 = coeffs
    return 1j * np.stack(
        [h2 * c3 - h3 * c2, h3 * c1 - h1 * c3, h1 * c2 - h2 * c1]
    )


def maxwell_apply(E: SpectralField, B: SpectralField, t: float):
    """Exact damped-Maxwell group E' = -E + curl B, B' = -curl E.

    B is projected onto its divergence-free part first.  The longitudinal
    part of E decays as e^{-t} (at k=0: E scaled by e^{-t}, B unchanged);
    the transverse sector uses the closed-form 2x2 matrix exponential.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    grid = E.grid
    B = leray_project(B)
    ksq = grid.k_squared()
    a11, a12, a22 = _maxwell_coefficients(ksq, t)

    E_par, E_perp = _transverse_split(grid, E.coeffs)
    # F = i khat x B is transverse and carries |B| isometrically.
    F = _khat_cross(grid, B.coeffs)

    E_perp_t = a11 * E_perp + a12 * F
    F_t = -a12 * E_perp + a22 * F
    B_t = _khat_cross(grid, F_t)

    E_out = np.exp(-t) * E_par + E_perp_t
    # k = 0: decoupled ODEs E0' = -E0, B0' = 0.
    zero_mask = ksq == 0
    B_t[:, zero_mask] = B.coeffs[:, zero_mask]
    return SpectralField(grid, E_out), SpectralField(grid, B_t)


def maxwell_wave_route(E0: SpectralField, B0: SpectralField, t: float) -> SpectralField:
    """Magnetic field via the damped-wave multipliers:
    B(t) = L1(t) B0 + L2(t) (B0/2 + B1), B1 = -curl E0."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    grid = B0.grid
    B0 = leray_project(B0)
    phi1, phi2 = phi_multipliers(t, grid.k_squared())
    B1 = -curl(E0).coeffs
    coeffs = phi1 * B0.coeffs + phi2 * (0.5 * B0.coeffs + B1)
    zero_mask = grid.k_squared() == 0
    coeffs[:, zero_mask] = B0.coeffs[:, zero_mask]
    return SpectralField(grid, coeffs)


def maxwell_apply_undamped(E: SpectralField, B: SpectralField, t: float):
    """Variant with the damping removed (test-only): the transverse sector
    rotates at frequency |k| and conserves |E|^2 + |B|^2."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    grid = E.grid
    B = leray_project(B)
    kmag = grid.k_magnitude()
    c, s = np.cos(kmag * t), np.sin(kmag * t)
    E_par, E_perp = _transverse_split(grid, E.coeffs)
    F = _khat_cross(grid, B.coeffs)
    E_perp_t = c * E_perp + s * F
    F_t = -s * E_perp + c * F
    B_t = _khat_cross(grid, F_t)
    zero_mask = grid.k_squared() == 0
    B_t[:, zero_mask] = B.coeffs[:, zero_mask]
    return SpectralField(grid, E_par + E_perp_t), SpectralField(grid, B_t)


@dataclass
class PropagatorTable:
    """Per-mode propagator factors at a fixed step dt, immutable once built."""

    grid: Grid
    dt: float
    heat: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    e_damp: float

    @classmethod
    def build(cls, grid: Grid, dt: float) -> "PropagatorTable":
        if dt < 0:
            raise ValueError("dt must be nonnegative")
        ksq = grid.k_squared()
        a11, a12, a22 = _maxwell_coefficients(ksq, dt)
        phi1, phi2 = phi_multipliers(dt, ksq)
        return cls(
            grid=grid,
            dt=dt,
            heat=np.exp(-dt * ksq),
            a11=a11,
            a12=a12,
            a22=a22,
            phi1=phi1,
            phi2=phi2,
            e_damp=float(np.exp(-dt)),
        )

    def apply_heat(self, v: SpectralField) -> SpectralField:
        return SpectralField(self.grid, v.coeffs * self.heat)

    def apply_maxwell(self, E: SpectralField, B: SpectralField):
        grid = self.grid
        E_par, E_perp = _transverse_split(grid, E.coeffs)
        F = _khat_cross(grid, B.coeffs)
        E_perp_t = self.a11 * E_perp + self.a12 * F
        F_t = -self.a12 * E_perp + self.a22 * F
        B_t = _khat_cross(grid, F_t)
        zero_mask = grid.k_squared() == 0
        B_t[:, zero_mask] = B.coeffs[:, zero_mask]
        E_out = self.e_damp * E_par + E_perp_t
        return SpectralField(grid, E_out), SpectralField(grid, B_t)

    def apply(self, state):
        """Full linear group on an MhdState-like triple."""
        v = self.apply_heat(state.v)
        E, B = self.apply_maxwell(state.E, state.B)
        return type(state)(v=v, E=E, B=B, time=state.time + self.dt)


def _check_finite(state, step: int) -> None:
    for f in (state.v, state.E, state.B):
        if not np.all(np.isfinite(f.coeffs)):
            raise BlowupError(step)


def duhamel_step(state, nonlinearity, dt: float, scheme: str = "exp-trapezoid",
                 table: PropagatorTable | None = None, step_index: int = 0):
    """One step of the Duhamel integral equation.

    exp-euler:      G_{n+1} = e^{dt A} G_n + dt e^{dt A} N(G_n)
    exp-trapezoid:  predictor exp-euler, then
                    G_{n+1} = e^{dt A} G_n + dt/2 (e^{dt A} N(G_n) + N(G*))

    The velocity slot of the nonlinearity is Leray-projected by the
    ``nonlinearity`` evaluator itself.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if table is None or table.dt != dt:
        table = PropagatorTable.build(state.v.grid, dt)

    lin = table.apply(state)
    n0 = nonlinearity(state)
    n0_prop = table.apply(n0)

    if scheme == "exp-euler":
        out = _combine(lin, n0_prop, dt)
    elif scheme == "exp-trapezoid":
        pred = _combine(lin, n0_prop, dt)
        n1 = nonlinearity(pred)
        out = _combine_trapezoid(lin, n0_prop, n1, dt)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    out.time = state.time + dt
    _check_finite(out, step_index)
    return out


def _combine(lin, n_prop, dt):
    return type(lin)(
        v=lin.v + dt * n_prop.v,
        E=lin.E + dt * n_prop.E,
        B=lin.B + dt * n_prop.B,
        time=lin.time,
    )


def _combine_trapezoid(lin, n0_prop, n1, dt):
    h = 0.5 * dt
    return type(lin)(
        v=lin.v + h * (n0_prop.v + n1.v),
        E=lin.E + h * (n0_prop.E + n1.E),
        B=lin.B + h * (n0_prop.B + n1.B),
        time=lin.time,
    )
