import json
import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from nsmaxwell.checks import (
    CSV_HEADER,
    PINNED_BOUNDS,
    PRODUCT_LAW_IDS,
    EstimateReport,
    SeparableTrajectory,
    check_bernstein,
    check_l2linfty,
    check_maxwell_energy_decay,
    check_parabolic_smoothing,
    check_product_law,
    concentrated_packet,
    envelope_time_norm,
    fast_eigenmode_state,
    fit_growth_exponent,
    heat_forced_coeffs,
    log_criticality_experiment,
    product_law_report,
    separable_product,
    write_reports_csv,
    write_reports_jsonl,
)
from nsmaxwell.dyadic import NormSpec, build_partition, norm_hst, shell_series, spacetime_norm_from_series
from nsmaxwell.ensembles import FieldEnsembleSpec, gen_field
from nsmaxwell.grid import Grid, SpectralField, lp_norm_physical

from conftest import random_field, single_mode_field


# ---------------------------------------------------------------------------
# Reports.


def test_report_ratio_bookkeeping():
    rep = EstimateReport("demo", {"T": 1.0}, bound=2.0)
    rep.add_sample(1.0, 2.0)
    rep.add_sample(3.0, 2.0)
    rep.add_sample(0.0, 0.0)  # 0/0 pairs are skipped
    assert rep.ratios == [0.5, 1.5]
    assert rep.max_ratio == 1.5
    assert rep.median_ratio == 1.0
    assert rep.passed


def test_report_zero_rhs_nonzero_lhs_raises():
    rep = EstimateReport("demo", {})
    rep.add_sample(1.0, 0.0)
    with pytest.raises(ValueError):
        rep.ratios
    with pytest.raises(ValueError):
        rep.add_sample(-1.0, 1.0)


def test_report_bound_gate():
    rep = EstimateReport("demo", {}, bound=1.0)
    rep.add_sample(2.0, 1.0)
    assert not rep.passed
    empty = EstimateReport("demo", {}, bound=0.5)
    assert empty.passed and empty.max_ratio == 0.0


def test_report_serialization(tmp_path):
    rep = EstimateReport("demo", {"T": 1.0, "d": 2}, bound=1.0)
    rep.add_sample(0.25, 1.0)
    jpath = tmp_path / "r.jsonl"
    cpath = tmp_path / "r.csv"
    write_reports_jsonl([rep], jpath)
    write_reports_csv([rep], cpath)
    row = json.loads(jpath.read_text().strip())
    assert row["estimate_id"] == "demo" and row["pass"] is True
    assert row["max_ratio"] == 0.25
    lines = cpath.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("demo,")


# ---------------------------------------------------------------------------
# Separable trajectories.


def test_envelope_time_norm_vs_quadrature():
    for rate in (0.0, 0.7, 2.0):
        for p in (1, 2):
            direct, _ = quad(lambda t: math.exp(-rate * t) ** p, 0.0, 5.0)
            direct = direct ** (1.0 / p)
            assert abs(envelope_time_norm(rate, 5.0, p) - direct) < 1e-10
    assert envelope_time_norm(3.0, 5.0, np.inf) == 1.0
    with pytest.raises(ValueError):
        envelope_time_norm(1.0, 1.0, 4)


def test_separable_trajectory_matches_sampled_norm(grid2, part2):
    f = random_field(grid2, seed=50, slope=1.0)
    traj = SeparableTrajectory(f, rate=1.3)
    T = 2.0
    times = np.linspace(0.0, T, 801)
    fields = [SpectralField(grid2, f.coeffs * math.exp(-1.3 * t)) for t in times]
    series = shell_series(fields, times, part2)
    for p in (2, np.inf):
        spec = NormSpec.sobolev(0.5, time_exponent=p, tilde=True)
        sampled = spacetime_norm_from_series(series, spec)
        closed = traj.spacetime(part2, spec, T)
        assert abs(sampled - closed) < 2e-5 * closed


def test_separable_product_rates_add(grid2):
    a = SeparableTrajectory(random_field(grid2, seed=51), rate=1.0)
    b = SeparableTrajectory(random_field(grid2, seed=52), rate=2.5)
    prod = separable_product(a, b, "cross")
    assert prod.rate == 3.5
    assert prod.field.grid == grid2


# ---------------------------------------------------------------------------
# Bernstein.


def test_bernstein_single_mode_ratio_is_exact():
    # one mode at |k| = 2^q exactly: derivative along its axis gives
    # ratio |k| / 2^q = 1
    spec = FieldEnsembleSpec(seed=0, count=1, d=2, n=64)
    grid = spec.grid()
    part = build_partition(grid)
    rep = check_bernstein(spec, q=2, part=part)
    assert rep.ratios  # ensemble route ran
    f = single_mode_field(grid, (4, 0), 1.0)
    from nsmaxwell.grid import gradient_component
    from nsmaxwell.dyadic import block

    bq = block(f, part, 2)
    g = gradient_component(bq, 0)
    ratio = lp_norm_physical(g, 2) / (4.0 * lp_norm_physical(bq, 2))
    assert abs(ratio - 1.0) < 1e-12


def test_bernstein_random_shells_bounded():
    # measured two-sided constants on random shell data (regression range)
    spec = FieldEnsembleSpec(seed=3, count=8, d=2, n=64)
    for q in (1, 2, 3):
        rep = check_bernstein(spec, q)
        vals = rep.ratios[0::2]
        assert 0.7 < min(vals) and max(vals) < 2.7, (q, vals)


def test_bernstein_empty_shell_raises():
    spec = FieldEnsembleSpec(seed=0, count=1, d=2, n=64, shell=2)
    with pytest.raises(ValueError):
        check_bernstein(spec, q=4)


# ---------------------------------------------------------------------------
# Forced heat flow.


def test_heat_forced_coeffs_vs_ode_oracle(grid2):
    u0 = random_field(grid2, seed=53, slope=1.0)
    F1 = random_field(grid2, seed=54, slope=1.0)
    F2 = random_field(grid2, seed=55, slope=1.0)
    rates = (0.8, 3.0)
    t_end = 0.7
    got = heat_forced_coeffs(u0, [(F1, rates[0]), (F2, rates[1])], t_end)

    ksq = grid2.k_squared().ravel()
    y0 = u0.coeffs.reshape(3, -1)

    def rhs(t, y):
        y = y.reshape(3, -1)
        out = -ksq * y
        out = out + F1.coeffs.reshape(3, -1) * math.exp(-rates[0] * t)
        out = out + F2.coeffs.reshape(3, -1) * math.exp(-rates[1] * t)
        return out.ravel()

    sol = solve_ivp(
        rhs, (0.0, t_end), y0.ravel(), rtol=1e-11, atol=1e-13, method="DOP853"
    )
    oracle = sol.y[:, -1].reshape(got.coeffs.shape)
    scale = np.max(np.abs(oracle)) + 1e-300
    assert np.max(np.abs(got.coeffs - oracle)) < 1e-8 * scale


def test_heat_forced_resonant_mode():
    # forcing rate equal to |k|^2 hits the t e^{-|k|^2 t} resonance branch
    grid = Grid(2, 16)
    u0 = SpectralField.zeros(grid)
    F = single_mode_field(grid, (1, 0), 1.0)
    got = heat_forced_coeffs(u0, [(F, 1.0)], 0.5)
    expect = 0.5 * math.exp(-0.5)
    assert abs(got.coeffs[2][(1, 0)] - expect) < 1e-12


def test_parabolic_smoothing_zero_data(grid2, part2):
    rep = check_parabolic_smoothing(
        SpectralField.zeros(grid2), None, T=1.0, p=2, s=0.5, r=2, part=part2
    )
    assert rep.lhs == [0.0] and rep.rhs == [0.0]
    assert rep.ratios == []


def test_parabolic_smoothing_ratio_dt_stable(grid2, part2):
    # the measured ratio converges as dt -> 0 (time quadrature converges)
    u0 = random_field(grid2, seed=56, slope=1.5)
    F = random_field(grid2, seed=57, slope=1.0)
    vals = []
    for dt in (0.02, 0.01, 0.005):
        rep = check_parabolic_smoothing(u0, (F, 1.0), T=2.0, p=1, s=0.0, r=1,
                                        dt=dt, part=part2)
        vals.append(rep.max_ratio)
    assert abs(vals[1] - vals[2]) < abs(vals[0] - vals[1]) + 1e-12
    assert abs(vals[0] - vals[2]) < 0.02 * vals[2]


def test_l2linfty_bounded(grid2, part2):
    u0 = gen_field(grid2, np.random.default_rng(1), slope=1.5)
    F1 = gen_field(grid2, np.random.default_rng(2), slope=1.0)
    F2 = gen_field(grid2, np.random.default_rng(3), slope=1.0)
    rep = check_l2linfty(u0, (F1, 1.0), (F2, 2.0), T=3.0, part=part2)
    assert 0.0 < rep.max_ratio < 1.0
    # dropping a forcing can only shrink the solution's LHS contribution path
    rep0 = check_l2linfty(u0, None, None, T=3.0, part=part2)
    assert rep0.max_ratio > 0.0


def test_concentrated_packet_saturates_bernstein():
    # L^inf / (2^{qd/2} L^2) for the packet stays within a modest factor
    # across shells, and beats a box-filling random shell field
    grid = Grid(2, 256, 16.0 * np.pi)
    part = build_partition(grid)
    sats = []
    for q in (3, 4):
        f = concentrated_packet(grid, q)
        sats.append(lp_norm_physical(f, np.inf) / (2.0**q * lp_norm_physical(f, 2)))
    assert 0.3 < sats[1] / sats[0] < 1.2
    rng = np.random.default_rng(4)
    rand = gen_field(grid, rng, shell=4, part=part)
    sat_rand = lp_norm_physical(rand, np.inf) / (2.0**4 * lp_norm_physical(rand, 2))
    assert sats[1] > 3.0 * sat_rand


# ---------------------------------------------------------------------------
# Damped Maxwell energy / decay.


def test_fast_eigenmode_state_decays_fast():
    # every excited mode decays at rate >= 3/4: total energy after t=4
    # is below e^{-2*3/4*4} of the initial energy (with margin)
    from nsmaxwell.propagators import maxwell_apply

    grid = Grid(2, 32, 16.0 * np.pi)
    rng = np.random.default_rng(5)
    E, B = fast_eigenmode_state(grid, rng, k_max=0.3)
    e0 = lp_norm_physical(E, 2) ** 2 + lp_norm_physical(B, 2) ** 2
    E4, B4 = maxwell_apply(E, B, 4.0)
    e4 = lp_norm_physical(E4, 2) ** 2 + lp_norm_physical(B4, 2) ** 2
    assert e4 < math.exp(-1.5 * 4.0) * e0 * 1.1


def test_fast_eigenmode_state_deterministic():
    grid = Grid(2, 32, 16.0 * np.pi)
    E1, B1 = fast_eigenmode_state(grid, np.random.default_rng(6))
    E2, B2 = fast_eigenmode_state(grid, np.random.default_rng(6))
    assert np.array_equal(E1.coeffs, E2.coeffs)
    assert np.array_equal(B1.coeffs, B2.coeffs)
    with pytest.raises(ValueError):
        fast_eigenmode_state(Grid(2, 16), np.random.default_rng(0))


def test_maxwell_energy_decay_vs_quadrature_oracle():
    # single slow transverse mode, no forcing: rebuild both report LHS
    # values from the exact mode evolution with adaptive quadrature
    from nsmaxwell.dyadic import _block_l2
    from nsmaxwell.propagators import maxwell_apply

    grid = Grid(2, 16, 16.0 * np.pi)
    part = build_partition(grid)
    E0 = single_mode_field(grid, (1, 0), 0.5)  # k = 0.125, transverse pol
    B0 = single_mode_field(grid, (1, 0), 0.25j)
    from nsmaxwell.grid import leray_project

    B0 = leray_project(B0)
    T, dt, alpha = 6.0, 0.002, 1.0
    energy, decay = check_maxwell_energy_decay(E0, B0, None, T, dt, alpha, part)

    q_values = list(part.shells())
    spec_data = NormSpec(0.0, 0.0, alpha)
    spec_decay = NormSpec(1.0, 0.0, alpha)

    def rows_at(t):
        E, B = maxwell_apply(E0, B0, t)
        return _block_l2(E, part), _block_l2(B, part)

    # tilde-Linf per shell via dense sampling, tilde-L2 via quad
    tgrid = np.linspace(0.0, T, 2401)
    all_E = np.array([rows_at(t)[0] for t in tgrid])
    all_B = np.array([rows_at(t)[1] for t in tgrid])
    wE = np.array([spec_data.shell_weight_sq(q) for q in q_values])
    wD = np.array([spec_decay.shell_weight_sq(q) for q in q_values])

    def linf_part(rows, w):
        return math.sqrt(float(np.sum(w * np.max(rows, axis=0) ** 2)))

    def l2_part(idx_fn, w):
        total = 0.0
        for i, q in enumerate(q_values):
            if w[i] == 0.0:
                continue
            val, _ = quad(lambda t: idx_fn(t)[i] ** 2, 0.0, T, limit=200)
            total += w[i] * val
        return math.sqrt(total)

    lhs_energy_oracle = (
        linf_part(all_E, wE)
        + l2_part(lambda t: rows_at(t)[0], wE)
        + linf_part(all_B, wE)
    )
    lhs_decay_oracle = l2_part(lambda t: rows_at(t)[1], wD)
    assert abs(energy.lhs[0] - lhs_energy_oracle) < 1e-6 * lhs_energy_oracle
    assert abs(decay.lhs[0] - lhs_decay_oracle) < 1e-6 * lhs_decay_oracle
    # RHS: pure data norm
    rhs_direct = math.sqrt(
        norm_hst(E0, part, spec_data) ** 2 + norm_hst(B0, part, spec_data) ** 2
    )
    assert abs(energy.rhs[0] - rhs_direct) < 1e-12 * rhs_direct


def test_maxwell_energy_decay_with_forcing_bounded():
    grid = Grid(2, 64, 16.0 * np.pi)
    part = build_partition(grid)
    rng = np.random.default_rng(2)
    E0, B0 = fast_eigenmode_state(grid, rng, k_max=0.2)
    G0 = gen_field(grid, rng, slope=1.0)
    energy, decay = check_maxwell_energy_decay(
        E0, B0, (G0, 1.0), T=8.0, dt=0.02, alpha=1.0, part=part
    )
    assert 0.0 < energy.max_ratio < 3.0
    assert 0.0 < decay.max_ratio < 1.0


# ---------------------------------------------------------------------------
# Product laws.


def test_product_law_unknown_id():
    with pytest.raises(ValueError):
        check_product_law("nope", 1.0)


@pytest.mark.parametrize("estimate_id", ["est1-2D", "est4-2D", "est3-uB-2D"])
def test_product_law_zero_factor_gives_zero_lhs(grid2, part2, estimate_id):
    zero = SeparableTrajectory(SpectralField.zeros(grid2), 2.0)
    live = SeparableTrajectory(random_field(grid2, seed=60, slope=1.0), 2.0)
    kwargs = (
        {"u": zero, "v": live}
        if estimate_id.startswith("est1")
        else {"E": zero, "B": live}
        if estimate_id.startswith("est4")
        else {"u": zero, "B": live}
    )
    rep = check_product_law(estimate_id, 10.0, part=part2, **kwargs)
    assert rep.lhs == [0.0]


def test_product_law_report_smoke_2d():
    spec = FieldEnsembleSpec(seed=1, count=3, d=2, n=32, slope=2.0)
    for estimate_id in ("est1-2D", "est4-2D", "est3-uB-2D"):
        rep = product_law_report(estimate_id, spec, T=10.0, bound=10.0)
        assert len(rep.ratios) == 3
        assert rep.max_ratio > 0.0
        assert rep.passed


def test_product_law_report_smoke_3d(grid3, part3):
    spec = FieldEnsembleSpec(seed=1, count=2, d=3, n=16, slope=2.0)
    for estimate_id in ("est1-3D", "est4-3D", "est3-uB-3D"):
        rep = product_law_report(estimate_id, spec, T=10.0, part=part3)
        assert len(rep.ratios) == 2
        assert rep.max_ratio > 0.0


def test_pinned_bounds_table_consistent():
    assert set(PINNED_BOUNDS) == set(PRODUCT_LAW_IDS)
    assert all(b > 0 for b in PINNED_BOUNDS.values())


# ---------------------------------------------------------------------------
# Logarithmic criticality.


def test_log_criticality_smoke():
    rows = log_criticality_experiment((2, 3), seed=0, T=10.0)
    assert [r[0] for r in rows] == [2, 3]
    for q, lhs, rhs_unw, rhs_w, ratio_unw, ratio_w in rows:
        assert lhs > 0 and rhs_unw > 0 and rhs_w > 0
        assert abs(ratio_unw - lhs / rhs_unw) < 1e-12
        # the log-weighted norm is larger on these shell-q fields,
        # so its ratio is smaller
        assert ratio_w < ratio_unw


def test_fit_growth_exponent_on_power_law():
    qs = np.array([2.0, 4.0, 8.0, 16.0])
    ratios = 3.0 * qs**1.25
    assert abs(fit_growth_exponent(qs, ratios) - 1.25) < 1e-12
