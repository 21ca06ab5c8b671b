import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsmaxwell.grid import Grid, SpectralField, lp_norm_physical, pointwise_product
from nsmaxwell.dyadic import (
    DyadicBlocks,
    NormSpec,
    bony_decompose,
    block,
    build_partition,
    chi_profile,
    low_pass,
    norm_besov,
    norm_hst,
    phi_profile,
    shell_series,
    spacetime_norm_from_series,
)

from conftest import random_field, single_mode_field


def test_profile_supports():
    r = np.array([0.0, 0.74, 0.7499, 2.7, 3.0])
    assert np.all(phi_profile(r[:3]) == 0.0)
    assert np.all(phi_profile(r[3:]) == 0.0)
    assert phi_profile(1.0) > 0.0
    assert chi_profile(0.74) == 1.0
    assert chi_profile(4.0 / 3.0 + 1e-9) == 0.0


def test_partition_of_unity(grid2, part2):
    total = part2.partition_sum()
    resolved = ~grid2.nyquist_mask()
    resolved[(0, 0)] = False
    assert np.max(np.abs(total[resolved] - 1.0)) < 1e-12
    assert total[(0, 0)] == 0.0


def test_shell_disjointness(part2):
    for q in part2.shells():
        for j in part2.shells():
            if abs(q - j) >= 2:
                prod = part2.weight(q) * part2.weight(j)
                assert np.max(np.abs(prod)) == 0.0


def test_block_out_of_range(grid2, part2):
    f = random_field(grid2)
    with pytest.raises(ValueError):
        block(f, part2, part2.q_max + 1)


def test_blocks_reconstruct(grid2, part2):
    f = random_field(grid2, seed=11)
    f.set_mean((0.3, -0.1, 0.2))
    blocks = DyadicBlocks.decompose(f, part2)
    rec = blocks.reconstruct()
    mean_removed = f.copy()
    mean_removed.set_mean((0.0, 0.0, 0.0))
    scale = np.max(np.abs(f.coeffs))
    assert np.max(np.abs(rec.coeffs - mean_removed.coeffs)) < 1e-12 * scale


def test_low_pass_limits(grid2, part2):
    f = random_field(grid2, seed=12)
    f.set_mean((1.0, 0.0, 0.0))
    lo = low_pass(f, part2, part2.q_min)
    assert np.allclose(lo.mean(), f.mean())
    nonmean = lo.copy()
    nonmean.set_mean((0.0, 0.0, 0.0))
    assert np.max(np.abs(nonmean.coeffs)) == 0.0
    full = low_pass(f, part2, part2.q_max + 1)
    assert np.max(np.abs(full.coeffs - f.coeffs)) < 1e-12 * np.max(np.abs(f.coeffs))


def test_norm_hst_pinned_single_shell():
    # Field supported where only shell q=3 is active (phi weight exactly 1),
    # unit block norm: Definition weight sqrt(q^alpha 2^{2qt}) with
    # (t=1/2, alpha=1) gives sqrt(3 * 2^3) = sqrt(24).
    grid = Grid(2, 64)
    part = build_partition(grid)
    vol = grid.box_length**2
    amp = 1.0 / math.sqrt(2.0 * vol)
    f = single_mode_field(grid, (11, 0), amp)
    assert abs(lp_norm_physical(f, 2) - 1.0) < 1e-12
    b3 = block(f, part, 3)
    assert abs(lp_norm_physical(b3, 2) - 1.0) < 1e-12
    val = norm_hst(f, part, NormSpec(s=0.0, t=0.5, alpha=1.0))
    assert abs(val - math.sqrt(24.0)) < 1e-12


def test_norm_hst_vs_direct_sobolev_sum(grid2, part2):
    f = random_field(grid2, seed=13, slope=1.0)
    s = 0.7
    val = norm_hst(f, part2, NormSpec.sobolev(s))
    kmag = grid2.k_magnitude()
    power = np.sum(np.abs(f.coeffs) ** 2, axis=0)
    vol = grid2.box_length**2
    direct = math.sqrt(vol * float(np.sum(np.where(kmag > 0, kmag ** (2 * s), 0.0) * power)))
    ratio = val / direct
    assert 0.5 <= ratio <= 2.0


def test_besov_22_equals_hst(grid2, part2):
    f = random_field(grid2, seed=14)
    s = -0.5
    assert abs(
        norm_besov(f, part2, s, 2, 2) - norm_hst(f, part2, NormSpec.sobolev(s))
    ) < 1e-12 * norm_hst(f, part2, NormSpec.sobolev(s))


def test_besov_zero_and_exponent_validation(grid2, part2):
    assert norm_besov(SpectralField.zeros(grid2), part2, 1.0, 2, 1) == 0.0
    with pytest.raises(ValueError):
        norm_besov(random_field(grid2), part2, 1.0, 3, 1)
    with pytest.raises(ValueError):
        NormSpec(0.0, 0.0, alpha=-1.0)


def test_besov_d2_embedding_dominates_linf(grid2, part2):
    # || . ||_{B^{d/2}_{2,1}} controls L^inf: measure the min ratio.
    ratios = []
    for seed in range(5):
        f = random_field(grid2, seed=100 + seed, slope=1.5)
        f.set_mean((0.0, 0.0, 0.0))
        ratios.append(
            norm_besov(f, part2, 1.0, 2, 1) / lp_norm_physical(f, np.inf)
        )
    assert min(ratios) > 0.05


def test_bony_reconstruction(grid2, part2):
    u = random_field(grid2, seed=15)
    v = random_field(grid2, seed=16)
    u.set_mean((0.2, 0.0, 0.0))
    v.set_mean((0.0, 0.1, 0.0))
    for combiner in ("scalar", "cross"):
        t_uv, t_vu, r = bony_decompose(u, v, part2, combiner)
        total = t_uv + t_vu + r
        direct = pointwise_product(u, v, combiner)
        scale = np.max(np.abs(direct.coeffs)) + 1e-300
        assert np.max(np.abs(total.coeffs - direct.coeffs)) < 1e-12 * scale


def test_bony_separated_shells_land_in_one_paraproduct(part2):
    grid = part2.grid
    u = single_mode_field(grid, (1, 0), 1.0, component=0)   # shell ~0
    v = single_mode_field(grid, (8, 0), 1.0, component=0)   # shell ~3
    t_uv, t_vu, r = bony_decompose(u, v, part2, "scalar")
    direct = pointwise_product(u, v, "scalar")
    scale = np.max(np.abs(direct.coeffs))
    assert np.max(np.abs(t_uv.coeffs - direct.coeffs)) < 1e-12 * scale
    assert np.max(np.abs(t_vu.coeffs)) < 1e-12 * scale
    assert np.max(np.abs(r.coeffs)) < 1e-12 * scale


def _static_series(f, part, T=1.0, samples=11):
    times = np.linspace(0.0, T, samples)
    return shell_series([f] * samples, times, part)


def test_spacetime_constant_in_time(grid2, part2):
    f = random_field(grid2, seed=17)
    series = _static_series(f, part2)
    static = norm_hst(f, part2, NormSpec.sobolev(0.5))
    for tilde in (True, False):
        spec = NormSpec.sobolev(0.5, time_exponent=np.inf, tilde=tilde)
        assert abs(spacetime_norm_from_series(series, spec) - static) < 1e-12 * static


def test_spacetime_single_shell_tilde_equals_plain(part2):
    grid = part2.grid
    fields = [
        single_mode_field(grid, (4, 4), 0.5 * math.exp(-0.3 * i)) for i in range(9)
    ]
    series = shell_series(fields, np.linspace(0, 1, 9), part2)
    for r in (1, 2, np.inf):
        a = spacetime_norm_from_series(series, NormSpec.sobolev(0.3, time_exponent=r, tilde=True))
        b = spacetime_norm_from_series(series, NormSpec.sobolev(0.3, time_exponent=r, tilde=False))
        assert abs(a - b) < 1e-12 * max(a, 1e-300)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_tilde_linf_dominates_plain_linf(seed):
    grid = Grid(2, 16)
    part = build_partition(grid)
    rng = np.random.default_rng(seed)
    fields = []
    for i in range(6):
        f = SpectralField.from_physical(grid, rng.standard_normal((3,) + grid.shape))
        f.dealias()
        f.zero_nyquist()
        fields.append(f)
    series = shell_series(fields, np.linspace(0, 1, 6), part)
    spec = NormSpec.sobolev(0.5, time_exponent=np.inf, tilde=True)
    tilde = spacetime_norm_from_series(series, spec)
    plain = spacetime_norm_from_series(
        series, NormSpec.sobolev(0.5, time_exponent=np.inf, tilde=False)
    )
    assert plain <= tilde * (1.0 + 1e-12)


def test_shell_series_validation(grid2, part2):
    f = random_field(grid2)
    with pytest.raises(ValueError):
        shell_series([f], [0.0], part2)
    with pytest.raises(ValueError):
        shell_series([f, f, f], [0.0, 0.1, 0.3], part2)
