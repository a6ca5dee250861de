import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardyergodic import arcs, expsum, hardy
from hardyergodic.arcs import ArcConfig
from hardyergodic.lattice import LatticeFunction

T15 = [hardy.parse("t^1.5")]
T15_25 = [hardy.parse("t^1.5"), hardy.parse("t^2.5")]
CFG = ArcConfig()


# -- cutoffs -------------------------------------------------------------------


def test_psi_examples():
    assert arcs.psi(0.0) == 1.0 and arcs.psi(0.5) == 1.0 and arcs.psi(1.0) == 0.0
    assert arcs.psi(0.75) == 0.5
    assert arcs.psi(-0.6) == arcs.psi(0.6)
    x = np.random.default_rng(3).uniform(-2, 2, 100)
    assert np.array_equal(arcs.psi(x), arcs.psi(-x))


def test_psi_shape_and_smoothness():
    x = np.arange(-1.2, 1.2, 1e-3)
    y = arcs.psi(x)
    assert np.all((y >= 0) & (y <= 1))
    assert np.all(y[np.abs(x) <= 0.5] == 1) and np.all(y[np.abs(x) >= 1] == 0)
    right = (x >= 0.5) & (x <= 1.0)
    assert np.all(np.diff(y[right]) <= 0)
    # finite differences up to order 4, scaled by h^k, stay bounded
    h = 1e-3
    for k, cap in zip(range(1, 5), (10.0, 200.0, 1e4, 1e6)):
        d = np.diff(y, n=k) / h**k
        assert np.max(np.abs(d)) < cap


def test_psi_leq_examples():
    assert arcs.dyadic_scale(0.3) == 0.5
    assert arcs.dyadic_scale(0.5) == 0.5
    assert arcs.dyadic_scale(0.5000001) == 1.0
    assert arcs.psi_leq(0.3, 0.25) == 1.0
    assert arcs.psi_leq(0.3, 0.6) == 0.0
    assert arcs.psi_leq(0.5, 0.25) == 1.0
    with pytest.raises(ValueError):
        arcs.dyadic_scale(0.0)


def test_arc_config_validation():
    with pytest.raises(ValueError):
        ArcConfig(C0=0)
    with pytest.raises(ValueError):
        ArcConfig(grid_size=100)
    assert ArcConfig(grid_size=128).grid_size == 128


def test_major_arc_level():
    assert arcs.major_arc_level(CFG, 2**16) == 4
    assert arcs.major_arc_level(CFG, 2**12) == 3
    assert arcs.major_arc_level(ArcConfig(C0=2), 2**16) == 8


# -- annular pieces ------------------------------------------------------------


def test_phi_examples():
    assert arcs.phi_Nl(CFG, T15_25, 64, -2, (0.0, 0.0)) == 1.0
    assert arcs.phi_Nl(CFG, T15_25, 64, 1, (0.0, 0.0)) == 0.0
    with pytest.raises(ValueError):
        arcs.phi_Nl(CFG, T15, 64, -3, 0.0)


@pytest.mark.parametrize("N", [64, 2**12, 2**16])
def test_phi_telescopes(N):
    fam = T15_25
    rng = np.random.default_rng(N)
    box = expsum.major_arc_box(fam, N, arcs.major_arc_level(CFG, N) + 1).half_widths
    pts = rng.uniform(-1, 1, size=(10**4, 2)) * np.array(box)
    lN = arcs.major_arc_level(CFG, N)
    total = sum(arcs.phi_Nl(CFG, fam, N, l, pts) for l in range(-CFG.C1, lN + 1))
    assert np.max(np.abs(total - arcs.major_symbol(CFG, fam, N, pts))) <= 1e-12


@given(st.integers(min_value=-2, max_value=6), st.floats(min_value=-1, max_value=1), st.floats(min_value=-1, max_value=1))
def test_annular_piece_support(l, u, v):
    piece = arcs.AnnularPiece(2**10, l, tuple(T15_25))
    outer = piece.outer_box()
    inner = piece.inner_box()
    val = piece(CFG, (u * 0.5, v * 0.5))
    assert -1.0 <= val <= 1.0
    if abs(u * 0.5) >= outer[0] or abs(v * 0.5) >= outer[1]:
        assert val == 0.0
    # points inside the inner box
    p = (u * inner[0], v * inner[1])
    if l > -CFG.C1:
        assert piece(CFG, p) == 0.0


# -- projections ---------------------------------------------------------------


def _plateau_function(N, size=24):
    # a slowly varying modulated bump whose DFT sits inside the plateau
    x = np.arange(size) - size / 2
    return LatticeFunction((0,), np.exp(-(x / 6.0) ** 2) + 0j)


def test_project_major_reconstruction_and_grid():
    rng = np.random.default_rng(0)
    f = LatticeFunction((-3,), rng.standard_normal(20) + 1j * rng.standard_normal(20))
    fM = arcs.project_major(CFG, f, T15, 64)
    minor = f - fM
    assert np.allclose((fM + minor).values, f.embed(fM.lower, fM.shape).values, atol=1e-14)
    # the automatic grid passed the wraparound check
    S = arcs._symbol_on_grid(lambda p: arcs.major_symbol(CFG, T15, 64, p), fM.shape)
    assert arcs._wrap_fraction(S) < arcs.WRAP_TOLERANCE


def test_project_major_identity_on_plateau():
    # for tiny N the major box covers the whole torus plateau: symbol == 1
    f = LatticeFunction((0, 0), np.random.default_rng(2).standard_normal((6, 5)) + 0j)
    fam = [hardy.parse("0.001*t^1.5"), hardy.parse("0.001*t^2.5")]
    S = arcs.major_symbol(CFG, fam, 4, np.stack(np.meshgrid(np.fft.fftfreq(32), np.fft.fftfreq(32)), -1).reshape(-1, 2))
    assert np.all(S == 1.0)
    fM = arcs.project_major(CFG, f, fam, 4)
    assert np.max(np.abs(fM.values - f.embed(fM.lower, fM.shape).values)) < 1e-10
    again = arcs.project_major(CFG, fM, fam, 4)
    assert (again - fM).norm(np.inf) <= 1e-10 * fM.norm(np.inf)


def test_project_major_parseval_split():
    rng = np.random.default_rng(7)
    f = LatticeFunction((0,), rng.standard_normal(32) + 1j * rng.standard_normal(32))
    fM = arcs.project_major(CFG, f, T15, 64)
    fe = f.embed(fM.lower, fM.shape)
    minor = fe - fM
    cross = 2 * fM.inner(minor).real
    assert fe.norm() ** 2 == pytest.approx(fM.norm() ** 2 + minor.norm() ** 2 + cross, rel=1e-12)
    assert abs(cross) > 1e-6


def test_project_major_grid_too_small():
    f = LatticeFunction((0,), np.ones(40) + 0j)
    with pytest.raises(arcs.GridTooSmallError):
        arcs.project_major(ArcConfig(grid_size=64), f, T15, 64)
    with pytest.raises(arcs.GridTooSmallError):
        # wide enough for the support, far too coarse for the narrow symbol
        arcs.project_major(ArcConfig(grid_size=256), f, T15, 4096)
    with pytest.raises(ValueError):
        arcs.project_major(CFG, f, T15_25, 64)


# -- operator ratios -----------------------------------------------------------


def test_operator_ratio_bounds_and_trend():
    r2 = arcs.minor_arc_operator_ratio(CFG, T15, 256, 2, trials=8, seed=1)
    r6 = arcs.minor_arc_operator_ratio(CFG, T15, 256, 6, trials=8, seed=1)
    assert 0 < r6 <= r2 + 0.02 and r2 <= 1.0
    with pytest.raises(ValueError):
        arcs.minor_arc_operator_ratio(CFG, T15, 256, 2, trials=4)


def test_operator_ratio_reproducible_and_thread_independent():
    a = arcs.operator_ratio_sweep(CFG, T15, [128], [1, 3], trials=8, seed=5)
    b = arcs.operator_ratio_sweep(CFG, T15, [128], [1, 3], trials=8, seed=5, workers=4)
    assert a == b
    assert a[0][:3] == (128, 1, 8)


def test_operator_ratio_is_the_multiplier_norm():
    # the cyclic operator is diagonal in the DFT basis, so a random-trial ratio
    # can never exceed the largest multiplier off the box
    N, l = 128, 2
    shape = arcs._cyclic_shape(CFG, T15, N)
    freqs = np.fft.fftfreq(shape[0])
    box = expsum.major_arc_box(T15, N, l).half_widths[0]
    off = freqs[np.abs(freqs) > box]
    sup = np.abs(expsum.m_discrete_many(T15, N, off)).max()
    assert arcs.minor_arc_operator_ratio(CFG, T15, N, l, trials=8) <= sup + 1e-12


@pytest.mark.parametrize("k", [1, 37, 300, 1000])
def test_pure_frequency_ratio(k):
    N = 256
    ratio, xi = arcs.pure_frequency_ratio(CFG, T15, N, [k])
    assert ratio == pytest.approx(abs(expsum.m_discrete(T15, N, xi, True)), abs=1e-10)


def test_pure_frequency_ratio_two_dimensions():
    fam = [hardy.parse("t^1.5"), hardy.parse("t^1.25")]
    ratio, xi = arcs.pure_frequency_ratio(CFG, fam, 32, [5, 17])
    assert ratio == pytest.approx(abs(expsum.m_discrete(fam, 32, xi, True)), abs=1e-10)


def test_cyclic_grid_too_small():
    with pytest.raises(arcs.GridTooSmallError):
        arcs.minor_arc_operator_ratio(ArcConfig(grid_size=16), T15, 256, 2, trials=8)


# -- Littlewood-Paley ----------------------------------------------------------


def test_lp_at_origin_and_telescoping():
    assert all(arcs.littlewood_paley_partition(T15_25, j, (0.0, 0.0)) == 0.0 for j in range(1, 10))
    rng = np.random.default_rng(11)
    pts = rng.uniform(-0.5, 0.5, size=(10**4, 2)) * rng.choice([1, 1e-2, 1e-4, 1e-6], size=(10**4, 1))
    J = 12
    total = sum(arcs.littlewood_paley_partition(T15_25, j, pts) for j in range(1, J + 1))
    assert np.max(np.abs(total + arcs.lp_envelope(T15_25, J + 1, pts) - arcs.lp_envelope(T15_25, 1, pts))) <= 1e-12
    with pytest.raises(ValueError):
        arcs.littlewood_paley_partition(T15, 0, 0.1)


@pytest.mark.parametrize("j", [1, 3, 6])
def test_lp_support_boxes(j):
    fam = T15_25
    outer = [1 / hardy.eval(P, 2.0**j) for P in fam]
    inner = [0.25 / hardy.eval(P, 2.0 ** (j + 1)) for P in fam]
    g = np.linspace(-1, 1, 81)
    U, V = np.meshgrid(g, g)
    # vanishes on the inner box
    pin = np.stack([U.ravel() * inner[0], V.ravel() * inner[1]], -1)
    assert np.all(arcs.littlewood_paley_partition(fam, j, pin) == 0.0)
    # vanishes off the outer box
    pout = np.stack([np.full(81, outer[0] * 1.0001), g * 0.5], -1)
    assert np.all(arcs.littlewood_paley_partition(fam, j, pout) == 0.0)


def test_square_function_zero_and_single_band():
    f0 = LatticeFunction((0,), np.zeros(8, dtype=complex))
    assert arcs.square_function(T15, f0, 4).norm() == 0.0
    with pytest.raises(arcs.GridTooSmallError):
        arcs.square_function(T15, f0, 4, grid_size=64)

    # a pure frequency on the periodic grid where only eta_1 is non-zero and equals 1
    G = 64
    xi = 5 / G
    fam = [hardy.parse("t^1.5")]
    etas = [arcs.littlewood_paley_partition(fam, j, xi) for j in range(1, 6)]
    assert etas[0] == 1.0 and all(e == 0.0 for e in etas[1:])
    f = LatticeFunction((0,), np.exp(2j * np.pi * xi * np.arange(G)))
    S = arcs.square_function(fam, f, 5, periodic=True)
    assert np.max(np.abs(S.values - np.abs(f.values))) < 1e-10


def test_square_function_parseval():
    rng = np.random.default_rng(5)
    G = 256
    f = LatticeFunction((0,), rng.standard_normal(G) + 1j * rng.standard_normal(G))
    j_max = 6
    S = arcs.square_function(T15, f, j_max, periodic=True)
    F = np.fft.fft(f.values)
    freqs = np.fft.fftfreq(G)
    rhs = sum(np.sum(np.abs(F * arcs.littlewood_paley_partition(T15, j, freqs)) ** 2) for j in range(1, j_max + 1)) / G
    assert S.norm() ** 2 == pytest.approx(rhs, rel=1e-12)


def test_square_function_on_padded_grid():
    f = LatticeFunction((5,), np.random.default_rng(1).standard_normal(12) + 0j)
    S = arcs.square_function(T15, f, 3)
    assert S.m == 1 and np.all(S.values >= 0)
    assert S.shape[0] >= 4 * 12


# -- short variation -----------------------------------------------------------


@pytest.mark.parametrize("k", [4, 6, 8])
def test_short_variation_instance(k):
    rng = np.random.default_rng(k)
    for xi in rng.uniform(-0.5, 0.5, 4):
        inst = arcs.short_variation_instance(T15, k, xi)
        assert inst.v2_average == pytest.approx(inst.v2_multiplier, rel=1e-12, abs=1e-14)
        assert inst.A <= 2 ** k * inst.a + 1e-15
        assert inst.holds(4.0)


def test_short_variation_two_dimensions():
    inst = arcs.short_variation_instance(T15_25, 5, (0.21, -0.33))
    assert inst.v2_average == pytest.approx(inst.v2_multiplier, rel=1e-12)
    assert inst.holds()
