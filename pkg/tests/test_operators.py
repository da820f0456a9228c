import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_sup, quantized_normal
from orliczlab import grid as G
from orliczlab import operators as O

CASES = [
    (1, 16, G.ZERO, G.CUBE),
    (1, 16, G.PERIODIC, G.CUBE),
    (1, 16, G.ZERO, G.BALL),
    (1, 16, G.ZERO, G.BOX),
    (2, 8, G.ZERO, G.CUBE),
    (2, 8, G.PERIODIC, G.BALL),
    (2, 6, G.ZERO, G.BOX),
]


def centred(grid, shape, r):
    if shape == G.BALL:
        return G.Window.ball(grid.origin, r)
    return G.Window.cube(grid.origin, r)


@pytest.mark.parametrize("dim,N,boundary,shape", CASES)
def test_operators_match_exhaustive_oracle(dim, N, boundary, shape, rng):
    g = G.Grid(dim, N, 0.5, boundary)
    fam = G.WindowFamily(shape, (0, 1, 2, 3) if N > 8 else (0, 1, 2))
    f = G.SampledFunction(g, quantized_normal(rng, g.shape))
    b = G.SampledFunction(g, quantized_normal(rng, g.shape))
    alpha = 0.25 * dim
    af, bv = np.abs(f.values), b.values

    assert np.array_equal(O.fractional_maximal(f, alpha, fam).values,
                          brute_sup(g, alpha, fam, lambda x: af))
    assert np.array_equal(O.maximal_commutator(b, f, alpha, fam).values,
                          brute_sup(g, alpha, fam, lambda x: np.abs(bv[x] - bv) * af))
    mb = brute_sup(g, alpha, fam, lambda x: af)
    mbf = brute_sup(g, alpha, fam, lambda x: np.abs(bv * f.values))
    assert np.array_equal(O.nonlinear_commutator(b, f, alpha, fam).values, bv * mb - mbf)

    B0 = centred(g, shape, 1)
    m = B0.mask(g)
    local = O.local_fractional_maximal(b, B0, alpha, fam).values
    oracle = brute_sup(g, alpha, fam, lambda x: np.abs(bv) * m, within=m)
    assert np.array_equal(local[m], oracle[m])
    assert np.all(local[~m] == 0.0)


def test_maximal_of_constant_is_one():
    g = G.Grid(2, 16, 0.25)
    out = O.fractional_maximal(G.constant(g), 0.0, G.WindowFamily())
    assert np.all(out.values == 1.0)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_indicator_in_family_gives_volume_power(alpha):
    g = G.Grid(2, 16, 0.25)
    fam = G.WindowFamily(G.BOX, (3,))
    B0 = G.Window.cube(g.origin, 3)
    m = O.fractional_maximal(G.indicator(B0, g), alpha, fam).values
    expected = O.window_weight(B0.count(g), g, alpha)
    assert np.all(m[B0.mask(g)] == expected)


def test_constant_multiplier_commutators_vanish(rng):
    g = G.Grid(1, 32, 1 / 32)
    f = G.SampledFunction(g, rng.normal(size=32))
    b = G.constant(g, 3.0)
    fam = G.WindowFamily()
    assert np.all(O.maximal_commutator(b, f, 0.3, fam).values == 0.0)
    assert np.allclose(O.nonlinear_commutator(b, f, 0.3, fam).values, 0.0, atol=1e-14)


def test_local_of_own_indicator():
    g = G.Grid(1, 32)
    B0 = G.Window.cube(g.origin, 4)
    fam = G.WindowFamily(G.BOX, (4,))
    loc = O.local_fractional_maximal(G.indicator(B0, g), B0, 0.5, fam).values
    assert np.all(loc[B0.mask(g)] == O.window_weight(9, g, 0.5))


def test_local_of_zero():
    g = G.Grid(1, 32)
    B0 = G.Window.cube(g.origin, 4)
    assert np.all(O.local_fractional_maximal(G.constant(g, 0.0), B0, 0.5, G.WindowFamily(G.BOX, (4,))).values == 0)


def test_local_rejects_window_outside_family():
    g = G.Grid(1, 32)
    with pytest.raises(ValueError):
        O.local_fractional_maximal(G.constant(g), G.Window.cube(g.origin, 5), 0.0, G.WindowFamily(G.CUBE, (1, 2)))


def test_commutator_lower_bound_on_window(rng):
    g = G.Grid(1, 64, 1 / 64)
    b = G.SampledFunction(g, rng.normal(size=64))
    fam = G.WindowFamily(G.CUBE, (0, 1, 2, 4, 8))
    B0 = G.Window.cube(g.origin, 4)
    m = B0.mask(g)
    mb = O.maximal_commutator(b, G.indicator(B0, g), 0.25, fam).values
    w0 = O.window_weight(B0.count(g), g, 0.25)
    lhs = w0 * np.abs(b.values - b.values[m].mean())
    assert np.all(lhs[m] <= mb[m] * (1 + 1e-14))


def test_seminorm_constant_zero():
    g = G.Grid(1, 32)
    for method in (O.DIRECT_PAIRS, O.MEAN_OSCILLATION):
        assert O.lipschitz_seminorm(G.constant(g, 5.0), 0.5, method) == 0.0


def test_seminorm_cone_window():
    g = G.Grid(1, 256, 1 / 256)
    b, _ = G.synth_lipschitz(0.5, [((0.0,), 1.0)], g)
    assert 0.95 <= O.lipschitz_seminorm(b, 0.5) <= 1.0


def test_oscillation_estimator_below_direct(rng):
    g = G.Grid(1, 64, 1 / 64)
    b, _ = G.synth_lipschitz(0.5, [((0.1,), 1.0), ((-0.3,), -0.5)], g)
    fam = G.WindowFamily(G.CUBE, (1, 2, 4, 8, 16))
    assert O.lipschitz_seminorm(b, 0.5, O.MEAN_OSCILLATION, fam) <= O.lipschitz_seminorm(b, 0.5)


def test_geometric_constant_one_dimensional():
    assert O.geometric_constant(G.Grid(1, 32), G.WindowFamily(), 0.5) == 1.0


def test_geometric_constant_square_cubes():
    g = G.Grid(2, 32, 0.5)
    fam = G.WindowFamily(G.CUBE, (2,))
    # worst case is a full 5x5 cube: diameter 4*sqrt(2)*h over side 5h
    expected = (4 * np.sqrt(2) / 5) ** 0.5
    assert O.geometric_constant(g, fam, 0.5) >= expected


def test_parameter_validation():
    g = G.Grid(1, 16)
    with pytest.raises(ValueError):
        O.OperatorParams(1.0, G.WindowFamily(), 0.5).validate(g)
    with pytest.raises(ValueError):
        O.OperatorParams(0.3, G.WindowFamily(), 0.8).validate(g)
    O.OperatorParams(0.3, G.WindowFamily(), 0.5).validate(g)


def test_parallel_commutator_identical(rng):
    g = G.Grid(2, 16, 1 / 16)
    b = G.SampledFunction(g, rng.normal(size=g.shape))
    f = G.SampledFunction(g, rng.normal(size=g.shape))
    fam = G.WindowFamily(G.CUBE, (0, 1, 3))
    serial = O.maximal_commutator(b, f, 0.5, fam).values
    assert np.array_equal(serial, O.maximal_commutator(b, f, 0.5, fam, workers=4).values)


grids = st.sampled_from([G.Grid(1, 24, 0.25), G.Grid(2, 10, 0.5), G.Grid(1, 24, 0.25, G.PERIODIC)])
families = st.sampled_from([G.WindowFamily(G.CUBE, (0, 1, 2, 4)), G.WindowFamily(G.BALL, (0, 2, 3))])


@settings(max_examples=40, deadline=None)
@given(g=grids, fam=families, seed=st.integers(0, 2**32 - 1), alpha=st.sampled_from([0.0, 0.25, 0.5]))
def test_sublinear_up_to_rounding(g, fam, seed, alpha):
    rng = np.random.default_rng(seed)
    f = G.SampledFunction(g, quantized_normal(rng, g.shape))
    h = G.SampledFunction(g, quantized_normal(rng, g.shape))
    lhs = O.fractional_maximal(f.with_values(f.values + h.values), alpha, fam).values
    rhs = O.fractional_maximal(f, alpha, fam).values + O.fractional_maximal(h, alpha, fam).values
    # window sums are exact on quantized data; only the division by an odd count rounds
    assert np.all(lhs <= rhs * (1 + 4 * np.finfo(float).eps))


@settings(max_examples=40, deadline=None)
@given(g=grids, fam=families, seed=st.integers(0, 2**32 - 1), k=st.integers(-6, 6))
def test_positively_homogeneous_exact(g, fam, seed, k):
    rng = np.random.default_rng(seed)
    f = G.SampledFunction(g, quantized_normal(rng, g.shape))
    c = 2.0**k
    assert np.array_equal(O.fractional_maximal(f * c, 0.5, fam).values,
                          c * O.fractional_maximal(f, 0.5, fam).values)


@settings(max_examples=30, deadline=None)
@given(g=st.sampled_from([G.Grid(1, 32, 1 / 32), G.Grid(2, 12, 1 / 12)]), r=st.integers(0, 4),
       alpha=st.sampled_from([0.0, 0.25, 0.5]))
def test_indicator_minorant(g, r, alpha):
    fam = G.WindowFamily(G.CUBE, (0, 1, 2, 3, 4))
    B0 = G.Window.cube(g.origin, r)
    m = O.fractional_maximal(G.indicator(B0, g), alpha, fam).values
    assert np.all(m[B0.mask(g)] >= O.window_weight(B0.count(g), g, alpha))


@settings(max_examples=25, deadline=None)
@given(g=st.sampled_from([G.Grid(1, 32, 1 / 32), G.Grid(2, 12, 1 / 12)]), seed=st.integers(0, 2**32 - 1),
       beta=st.sampled_from([0.3, 0.5]))
def test_commutator_under_fractional_times_seminorm(g, seed, beta):
    rng = np.random.default_rng(seed)
    fam = G.WindowFamily(G.CUBE, (0, 1, 2, 4))
    b, bound = G.synth_lipschitz(beta, [((0.0,) * g.dim, 1.0), (tuple(rng.uniform(-.3, .3, g.dim)), -0.7)], g)
    f = G.SampledFunction(g, rng.normal(size=g.shape))
    lhs = O.maximal_commutator(b, f, 0.25, fam).values
    rhs = bound * O.geometric_constant(g, fam, beta) * O.fractional_maximal(f, 0.25 + beta, fam).values
    assert np.all(lhs <= rhs)


@settings(max_examples=25, deadline=None)
@given(g=grids, fam=families, seed=st.integers(0, 2**32 - 1))
def test_nonlinear_under_maximal_commutator(g, fam, seed):
    rng = np.random.default_rng(seed)
    b = G.SampledFunction(g, np.abs(quantized_normal(rng, g.shape)))
    f = G.SampledFunction(g, quantized_normal(rng, g.shape))
    mf = O.fractional_maximal(f, 0.25, fam).values
    mbf = O.fractional_maximal(b * f, 0.25, fam).values
    lhs = np.abs(b.values * mf - mbf)
    # b·Mf is a rounded product, so allow a few ulps of the two terms
    allow = 8 * np.finfo(float).eps * (b.values * mf + mbf)
    assert np.all(lhs <= O.maximal_commutator(b, f, 0.25, fam).values + allow)


@settings(max_examples=25, deadline=None)
@given(g=grids, seed=st.integers(0, 2**32 - 1))
def test_larger_family_never_smaller(g, seed):
    rng = np.random.default_rng(seed)
    f = G.SampledFunction(g, rng.normal(size=g.shape))
    small = O.fractional_maximal(f, 0.25, G.WindowFamily(G.CUBE, (0, 2))).values
    big = O.fractional_maximal(f, 0.25, G.WindowFamily(G.CUBE, (0, 1, 2, 4))).values
    assert np.all(big >= small)
