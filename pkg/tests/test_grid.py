import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczlab import grid as G
from orliczlab import operators as O


def pair_oracle(b, beta):
    """Plain double loop over unordered point pairs."""
    g = b.grid
    pts = list(itertools.product(range(g.N), repeat=g.dim))
    best = 0.0
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            d = np.sqrt(sum(((a - c) * g.h) ** 2 for a, c in zip(x, y)))
            best = max(best, abs(b.values[x] - b.values[y]) / d**beta)
    return best


def test_constant_sample():
    g = G.Grid(2, 8, 0.5)
    assert np.all(G.constant(g).values == 1.0)
    assert np.all(G.sample(lambda x, y: 1.0 + 0 * x, g).values == 1.0)


def test_indicator_inside_outside():
    g = G.Grid(2, 16)
    w = G.Window.cube(g.origin, 3)
    f = G.indicator(w, g)
    assert f.values.sum() == 49
    assert set(np.unique(f.values)) == {0.0, 1.0}
    assert f.values[g.origin] == 1.0 and f.values[0, 0] == 0.0


def test_spike_clip_at_origin():
    g = G.Grid(1, 32, 0.25)
    s = G.spike(g, 0.5)
    assert s.values[g.origin] == pytest.approx((0.125) ** -0.5, rel=1e-15)
    assert s.values[g.origin[0] + 4] == pytest.approx(1.0, rel=1e-15)


def test_nonfinite_values_rejected_with_location():
    g = G.Grid(1, 8)
    v = np.zeros(8)
    v[5] = np.nan
    with pytest.raises(ValueError, match="index \\(5,\\)"):
        G.SampledFunction(g, v)


def test_values_are_read_only():
    f = G.constant(G.Grid(1, 8))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_cube_cell_count():
    g = G.Grid(3, 16)
    assert G.Window.cube(g.origin, 2).count(g) == 125


def test_zero_boundary_clips():
    g = G.Grid(1, 16)
    w = G.Window.cube((1,), 3)
    assert w.count(g) == 5
    assert w.volume(g) == 5.0


def test_ball_mask_2d():
    g = G.Grid(2, 16)
    assert G.Window.ball(g.origin, 2).count(g) == 13


def test_own_window_integral():
    g = G.Grid(2, 16, 0.5)
    w = G.Window.cube((5, 9), 2)
    assert G.window_integral(G.indicator(w, g), w) == pytest.approx(w.volume(g), rel=1e-15)


@pytest.mark.parametrize("k", [0, 1, 3, 6])
def test_constant_cube_integral_1d(k):
    g = G.Grid(1, 32, 0.125)
    w = G.Window.cube(g.origin, k)
    assert G.window_integral(G.constant(g), w) == pytest.approx((2 * k + 1) * 0.125, rel=1e-15)


def test_prefix_sum_matches_naive(rng):
    for boundary in (G.ZERO, G.PERIODIC):
        g = G.Grid(2, 24, 0.3, boundary)
        f = G.SampledFunction(g, rng.normal(size=g.shape))
        for _ in range(100):
            c = tuple(int(x) for x in rng.integers(0, 24, 2))
            w = G.Window.cube(c, int(rng.integers(0, 11)))
            naive = float(f.values[w.mask(g)].sum() * g.cell_volume)
            assert G.window_integral(f, w) == pytest.approx(naive, rel=1e-12, abs=1e-12)


def test_ball_integral_masked():
    g = G.Grid(2, 16)
    f = G.sample(lambda x, y: x * x + y, g)
    w = G.Window.ball((7, 9), 3)
    assert G.window_integral(f, w) == pytest.approx(float(f.values[w.mask(g)].sum()))


def test_single_cone_seminorm():
    g = G.Grid(1, 256, 1.0 / 256)
    b, bound = G.synth_lipschitz(0.5, [((0.0,), 1.0)], g)
    assert bound == 1.0
    est = O.lipschitz_seminorm(b, 0.5)
    assert 0.95 <= est <= 1.0 + 1e-12


def test_empty_cone_list():
    g = G.Grid(1, 16)
    b, bound = G.synth_lipschitz(0.5, [], g)
    assert bound == 0.0 and np.all(b.values == 0.0)
    assert O.lipschitz_seminorm(b, 0.5) == 0.0


def test_two_cones_bound(rng):
    g = G.Grid(1, 48, 1.0 / 48)
    b, bound = G.synth_lipschitz(0.4, [((-0.2,), 1.0), ((0.25,), -1.0)], g)
    assert bound == 2.0
    est = O.lipschitz_seminorm(b, 0.4)
    assert est == pytest.approx(pair_oracle(b, 0.4), rel=1e-14)
    assert est <= 2.0


def test_direct_estimator_matches_pair_oracle_2d(rng):
    g = G.Grid(2, 6, 0.5)
    b = G.SampledFunction(g, rng.normal(size=g.shape))
    assert O.lipschitz_seminorm(b, 0.3) == pytest.approx(pair_oracle(b, 0.3), rel=1e-14)


@pytest.mark.parametrize("spec,check", [
    ("const:c=2", lambda v: np.all(v == 2.0)),
    ("indicator:radius=2", lambda v: v.sum() == 5),
    ("step:at=0", lambda v: v.sum() == 8),
    ("spike:gamma=0.5", lambda v: v.max() == pytest.approx(2**0.5)),
    ("cone:beta=0.5", lambda v: v.min() == 0.0),
])
def test_function_specs(spec, check):
    assert check(G.function_from_spec(spec, G.Grid(1, 16)).values)


def test_unknown_function_spec():
    with pytest.raises(ValueError):
        G.function_from_spec("gauss", G.Grid(1, 16))


@pytest.mark.parametrize("suffix,dim", [(".grid", 2), (".csv", 1)])
def test_save_load_roundtrip(tmp_path, rng, suffix, dim):
    g = G.Grid(dim, 8, 0.25)
    f = G.SampledFunction(g, rng.normal(size=g.shape))
    path = tmp_path / f"f{suffix}"
    G.save_function(f, path)
    back = G.load_function(path)
    assert np.array_equal(back.values, f.values)
    assert back.grid.N == 8 and back.grid.h == pytest.approx(0.25)


def test_family_enumeration_order_and_size():
    g = G.Grid(1, 8)
    fam = G.WindowFamily(G.CUBE, (0, 2))
    ws = list(fam.windows(g))
    assert len(ws) == 16
    assert ws[0].radius == 0 and ws[-1].radius == 2


def test_periodic_family_width_limit():
    with pytest.raises(ValueError):
        G.WindowFamily(G.CUBE, (5,)).validate(G.Grid(1, 8, boundary=G.PERIODIC))


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(1, 2), N=st.integers(5, 14), c=st.floats(-3, 3), data=st.data())
def test_periodic_constant_integral_every_placement(dim, N, c, data):
    g = G.Grid(dim, N, 0.5, G.PERIODIC)
    k = data.draw(st.integers(0, (N - 1) // 2))
    center = tuple(data.draw(st.integers(0, N - 1)) for _ in range(dim))
    w = G.Window.cube(center, k)
    got = G.window_integral(G.constant(g, c), w)
    assert got == pytest.approx(w.volume(g) * c, rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(beta=st.floats(0.1, 0.9), seed=st.integers(0, 2**32 - 1))
def test_cone_bound_never_exceeded(beta, seed):
    rng = np.random.default_rng(seed)
    g = G.Grid(1, 24, 1.0 / 24)
    cones = [((float(rng.uniform(-0.5, 0.5)),), float(rng.uniform(-2, 2))) for _ in range(3)]
    b, bound = G.synth_lipschitz(beta, cones, g)
    assert O.lipschitz_seminorm(b, beta) <= bound * (1 + 1e-12)
