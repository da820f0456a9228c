"""Discrete fractional maximal operators, commutators and Lipschitz seminorm estimators.

Every window W contributes the value vol(W)^(α/n) · (Σ_W |f|)/count(W), which
equals vol(W)^(α/n-1)·∫_W|f|. The same expression is used by every code path
(and by the brute-force oracles in the tests), so identities between
operators can be checked bit for bit on dyadic data.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import BALL, BOX, CUBE, PERIODIC, ZERO, Grid, SampledFunction, Window, WindowFamily, summed_area

MAX_BOX_TABLE = 2**24

NEG = -np.inf


@dataclass(frozen=True)
class OperatorParams:
    alpha: float
    family: WindowFamily
    beta: float | None = None

    def validate(self, grid: Grid) -> None:
        n = grid.dim
        if not 0.0 <= self.alpha < n:
            raise ValueError(f"need 0 <= alpha < n, got alpha={self.alpha}, n={n}")
        if self.beta is not None:
            if not 0.0 < self.beta < 1.0:
                raise ValueError("need 0 < beta < 1")
            if not 0.0 < self.alpha + self.beta < n:
                raise ValueError("need 0 < alpha + beta < n")
        self.family.validate(grid)


def window_weight(counts, grid: Grid, alpha: float):
    """vol^(α/n) for windows with the given cell counts.

    Weights come from one scalar-pow table indexed by the count, so every code
    path gets bit-identical values (vectorized pow may differ in the last ulp).
    """
    c = np.asarray(counts)
    idx = c.astype(np.int64)
    if np.any(idx != c) or np.any(idx < 0):
        raise ValueError("cell counts must be nonnegative integers")
    e = alpha / grid.dim
    if idx.ndim == 0:
        return math.pow(int(idx) * grid.cell_volume, e)
    top = int(idx.max()) if idx.size else 0
    return _weight_table(grid.cell_volume, e, top)[idx]


_WEIGHTS: dict = {}
_WEIGHT_LOCK = threading.Lock()


def _weight_table(cell: float, e: float, top: int) -> np.ndarray:
    with _WEIGHT_LOCK:
        t = _WEIGHTS.get((cell, e))
        if t is None or t.size <= top:
            size = max(top + 1, 2 * (0 if t is None else t.size))
            t = np.array([math.pow(k * cell, e) for k in range(size)])
            t.setflags(write=False)
            _WEIGHTS[(cell, e)] = t
        return t


def window_value(sums, counts, grid: Grid, alpha: float):
    counts = np.asarray(counts, dtype=float)
    return window_weight(counts, grid, alpha) * (np.asarray(sums, dtype=float) / counts)


# --- window sums at every centre ------------------------------------------------


def _slide(a: np.ndarray, k: int, axis: int, periodic: bool) -> np.ndarray:
    pad = [(0, 0)] * a.ndim
    pad[axis] = (k, k)
    p = np.pad(a, pad, mode="wrap" if periodic else "constant")
    c = np.cumsum(p, axis=axis)
    zero = np.zeros_like(np.take(c, [0], axis=axis))
    c = np.concatenate([zero, c], axis=axis)
    n = a.shape[axis]
    return np.take(c, np.arange(2 * k + 1, 2 * k + 1 + n), axis=axis) - np.take(c, np.arange(n), axis=axis)


def _footprint(dim: int, k: int) -> np.ndarray:
    off = np.arange(-k, k + 1)
    mesh = np.meshgrid(*([off] * dim), indexing="ij")
    return sum(m.astype(float) ** 2 for m in mesh) <= k * k


def centre_sums(values: np.ndarray, grid: Grid, shape: str, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(Σ_W values, count(W)) for the radius-k window centred at every cell."""
    periodic = grid.boundary == PERIODIC
    ones = np.ones(grid.shape)
    if shape == CUBE:
        s, c = values, ones
        for ax in range(grid.dim):
            s, c = _slide(s, k, ax, periodic), _slide(c, k, ax, periodic)
        return s, c
    if shape == BALL:
        fp = _footprint(grid.dim, k).astype(float)
        mode = "wrap" if periodic else "constant"
        return (ndimage.correlate(values, fp, mode=mode, cval=0.0),
                ndimage.correlate(ones, fp, mode=mode, cval=0.0))
    raise ValueError(f"no centred windows for shape {shape!r}")


def _spread_max(val: np.ndarray, grid: Grid, shape: str, k: int) -> np.ndarray:
    """At each x, max of ``val`` over the centres whose radius-k window contains x."""
    mode = "wrap" if grid.boundary == PERIODIC else "constant"
    if shape == CUBE:
        return ndimage.maximum_filter(val, size=2 * k + 1, mode=mode, cval=NEG)
    return ndimage.maximum_filter(val, footprint=_footprint(grid.dim, k), mode=mode, cval=NEG)


def _containment(grid: Grid, shape: str, k: int, region: np.ndarray) -> np.ndarray:
    """Centres whose radius-k window lies inside the boolean ``region``."""
    outside = (~region).astype(float)
    s, _ = centre_sums(outside, grid, shape, k)
    return s == 0.0


# --- box family -------------------------------------------------------------------


def _box_table(values: np.ndarray, grid: Grid, alpha: float, max_side: int, inside=None) -> np.ndarray:
    """Window values for every index box, indexed (l1, u1, l2, u2, ...); -inf where excluded."""
    n, N = grid.dim, grid.N
    if N ** (2 * n) > MAX_BOX_TABLE:
        raise ValueError("box family table too large for this grid")
    P = summed_area(values)
    lo_b, hi_b = inside if inside is not None else ((0,) * n, (N - 1,) * n)
    ar = np.arange(N)
    axes_l, axes_u, valid = [], [], np.ones((N, N) * n, dtype=bool)
    for a in range(n):
        shp_l = [1] * (2 * n)
        shp_l[2 * a] = N
        shp_u = [1] * (2 * n)
        shp_u[2 * a + 1] = N
        l, u = ar.reshape(shp_l), ar.reshape(shp_u)
        valid &= (u >= l) & (u - l + 1 <= max_side) & (l >= lo_b[a]) & (u <= hi_b[a])
        axes_l.append(l)
        axes_u.append(u)
    sums = 0.0
    for corner in itertools.product((0, 1), repeat=n):
        idx = tuple(axes_u[a] + 1 if c else axes_l[a] for a, c in enumerate(corner))
        sign = -1.0 if (n - sum(corner)) % 2 else 1.0
        sums = sums + sign * P[idx]
    count = 1
    for a in range(n):
        count = count * np.maximum(axes_u[a] - axes_l[a] + 1, 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        table = window_value(sums, count, grid, alpha)
    return np.where(valid, table, NEG)


def _box_sup(table: np.ndarray, n: int) -> np.ndarray:
    """sup over boxes containing x: suffix max over u, prefix max over l, read at l=u=x."""
    t = table
    for a in range(n):
        t = np.flip(np.maximum.accumulate(np.flip(t, axis=2 * a + 1), axis=2 * a + 1), axis=2 * a + 1)
        t = np.maximum.accumulate(t, axis=2 * a)
    N = table.shape[0]
    ar = np.arange(N)
    if n == 1:
        return t[ar, ar]
    return t[ar[:, None], ar[:, None], ar[None, :], ar[None, :]]


# --- operators ----------------------------------------------------------------------


def _sup_map(values: np.ndarray, grid: Grid, alpha: float, family: WindowFamily,
             region: np.ndarray | None = None, inside=None) -> np.ndarray:
    family.validate(grid)
    if family.shape == BOX:
        return _box_sup(_box_table(values, grid, alpha, family.max_side, inside), grid.dim)
    out = np.full(grid.shape, NEG)
    for k in family.radii:
        s, c = centre_sums(values, grid, family.shape, k)
        val = window_value(s, c, grid, alpha)
        if region is not None:
            val = np.where(_containment(grid, family.shape, k, region), val, NEG)
        out = np.maximum(out, _spread_max(val, grid, family.shape, k))
    return out


def fractional_maximal(f: SampledFunction, alpha: float, family: WindowFamily) -> SampledFunction:
    """M_α f(x) = sup over family windows W ∋ x of vol(W)^(α/n-1)·∫_W|f|; α = 0 gives M."""
    if not 0.0 <= alpha < f.grid.dim:
        raise ValueError("need 0 <= alpha < n")
    out = _sup_map(np.abs(f.values), f.grid, alpha, family)
    return SampledFunction(f.grid, out, True, f"M[{alpha:g}]")


def local_fractional_maximal(b: SampledFunction, B0: Window, alpha: float, family: WindowFamily) -> SampledFunction:
    """M_{α,B₀} b: sup over family windows W with x ∈ W ⊆ B₀, per-window normalization.

    Entries outside B₀ are not evaluated and are returned as 0.
    """
    g = b.grid
    if not family.includes(B0, g):
        raise ValueError("B0 must belong to the window family")
    mask = B0.mask(g)
    vals = np.where(mask, np.abs(b.values), 0.0)
    if family.shape == BOX:
        out = _sup_map(vals, g, alpha, family, inside=B0.bounds(g))
    else:
        out = _sup_map(vals, g, alpha, family, region=mask)
    return SampledFunction(g, np.where(mask, out, 0.0), True, f"M_local[{alpha:g}]")


def _point_stats(g_values: np.ndarray, grid: Grid, alpha: float, family: WindowFamily, x: tuple) -> float:
    """sup over family windows containing x of the window value of ``g_values``."""
    N = grid.N
    if family.shape == BOX:
        P = summed_area(g_values)
        L = family.max_side
        ranges = [(np.arange(max(0, xi - L + 1), xi + 1), np.arange(xi, min(N, xi + L))) for xi in x]
        n = grid.dim
        axes_l, axes_u, valid = [], [], True
        for a, (ls, us) in enumerate(ranges):
            shp_l = [1] * (2 * n)
            shp_l[2 * a] = ls.size
            shp_u = [1] * (2 * n)
            shp_u[2 * a + 1] = us.size
            l, u = ls.reshape(shp_l), us.reshape(shp_u)
            valid = valid & (u - l + 1 <= L)
            axes_l.append(l)
            axes_u.append(u)
        sums = 0.0
        for corner in itertools.product((0, 1), repeat=n):
            idx = tuple(axes_u[a] + 1 if c else axes_l[a] for a, c in enumerate(corner))
            sign = -1.0 if (n - sum(corner)) % 2 else 1.0
            sums = sums + sign * P[idx]
        count = 1
        for a in range(n):
            count = count * (axes_u[a] - axes_l[a] + 1)
        return float(np.max(np.where(valid, window_value(sums, count, grid, alpha), NEG)))
    if family.shape == CUBE:
        return _cube_point_sup(g_values, grid, alpha, family.radii, x)
    best = NEG
    periodic = grid.boundary == PERIODIC
    for k in family.radii:
        s, c = centre_sums(g_values, grid, family.shape, k)
        val = window_value(s, c, grid, alpha)
        idx = [np.arange(xi - k, xi + k + 1) for xi in x]
        keep = _footprint(grid.dim, k)
        if periodic:
            idx = [r % N for r in idx]
        else:
            for a, r in enumerate(idx):
                shp = [1] * grid.dim
                shp[a] = r.size
                keep = keep & ((r >= 0) & (r < N)).reshape(shp)
            idx = [np.clip(r, 0, N - 1) for r in idx]
        best = max(best, float(np.max(np.where(keep, val[np.ix_(*idx)], NEG))))
    return best


def _cube_point_sup(g_values: np.ndarray, grid: Grid, alpha: float, radii, x: tuple) -> float:
    """Cube-family sup at one point from a summed-area table of ``g_values``."""
    N, n = grid.N, grid.dim
    periodic = grid.boundary == PERIODIC
    P = summed_area(np.pad(g_values, N, mode="wrap") if periodic else g_values)
    best = NEG
    for k in radii:
        los, his = [], []
        for a, xi in enumerate(x):
            c = np.arange(xi - k, xi + k + 1)
            if periodic:
                lo, hi = c % N - k + N, c % N + k + N
            else:
                c = c[(c >= 0) & (c < N)]
                lo, hi = np.maximum(c - k, 0), np.minimum(c + k, N - 1)
            shp = [1] * n
            shp[a] = lo.size
            los.append(lo.reshape(shp))
            his.append(hi.reshape(shp))
        sums = 0.0
        for corner in itertools.product((0, 1), repeat=n):
            idx = tuple(his[a] + 1 if cc else los[a] for a, cc in enumerate(corner))
            sign = -1.0 if (n - sum(corner)) % 2 else 1.0
            sums = sums + sign * P[idx]
        count = 1
        for a in range(n):
            count = count * (his[a] - los[a] + 1)
        best = max(best, float(np.max(window_value(sums, count, grid, alpha))))
    return best


def maximal_commutator(b: SampledFunction, f: SampledFunction, alpha: float, family: WindowFamily,
                       workers: int = 1) -> SampledFunction:
    """M_{b,α} f(x) = sup_{W∋x} vol(W)^(α/n-1)·∫_W |b(x)-b(y)||f(y)| dy.

    The integrand depends on x, so window sums are rebuilt per evaluation point.
    """
    g = f.grid
    family.validate(g)
    af = np.abs(f.values)
    points = list(itertools.product(range(g.N), repeat=g.dim))

    def one(x):
        return _point_stats(np.abs(b.values[x] - b.values) * af, g, alpha, family, x)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(one, points))
    else:
        vals = [one(x) for x in points]
    return SampledFunction(g, np.array(vals).reshape(g.shape), True, f"Mb[{alpha:g}]")


def nonlinear_commutator(b: SampledFunction, f: SampledFunction, alpha: float, family: WindowFamily) -> SampledFunction:
    """[b, M_α] f = b·M_α f − M_α(b f); may be negative."""
    mf = fractional_maximal(f, alpha, family).values
    mbf = fractional_maximal(b * f, alpha, family).values
    return SampledFunction(f.grid, b.values * mf - mbf, False, f"[b,M][{alpha:g}]")


# --- Lipschitz seminorms -------------------------------------------------------------

DIRECT_PAIRS = "direct"
MEAN_OSCILLATION = "oscillation"


def lipschitz_seminorm(b: SampledFunction, beta: float, method: str = DIRECT_PAIRS,
                       family: WindowFamily | None = None) -> float:
    """Estimate ‖b‖ in the homogeneous Lipschitz space of order β.

    ``direct``: max over grid pairs of |b(x)-b(y)|/|x-y|^β.
    ``oscillation``: sup over family windows of vol^(-1-β/n)·∫_W |b - b_W|.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("need 0 < beta < 1")
    g = b.grid
    if method == DIRECT_PAIRS:
        pts = np.stack([c.ravel() for c in g.coords()], axis=1)
        v = b.values.ravel()
        best = 0.0
        for i in range(v.size - 1):
            d = np.sqrt(np.sum((pts[i + 1:] - pts[i]) ** 2, axis=1))
            best = max(best, float(np.max(np.abs(v[i + 1:] - v[i]) / d**beta)))
        return best
    if method == MEAN_OSCILLATION:
        fam = family or WindowFamily()
        best = 0.0
        for w in fam.windows(g):
            if w.shape == BALL or g.boundary == PERIODIC:
                sub = b.values[w.mask(g)]
            else:
                lo, hi = w.bounds(g)
                sub = b.values[tuple(slice(l, u + 1) for l, u in zip(lo, hi))].ravel()
            vol = g.volume(sub.size)
            osc = float(np.sum(np.abs(sub - sub.mean())) * g.cell_volume)
            best = max(best, osc / vol ** (1.0 + beta / g.dim))
        return best
    raise ValueError(f"unknown method {method!r}")


def geometric_constant(grid: Grid, family: WindowFamily, beta: float) -> float:
    """max over family windows of (diameter of cell centres / vol^(1/n))^β, rounded up.

    Bounds sup_{y∈W}|x−y|^β by this constant times vol(W)^(β/n); equals 1 in 1-D.
    """
    if grid.dim == 1:
        return 1.0
    best = 0.0
    if family.shape == BOX:
        L = min(family.max_side, grid.N)
        for sides in itertools.product(range(1, L + 1), repeat=grid.dim):
            diam = math.sqrt(sum((s - 1) ** 2 for s in sides)) * grid.h
            best = max(best, diam / grid.volume(math.prod(sides)) ** (1.0 / grid.dim))
    elif family.shape == CUBE:
        # clipped cubes are boxes; only the multiset of side lengths matters
        shapes = set()
        for k in family.radii:
            for c in range(grid.N):
                lo, hi = (max(c - k, 0), min(c + k, grid.N - 1)) if grid.boundary == ZERO else (c - k, c + k)
                shapes.add((k, hi - lo + 1))
        for k in family.radii:
            sides = sorted({s for kk, s in shapes if kk == k})
            for combo in itertools.product(sides, repeat=grid.dim):
                diam = math.sqrt(sum((s - 1) ** 2 for s in combo)) * grid.h
                best = max(best, diam / grid.volume(math.prod(combo)) ** (1.0 / grid.dim))
    else:
        for w in family.windows(grid):
            m = w.mask(grid)
            idx = np.argwhere(m)
            ext = idx.max(axis=0) - idx.min(axis=0)
            diam = math.sqrt(float(np.sum(ext.astype(float) ** 2))) * grid.h
            best = max(best, diam / grid.volume(int(m.sum())) ** (1.0 / grid.dim))
    return best**beta * (1.0 + 1e-12)
