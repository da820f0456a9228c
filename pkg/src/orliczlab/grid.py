"""Uniform grids, sampled functions, windows and fast window sums."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

ZERO = "zero"
PERIODIC = "periodic"
BOUNDARIES = (ZERO, PERIODIC)

CUBE = "cube"
BALL = "ball"
BOX = "box"
SHAPES = (CUBE, BALL, BOX)


@dataclass(frozen=True)
class Grid:
    """n-dimensional uniform grid with N cells per axis and spacing h.

    Cell i along an axis is centred at (i - N//2)·h, so the origin is a cell
    centre. ``boundary`` is ``"zero"`` (functions vanish off the grid and
    windows are clipped) or ``"periodic"`` (indices wrap).
    """

    dim: int
    N: int
    h: float = 1.0
    boundary: str = ZERO

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if self.N < 4:
            raise ValueError("need at least 4 points per axis")
        if not self.h > 0:
            raise ValueError("spacing must be positive")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def size(self) -> int:
        return self.N**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def origin(self) -> tuple:
        return (self.N // 2,) * self.dim

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.h

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays (ij indexing), one per axis."""
        return list(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    def point(self, idx) -> tuple:
        return tuple(float((i - self.N // 2) * self.h) for i in idx)

    def distance(self, center=None) -> np.ndarray:
        """Euclidean distance from ``center`` (coordinates, default origin) to every cell centre."""
        c = (0.0,) * self.dim if center is None else tuple(center)
        return np.sqrt(sum((x - ci) ** 2 for x, ci in zip(self.coords(), c)))

    def volume(self, count) -> float:
        return count * self.cell_volume

    def describe(self) -> str:
        return f"dim={self.dim} N={self.N} h={self.h!r} boundary={self.boundary}"


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)
    nonnegative: bool = False
    tag: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values have shape {v.shape}, grid needs {self.grid.shape}")
        bad = ~np.isfinite(v)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise ValueError(f"non-finite value at index {idx} (x={self.grid.point(idx)})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values, tag: str | None = None, nonnegative: bool = False) -> "SampledFunction":
        return SampledFunction(self.grid, values, nonnegative, self.tag if tag is None else tag)

    def abs(self) -> "SampledFunction":
        return SampledFunction(self.grid, np.abs(self.values), True, self.tag)

    def __mul__(self, other) -> "SampledFunction":
        ov = other.values if isinstance(other, SampledFunction) else other
        return self.with_values(self.values * ov)

    __rmul__ = __mul__

    @cached_property
    def prefix(self) -> np.ndarray:
        """Summed-area table with a leading zero slab on every axis."""
        v = self.values
        if self.grid.boundary == PERIODIC:
            v = np.pad(v, self.grid.N, mode="wrap")
        return summed_area(v)

    def box_sum(self, lo, hi) -> float:
        """Sum of values over the index box lo..hi (inclusive, may wrap when periodic)."""
        off = self.grid.N if self.grid.boundary == PERIODIC else 0
        return box_sum(self.prefix, [l + off for l in lo], [u + off for u in hi])


def summed_area(values: np.ndarray) -> np.ndarray:
    s = np.asarray(values, dtype=float)
    for ax in range(s.ndim):
        s = np.cumsum(s, axis=ax)
    return np.pad(s, [(1, 0)] * s.ndim)


def box_sum(prefix: np.ndarray, lo, hi) -> float:
    """Inclusion-exclusion over the 2^n corners of a summed-area table."""
    total = 0.0
    for corner in itertools.product((0, 1), repeat=len(lo)):
        idx = tuple(hi[a] + 1 if c else lo[a] for a, c in enumerate(corner))
        sign = -1 if (len(lo) - sum(corner)) % 2 else 1
        total += sign * prefix[idx]
    return float(total)


@dataclass(frozen=True)
class Window:
    """Grid-centred window: a cube or Euclidean ball of integer radius, or a box.

    For ``shape="box"`` the window is the index box ``lo..hi`` (inclusive) and
    ``center``/``radius`` are unused. Under the zero boundary windows are
    clipped to the grid; the volume counts member cells only.
    """

    shape: str
    center: tuple = ()
    radius: int = 0
    lo: tuple | None = None
    hi: tuple | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown window shape {self.shape!r}")
        if self.shape == BOX:
            if self.lo is None or self.hi is None or any(a > b for a, b in zip(self.lo, self.hi)):
                raise ValueError("box needs lo <= hi")
        elif self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @classmethod
    def cube(cls, center, radius: int) -> "Window":
        return cls(CUBE, tuple(int(c) for c in center), int(radius))

    @classmethod
    def ball(cls, center, radius: int) -> "Window":
        return cls(BALL, tuple(int(c) for c in center), int(radius))

    @classmethod
    def box(cls, lo, hi) -> "Window":
        return cls(BOX, lo=tuple(int(v) for v in lo), hi=tuple(int(v) for v in hi))

    def bounds(self, grid: Grid) -> tuple[tuple, tuple]:
        """Index box covering the window (clipped under the zero boundary)."""
        if self.shape == BOX:
            lo, hi = self.lo, self.hi
        else:
            lo = tuple(c - self.radius for c in self.center)
            hi = tuple(c + self.radius for c in self.center)
        if grid.boundary == ZERO:
            lo = tuple(max(v, 0) for v in lo)
            hi = tuple(min(v, grid.N - 1) for v in hi)
        elif any(u - l + 1 > grid.N for l, u in zip(lo, hi)):
            raise ValueError("periodic window wider than the grid")
        return lo, hi

    def mask(self, grid: Grid) -> np.ndarray:
        m = np.zeros(grid.shape, dtype=bool)
        lo, hi = self.bounds(grid)
        ranges = [np.arange(l, u + 1) for l, u in zip(lo, hi)]
        sub = np.ones([r.size for r in ranges], dtype=bool)
        if self.shape == BALL:
            offs = np.meshgrid(*[r - c for r, c in zip(ranges, self.center)], indexing="ij")
            sub = sum(o.astype(float) ** 2 for o in offs) <= self.radius**2
        m[np.ix_(*[r % grid.N for r in ranges])] = sub
        return m

    def count(self, grid: Grid) -> int:
        if self.shape == BALL:
            return int(self.mask(grid).sum())
        lo, hi = self.bounds(grid)
        return int(np.prod([u - l + 1 for l, u in zip(lo, hi)]))

    def volume(self, grid: Grid) -> float:
        return grid.volume(self.count(grid))

    def contains(self, grid: Grid, idx) -> bool:
        return bool(self.mask(grid)[tuple(idx)])

    def inside(self, other: "Window", grid: Grid) -> bool:
        return bool(np.all(other.mask(grid)[self.mask(grid)]))


@dataclass(frozen=True)
class WindowFamily:
    """Finite window family: every placement of each radius on the grid.

    For ``shape="box"`` the family is every axis-aligned index box whose sides
    have at most 2·max(radii)+1 cells; it is closed under intersection.
    """

    shape: str = CUBE
    radii: tuple = (0, 1, 2, 4, 8, 16)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown window shape {self.shape!r}")
        if not self.radii:
            raise ValueError("empty window family")
        if any(int(r) != r or r < 0 for r in self.radii):
            raise ValueError("radii must be nonnegative integers")
        object.__setattr__(self, "radii", tuple(sorted(set(int(r) for r in self.radii))))

    @property
    def max_side(self) -> int:
        return 2 * self.radii[-1] + 1

    def validate(self, grid: Grid) -> None:
        if grid.boundary == PERIODIC and self.max_side > grid.N:
            raise ValueError("periodic windows must satisfy 2k+1 <= N")
        if self.shape == BOX and (grid.dim > 2 or grid.boundary != ZERO):
            raise ValueError("box families need a zero-boundary grid of dimension 1 or 2")

    def includes(self, w: Window, grid: Grid) -> bool:
        if self.shape == BOX:
            lo, hi = w.bounds(grid)
            return w.shape != BALL and all(u - l + 1 <= self.max_side for l, u in zip(lo, hi))
        return w.shape == self.shape and w.radius in self.radii

    def windows(self, grid: Grid):
        """Enumerate every window of the family in a fixed order."""
        self.validate(grid)
        if self.shape == BOX:
            spans = [(l, u) for l in range(grid.N) for u in range(l, min(grid.N, l + self.max_side))]
            for combo in itertools.product(spans, repeat=grid.dim):
                yield Window.box([c[0] for c in combo], [c[1] for c in combo])
            return
        for r in self.radii:
            for c in itertools.product(range(grid.N), repeat=grid.dim):
                yield Window(self.shape, c, r)


def window_integral(f: SampledFunction, w: Window) -> float:
    """∫_W f: prefix-sum lookup for cubes and boxes, masked sum for balls."""
    if w.shape == BALL:
        return float(f.values[w.mask(f.grid)].sum() * f.grid.cell_volume)
    lo, hi = w.bounds(f.grid)
    return f.box_sum(lo, hi) * f.grid.cell_volume


# --- constructors ----------------------------------------------------------


def sample(expr, grid: Grid, tag: str = "") -> SampledFunction:
    """Evaluate ``expr(*coords)`` at the cell centres."""
    vals = np.broadcast_to(np.asarray(expr(*grid.coords()), dtype=float), grid.shape)
    return SampledFunction(grid, vals, tag=tag)


def constant(grid: Grid, c: float = 1.0) -> SampledFunction:
    return SampledFunction(grid, np.full(grid.shape, float(c)), c >= 0, "constant")


def indicator(w: Window, grid: Grid) -> SampledFunction:
    return SampledFunction(grid, w.mask(grid).astype(float), True, "indicator")


def spike(grid: Grid, gamma: float, center=None) -> SampledFunction:
    """|x - c|^(-γ) with the distance clipped below at h/2."""
    r = np.maximum(grid.distance(center), grid.h / 2.0)
    return SampledFunction(grid, r ** (-gamma), True, "spike")


def step(grid: Grid, at: float = 0.0) -> SampledFunction:
    """Unit step in the first coordinate: 1 where x₁ ≥ at."""
    return SampledFunction(grid, (grid.coords()[0] >= at).astype(float), True, "step")


def synth_lipschitz(beta: float, cones, grid: Grid) -> tuple[SampledFunction, float]:
    """b(x) = Σ cᵢ|x - xᵢ|^β with the triangle-inequality bound Σ|cᵢ| on its seminorm."""
    if not 0.0 < beta < 1.0:
        raise ValueError("need 0 < beta < 1")
    vals = np.zeros(grid.shape)
    bound = 0.0
    for center, weight in cones:
        vals = vals + weight * grid.distance(center) ** beta
        bound += abs(weight)
    nonneg = all(w >= 0 for _, w in cones)
    return SampledFunction(grid, vals, nonneg, "lipschitz-cone"), bound


def quantize(values, step: float = 2.0**-20) -> np.ndarray:
    """Round to multiples of a power of two so that window sums are exact."""
    return np.round(np.asarray(values, dtype=float) / step) * step


def function_from_spec(spec: str, grid: Grid) -> SampledFunction:
    """Build a test function from ``kind:key=value,...``.

    Kinds: ``const`` (c), ``indicator`` (radius, shape), ``cone`` (beta,
    weight), ``spike`` (gamma), ``step`` (at).
    """
    kind, _, rest = spec.partition(":")
    opts = dict(item.split("=", 1) for item in rest.split(",") if item)
    kind = kind.strip().lower()
    if kind == "const":
        return constant(grid, float(opts.get("c", 1.0)))
    if kind == "indicator":
        w = Window(opts.get("shape", CUBE), grid.origin, int(opts.get("radius", 4)))
        return indicator(w, grid)
    if kind == "cone":
        b, _ = synth_lipschitz(float(opts.get("beta", 0.5)), [((0.0,) * grid.dim, float(opts.get("weight", 1.0)))], grid)
        return b
    if kind == "spike":
        return spike(grid, float(opts.get("gamma", 0.25)))
    if kind == "step":
        return step(grid, float(opts.get("at", 0.0)))
    raise ValueError(f"unknown function kind {kind!r}")


# --- file formats ------------------------------------------------------------

MAGIC = "orliczlab-grid"


def save_function(f: SampledFunction, path) -> None:
    """CSV (``x,value``) for 1-D ``.csv`` paths, otherwise text header + raw float64."""
    path = Path(path)
    g = f.grid
    if path.suffix == ".csv":
        if g.dim != 1:
            raise ValueError("CSV output is 1-D only")
        rows = "".join(f"{x!r},{v!r}\n" for x, v in zip(g.axis.tolist(), f.values.tolist()))
        path.write_text("x,value\n" + rows)
        return
    header = f"{MAGIC} dim={g.dim} N={g.N} h={g.h!r} boundary={g.boundary}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_function(path, boundary: str = ZERO) -> SampledFunction:
    path = Path(path)
    if path.suffix == ".csv":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x, v = data[:, 0], data[:, 1]
        h = float(x[1] - x[0]) if x.size > 1 else 1.0
        return SampledFunction(Grid(1, x.size, h, boundary), v)
    with open(path, "rb") as fh:
        header = fh.readline().decode().split()
        if not header or header[0] != MAGIC:
            raise ValueError(f"{path}: not a grid function file")
        meta = dict(item.split("=", 1) for item in header[1:])
        g = Grid(int(meta["dim"]), int(meta["N"]), float(meta["h"]), meta["boundary"])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != g.size:
        raise ValueError(f"{path}: expected {g.size} values, found {data.size}")
    return SampledFunction(g, data.reshape(g.shape))
