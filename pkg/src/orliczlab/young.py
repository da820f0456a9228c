"""Young functions: evaluation, generalized inverse, complementary function,
growth conditions, global domination and the Cianchi auxiliary functions.

Values are extended reals: ``math.inf`` is a legitimate value of a Young
function and is never encoded as NaN.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .report import VerificationReport
from .scales import dyadic_grid, growth_trend

INF = math.inf
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

INVERSE_RTOL = 1e-12
CONJUGATE_RTOL = 1e-10
_GROW_CAP = 2.0**1000
_SHRINK_CAP = 2.0**-1000

FAMILIES = ("power", "explin", "linfty", "llogl", "table", "conjugate")


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """A convex, left-continuous Φ: [0, ∞) → [0, ∞] with Φ(0) = 0.

    Use the constructors (:func:`power`, :func:`exp_minus_linear`, ...) rather
    than instantiating directly. Instances hash by identity so per-instance
    caches of the inverse work.
    """

    family: str
    p: float = 1.0
    knots_r: np.ndarray | None = field(default=None, repr=False)
    knots_phi: np.ndarray | None = field(default=None, repr=False)
    interp: str = "linear"
    base: "YoungFunction | None" = None
    label: str = ""
    r_max: float = INF

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Young family {self.family!r}")

    def __repr__(self) -> str:
        return f"YoungFunction({self.name})"

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.family == "power":
            return f"power:p={self.p:g}"
        if self.family == "conjugate":
            return f"conj({self.base.name})"
        return self.family

    def __call__(self, r):
        if np.ndim(r) == 0:
            r = float(r)
            if r < 0:
                raise ValueError(f"Young function evaluated at negative r={r}")
            return _eval_scalar(self, r)
        arr = np.asarray(r, dtype=float)
        if (arr < 0).any():
            raise ValueError("Young function evaluated at negative r")
        return _eval_array(self, arr)

    # --- structural facts used by the norm code ---------------------------

    @property
    def jump(self) -> float:
        """sup{r : Φ(r) < ∞}; ``inf`` for finite-valued functions."""
        if self.family == "linfty":
            return 1.0
        if self.family == "table":
            return self.r_max
        if self.family == "conjugate":
            b = self.base
            if b.family == "power" and b.p == 1.0:
                return 1.0
            if b.family == "table" and b.interp == "linear":
                return _last_slope(b)
        return INF

    @property
    def is_indicator_type(self) -> bool:
        """True when Φ is 0 up to its jump point and ∞ beyond (an L∞ gauge)."""
        if self.family == "linfty":
            return True
        return self.family == "conjugate" and self.base.family == "power" and self.base.p == 1.0

    @property
    def in_Y(self) -> bool:
        """0 < Φ(r) < ∞ for 0 < r < ∞ (the class written 𝒴)."""
        if self.jump < INF or self.is_indicator_type:
            return False
        if self.family == "table" and self.knots_phi[1] == 0.0:
            return False
        return True


# --- constructors ----------------------------------------------------------


def power(p: float) -> YoungFunction:
    if not p >= 1.0:
        raise ValueError("power Young function needs p >= 1")
    return YoungFunction("power", p=float(p))


def exp_minus_linear() -> YoungFunction:
    """Φ(r) = e^r − r − 1."""
    return YoungFunction("explin")


def linfty() -> YoungFunction:
    """0 on [0, 1], ∞ on (1, ∞): the gauge of L∞."""
    return YoungFunction("linfty")


def llogl() -> YoungFunction:
    """Φ(r) = r log(1 + r)."""
    return YoungFunction("llogl")


def tabulated(r, phi, interp: str = "linear", label: str = "", check_convex: bool = True,
              r_max: float = INF) -> YoungFunction:
    """Young function from monotone samples.

    ``interp="linear"`` interpolates piecewise linearly in (r, Φ) and needs a
    knot at r = 0 (one is prepended when missing). ``interp="loglog"``
    interpolates linearly in (log r, log Φ), which reproduces power laws
    exactly; knots must then be strictly positive. Both extrapolate past the
    last knot with the last segment's law, up to ``r_max`` beyond which the
    function is ``inf``.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if r.ndim != 1 or r.shape != phi.shape or r.size < 2:
        raise ValueError("table needs matching 1-D arrays with at least two samples")
    if not (np.isfinite(r).all() and np.isfinite(phi).all()):
        raise ValueError("table values must be finite")
    if np.any(np.diff(r) <= 0):
        raise ValueError("table r values must be strictly increasing")
    if np.any(np.diff(phi) < 0):
        raise ValueError("table phi values must be nondecreasing")
    if interp == "linear":
        if r[0] < 0:
            raise ValueError("table r values must be >= 0")
        if r[0] > 0:
            r = np.concatenate([[0.0], r])
            phi = np.concatenate([[0.0], phi])
        if phi[0] != 0.0:
            raise ValueError("table must satisfy phi(0) = 0")
        if phi[-1] <= phi[-2]:
            raise ValueError("table must end strictly increasing so that phi -> inf")
    elif interp == "loglog":
        if r[0] <= 0 or phi[0] <= 0:
            raise ValueError("loglog table needs strictly positive knots")
        if np.any(np.diff(phi) <= 0):
            raise ValueError("loglog table needs strictly increasing phi")
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    if check_convex:
        slopes = np.diff(phi) / np.diff(r)
        bad = np.diff(slopes) < -1e-9 * np.abs(slopes[1:])
        if bad.any():
            k = int(np.argmax(bad)) + 1
            raise ValueError(f"table is not convex near r={r[k]:g}")
    r.setflags(write=False)
    phi.setflags(write=False)
    if r_max < r[-1]:
        raise ValueError("r_max must not precede the last knot")
    return YoungFunction("table", knots_r=r, knots_phi=phi, interp=interp, label=label, r_max=float(r_max))


def conjugate(phi: YoungFunction) -> YoungFunction:
    """The complementary function Φ̃(r) = sup_s (rs − Φ(s)) as a Young function."""
    return YoungFunction("conjugate", base=phi)


def table_from(phi: YoungFunction, r_knots, label: str = "") -> YoungFunction:
    """Sample ``phi`` on ``r_knots`` and build a linear tabulated function."""
    r = np.asarray(r_knots, dtype=float)
    return tabulated(r, phi(r), label=label or f"table[{phi.name}]")


def default_table() -> YoungFunction:
    """Built-in tabulated member: cosh(r) − 1 sampled at 0 and 2^(k/2), |k| ≤ 40."""
    r = np.concatenate([[0.0], dyadic_grid(-20, 20, per_octave=2)])
    r = r[r <= 2.0**6]
    return tabulated(r, np.cosh(r) - 1.0, label="table:cosh-1")


def from_spec(text: str) -> YoungFunction:
    """Parse ``power:p=2``, ``explin``, ``linfty``, ``llogl`` or ``table:<csv path>``."""
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.lower()
    if head == "power":
        key, _, val = rest.partition("=")
        if key.strip() != "p" or not val:
            raise ValueError(f"expected power:p=<value>, got {text!r}")
        return power(float(val))
    if head == "explin" and not rest:
        return exp_minus_linear()
    if head == "linfty" and not rest:
        return linfty()
    if head == "llogl" and not rest:
        return llogl()
    if head == "table" and rest:
        return load_table(rest)
    if head == "table" and not rest:
        return default_table()
    raise ValueError(f"unrecognized Young function spec {text!r}")


def load_table(path) -> YoungFunction:
    """Read a CSV with header ``r,phi`` in increasing r."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["r", "phi"]:
            raise ValueError(f"{path}: expected CSV header 'r,phi'")
        rows = [(float(row["r"]), float(row["phi"])) for row in reader]
    r, phi = zip(*rows) if rows else ((), ())
    return tabulated(r, phi, label=f"table:{Path(path).name}")


def save_table(phi: YoungFunction, path) -> None:
    if phi.family != "table":
        raise ValueError("only tabulated functions can be written as tables")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "phi"])
        for a, b in zip(phi.knots_r, phi.knots_phi):
            w.writerow([repr(float(a)), repr(float(b))])


# --- evaluation ------------------------------------------------------------


def _last_slope(t: YoungFunction) -> float:
    r, phi = t.knots_r, t.knots_phi
    return float((phi[-1] - phi[-2]) / (r[-1] - r[-2]))


def _power_conj_coeff(p: float) -> float:
    # sup_s (rs - s^p) = K r^(p/(p-1))
    return (p - 1.0) / p * p ** (-1.0 / (p - 1.0))


def _eval_scalar(phi: YoungFunction, r: float) -> float:
    fam = phi.family
    if fam == "power":
        return r**phi.p if r < INF else INF
    if fam == "explin":
        if r > 709.0:
            return INF
        if r < 1e-3:
            return r * r * (0.5 + r * (1 / 6 + r * (1 / 24 + r / 120)))
        return math.expm1(r) - r
    if fam == "llogl":
        return r * math.log1p(r) if r < INF else INF
    if fam == "linfty":
        return 0.0 if r <= 1.0 else INF
    if fam == "table":
        return float(_eval_table(phi, np.array([r]))[0])
    return _conjugate_scalar(phi.base, r)


def _eval_array(phi: YoungFunction, r: np.ndarray) -> np.ndarray:
    fam = phi.family
    with np.errstate(over="ignore", invalid="ignore"):
        if fam == "power":
            return r**phi.p
        if fam == "explin":
            out = np.expm1(np.minimum(r, 709.0)) - r
            small = r < 1e-3
            rs = r[small]
            out[small] = rs * rs * (0.5 + rs * (1 / 6 + rs * (1 / 24 + rs / 120)))
            out[r > 709.0] = INF
            return out
        if fam == "llogl":
            return r * np.log1p(r)
        if fam == "linfty":
            return np.where(r <= 1.0, 0.0, INF)
        if fam == "table":
            return _eval_table(phi, r)
    return _conjugate_array(phi.base, r)


def _eval_table(t: YoungFunction, r: np.ndarray) -> np.ndarray:
    kr, kp = t.knots_r, t.knots_phi
    if t.interp == "linear":
        out = np.interp(r, kr, kp)
        hi = r > kr[-1]
        out[hi] = kp[-1] + _last_slope(t) * (r[hi] - kr[-1])
        out[r > t.r_max] = INF
        return out
    out = np.zeros_like(r, dtype=float)
    pos = r > 0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(_loglog(np.log(r[pos]), np.log(kr), np.log(kp)))
    out[r > t.r_max] = INF
    out[np.isinf(r)] = INF
    return out


def _loglog(x: np.ndarray, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation with linear extrapolation at both ends."""
    y = np.interp(x, kx, ky)
    lo = x < kx[0]
    hi = x > kx[-1]
    s0 = (ky[1] - ky[0]) / (kx[1] - kx[0])
    s1 = (ky[-1] - ky[-2]) / (kx[-1] - kx[-2])
    y[lo] = ky[0] + s0 * (x[lo] - kx[0])
    y[hi] = ky[-1] + s1 * (x[hi] - kx[-1])
    return y


def eval_young(phi: YoungFunction, r: float) -> float:
    """Φ(r) for r ≥ 0, possibly ``inf``."""
    return phi(r)


# --- generalized inverse -----------------------------------------------------


@functools.lru_cache(maxsize=65536)
def _inverse_cached(phi: YoungFunction, s: float) -> float:
    return _inverse_uncached(phi, s)


def _inverse_uncached(phi: YoungFunction, s: float) -> float:
    if s == INF:
        return INF
    if s == 0.0 and phi.in_Y:
        return 0.0
    fam = phi.family
    if fam == "power":
        return s ** (1.0 / phi.p)
    if fam == "linfty" or phi.is_indicator_type:
        return phi.jump
    if fam == "table":
        return _inverse_table(phi, s)
    if fam == "conjugate":
        b = phi.base
        if b.family == "power":
            q = b.p / (b.p - 1.0)
            return (s / _power_conj_coeff(b.p)) ** (1.0 / q)
        if b.family == "linfty":
            return s
    return _inverse_bisect(phi, s)


def _inverse_table(t: YoungFunction, s: float) -> float:
    kr, kp = t.knots_r, t.knots_phi
    if t.r_max < INF and s >= float(_eval_table(t, np.array([t.r_max]))[0]):
        return t.r_max
    if t.interp == "loglog":
        if s <= 0:
            return 0.0
        return float(np.exp(_loglog(np.array([math.log(s)]), np.log(kp), np.log(kr))[0]))
    k = int(np.searchsorted(kp, s, side="right"))
    if k >= kp.size:
        return float(kr[-1] + (s - kp[-1]) / _last_slope(t))
    return float(kr[k - 1] + (s - kp[k - 1]) * (kr[k] - kr[k - 1]) / (kp[k] - kp[k - 1]))


def _inverse_bisect(phi: YoungFunction, s: float) -> float:
    """inf{r ≥ 0 : Φ(r) > s} by geometric bracketing then bisection."""
    above = lambda r: phi(r) > s  # noqa: E731
    hi = 1.0
    if above(hi):
        while hi > _SHRINK_CAP and above(hi / 2.0):
            hi /= 2.0
        if hi <= _SHRINK_CAP:
            return 0.0
        lo = hi / 2.0
    else:
        while not above(hi):
            hi *= 2.0
            if hi > _GROW_CAP:
                return INF
        lo = hi / 2.0
    while hi - lo > INVERSE_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    return hi


def inverse_young(phi: YoungFunction, s: float) -> float:
    """Generalized inverse Φ⁻¹(s) = inf{r ≥ 0 : Φ(r) > s}, for s in [0, ∞]."""
    s = float(s)
    if s < 0:
        raise ValueError("inverse_young needs s >= 0")
    return _inverse_cached(phi, s)


def inverse_array(phi: YoungFunction, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if phi.family == "power":
        return s ** (1.0 / phi.p)
    return np.array([inverse_young(phi, float(v)) for v in s.ravel()]).reshape(s.shape)


# --- complementary function ------------------------------------------------


def _conjugate_scalar(phi: YoungFunction, r: float) -> float:
    if r == INF:
        return INF
    fam = phi.family
    if fam == "power":
        if phi.p == 1.0:
            return 0.0 if r <= 1.0 else INF
        return _power_conj_coeff(phi.p) * r ** (phi.p / (phi.p - 1.0))
    if fam == "linfty":
        return r
    if fam == "table" and phi.interp == "linear":
        return float(_conjugate_table(phi, np.array([r]))[0])
    if fam in ("explin", "llogl"):
        return float(_smooth_conjugate(phi, np.array([r]))[0])
    return _golden_conjugate(phi, r)


def _smooth_conjugate(phi: YoungFunction, r: np.ndarray) -> np.ndarray:
    """Closed form for e^s - s - 1; Newton on the derivative for s·log(1+s)."""
    r = np.asarray(r, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if phi.family == "explin":
            small = r < 1e-3
            out = (1.0 + r) * np.log1p(r) - r
            rs = r[small]
            out[small] = rs * rs * (0.5 - rs * (1 / 6 - rs * (1 / 12 - rs * (1 / 20 - rs / 30))))
            return out
        # Φ'(s) = log(1+s) + s/(1+s) is concave and increasing, so Newton from a
        # lower bound of the maximizer increases monotonically to it
        s = np.maximum(r / 2.0, np.expm1(r - 1.0))
        for _ in range(100):
            d = np.log1p(s) + s / (1.0 + s) - r
            step = d / (1.0 / (1.0 + s) + 1.0 / (1.0 + s) ** 2)
            s_new = s - step
            fin = np.isfinite(s_new)
            s = np.where(fin, s_new, s)
            if np.all(np.abs(step[fin]) <= 1e-15 * s[fin]):
                break
        out = s * (s / (1.0 + s))
    out[~np.isfinite(s)] = INF
    out[r == 0] = 0.0
    out[np.isinf(r)] = INF
    return out


def _conjugate_table(t: YoungFunction, r: np.ndarray) -> np.ndarray:
    # the objective rs - Φ(s) is piecewise linear and concave: its sup sits on a knot
    vals = np.max(r[:, None] * t.knots_r[None, :] - t.knots_phi[None, :], axis=1)
    vals = np.maximum(vals, 0.0)
    if t.r_max < INF:
        # finite domain: the sup may also sit at the domain end
        end = r * t.r_max - float(_eval_table(t, np.array([t.r_max]))[0])
        return np.maximum(vals, end)
    vals[r > _last_slope(t) * (1.0 + 1e-15)] = INF
    return vals


def _golden_conjugate(phi: YoungFunction, r: float) -> float:
    """sup_s (rs − Φ(s)) for concave objective: geometric bracket, then golden section."""
    if r == 0.0:
        return 0.0

    def g(s):
        v = phi(s)
        return -INF if v == INF else r * s - v

    hi = 1.0
    if g(0.5) >= g(1.0):
        while hi > _SHRINK_CAP and g(hi / 2.0) >= g(hi):
            hi /= 2.0
        if hi <= _SHRINK_CAP:
            return 0.0
    else:
        while g(hi) < g(2.0 * hi):
            hi *= 2.0
            if hi > _GROW_CAP:
                return INF
    a, b = hi / 2.0, 2.0 * hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    while b - a > CONJUGATE_RTOL * b:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + GOLDEN * (b - a)
            gd = g(d)
    return max(gc, gd, g(a), g(b), 0.0)


def _conjugate_array(phi: YoungFunction, r: np.ndarray) -> np.ndarray:
    fam = phi.family
    flat = r.ravel()
    if fam == "power" or fam == "linfty":
        return np.array([_conjugate_scalar(phi, float(v)) for v in flat]).reshape(r.shape)
    if fam == "table" and phi.interp == "linear":
        return _conjugate_table(phi, flat).reshape(r.shape)
    if fam in ("explin", "llogl"):
        return _smooth_conjugate(phi, flat).reshape(r.shape)
    return _golden_conjugate_array(phi, flat).reshape(r.shape)


def _golden_conjugate_array(phi: YoungFunction, r: np.ndarray) -> np.ndarray:
    """Vectorized twin of :func:`_golden_conjugate` (same bracketing rule)."""
    out = np.zeros_like(r)
    work = np.flatnonzero((r > 0) & np.isfinite(r))
    out[np.isinf(r)] = INF
    if work.size == 0:
        return out
    rr = r[work]

    def g(s, rv):
        with np.errstate(over="ignore", invalid="ignore"):
            v = phi(s)
            res = rv * s - v
        res[np.isinf(v)] = -INF
        return res

    hi = np.ones_like(rr)
    shrink = g(hi / 2.0, rr) >= g(hi, rr)
    active = shrink.copy()
    while active.any():
        h = hi[active]
        step = g(h / 2.0, rr[active]) >= g(h, rr[active])
        step &= h > _SHRINK_CAP
        idx = np.flatnonzero(active)
        hi[idx[step]] /= 2.0
        active[idx[~step]] = False
    active = ~shrink
    unbounded = np.zeros_like(rr, dtype=bool)
    while active.any():
        h = hi[active]
        step = g(h, rr[active]) < g(2.0 * h, rr[active])
        idx = np.flatnonzero(active)
        hi[idx[step]] *= 2.0
        over = hi > _GROW_CAP
        unbounded |= over
        active[idx[~step]] = False
        active &= ~over
    a, b = hi / 2.0, 2.0 * hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    gc, gd = g(c, rr), g(d, rr)
    for _ in range(60):
        left = gc >= gd
        na = np.where(left, a, c)
        nb = np.where(left, d, b)
        nc = np.where(left, nb - GOLDEN * (nb - na), d)
        nd = np.where(left, c, na + GOLDEN * (nb - na))
        gp = g(np.where(left, nc, nd), rr)
        gc, gd = np.where(left, gp, gd), np.where(left, gc, gp)
        a, b, c, d = na, nb, nc, nd
    vals = np.maximum(np.maximum(gc, gd), 0.0)
    vals[hi <= _SHRINK_CAP] = 0.0
    vals[unbounded] = INF
    out[work] = vals
    return out


def conjugate_young(phi: YoungFunction, r: float) -> float:
    """Φ̃(r) = sup{rs − Φ(s) : s ≥ 0}; ``inf`` when unbounded."""
    r = float(r)
    if r < 0:
        raise ValueError("conjugate_young needs r >= 0")
    return _conjugate_scalar(phi, r)


# --- duality bracket -------------------------------------------------------


def duality_bracket_check(phi: YoungFunction, r_grid=None, rtol: float = 1e-8) -> VerificationReport:
    """Check r ≤ Φ⁻¹(r)·Φ̃⁻¹(r) ≤ 2r at every grid point."""
    grid = dyadic_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    conj = conjugate(phi)
    rep = VerificationReport("duality_bracket", params={"phi": phi.name, "points": int(grid.size)}, tolerance=rtol)
    lower = upper = INF
    for r in grid:
        r = float(r)
        prod = inverse_young(phi, r) * inverse_young(conj, r)
        if r == 0.0:
            lo_m = hi_m = 0.0 if prod == 0.0 else -INF
        else:
            lo_m = (prod - r) / r
            hi_m = (2.0 * r - prod) / r
        lower, upper = min(lower, lo_m), min(upper, hi_m)
        if min(lo_m, hi_m) < -rtol:
            rep.add_witness({"r": r, "product": prod})
    rep.worst_margin = min(lower, upper)
    rep.passed = rep.worst_margin >= -rtol
    rep.notes.append(f"lower-bound margin {lower:.3g}, upper-bound margin {upper:.3g}")
    return rep


# --- growth conditions -----------------------------------------------------


@dataclass(frozen=True)
class GrowthCertificate:
    """Result of a finite dyadic scan for Δ₂, ∇₂ or almost-decreasing t^(1+ε)/Φ(t).

    ``holds`` is a statement about the scanned grid only.
    """

    kind: str
    constant: float
    grid: tuple
    holds: bool
    witness: float | None = None
    epsilon: float | None = None
    note: str = ""


NABLA2_CANDIDATES = np.exp2(np.arange(1, 65) / 8.0)


def check_growth(phi: YoungFunction, kind: str, r_grid=None, epsilon: float = 0.0) -> GrowthCertificate:
    """Certify a growth condition on a dyadic grid.

    ``kind`` is ``"delta2"`` (Φ(2r) ≤ CΦ(r)), ``"nabla2"`` (Φ(r) ≤ Φ(Cr)/(2C),
    C searched over 2^(j/8), 1 ≤ j ≤ 64) or ``"almost_decreasing"``
    (t^(1+ε)/Φ(t) almost decreasing, best constant over grid pairs).
    """
    grid = dyadic_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if (grid <= 0).any():
        raise ValueError("growth scans need a grid inside (0, inf)")
    span = (float(grid[0]), float(grid[-1]))
    vals = phi(grid)
    finite = np.isfinite(vals)
    note = "" if finite.all() else f"effective domain ends near r={float(grid[finite][-1]) if finite.any() else 0.0:g}"

    if kind == "delta2":
        twice = phi(2.0 * grid)
        ratio = np.full(grid.shape, 2.0)
        for i, (a, b) in enumerate(zip(vals, twice)):
            if b == INF and a == INF or b == 0.0:
                continue
            ratio[i] = INF if a == 0.0 or b == INF else b / a
        k = int(np.argmax(ratio))
        if np.isinf(ratio[k]):
            return GrowthCertificate(kind, INF, span, False, float(grid[k]), note=note)
        side = growth_trend(ratio)
        if side is not None:
            w = float(grid[-1] if side == "high" else grid[0])
            return GrowthCertificate(kind, float(ratio.max()), span, False, w, note=note or f"ratio grows toward {side} end")
        return GrowthCertificate(kind, max(2.0, float(ratio.max())), span, True, note=note)

    if kind == "nabla2":
        worst_r = None
        for c in NABLA2_CANDIDATES:
            bigger = phi(c * grid)
            with np.errstate(invalid="ignore"):
                ok = (vals <= bigger / (2.0 * c)) | (np.isinf(vals) & np.isinf(bigger))
            if ok.all():
                return GrowthCertificate(kind, float(c), span, True, note=note)
            worst_r = float(grid[np.argmin(ok)])
        return GrowthCertificate(kind, INF, span, False, worst_r, note=note)

    if kind == "almost_decreasing":
        with np.errstate(divide="ignore"):
            g = grid ** (1.0 + epsilon) / vals
        running = g / np.minimum.accumulate(g)
        k = int(np.argmax(running))
        if not np.isfinite(running).all() or growth_trend(running) is not None:
            return GrowthCertificate(kind, float(running[k]), span, False, float(grid[k]), epsilon, note)
        return GrowthCertificate(kind, float(running[k]), span, True, None, epsilon, note)

    raise ValueError(f"unknown growth condition {kind!r}")


# --- global domination ---------------------------------------------------------


DOMINATION_CANDIDATES = np.exp2(np.arange(-320, 321) / 16.0)


def dominates_globally(phi: YoungFunction, psi: YoungFunction, s_grid=None, c_candidates=None,
                       rtol: float = 1e-9) -> float | None:
    """Smallest candidate c with Φ(s) ≤ Ψ(cs) at every scanned s, or None.

    The pointwise requirement c(s) = Ψ⁻¹(Φ(s))/s is scanned first; if it grows
    toward either end of the grid no constant works globally and None is
    returned even when a huge candidate would cover the finite grid.
    """
    grid = dyadic_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    cands = DOMINATION_CANDIDATES if c_candidates is None else np.sort(np.asarray(c_candidates, dtype=float))
    lhs = phi(grid)
    need = np.empty_like(grid)
    for i, (s, v) in enumerate(zip(grid, lhs)):
        if v == INF:
            need[i] = psi.jump / s if psi.jump < INF else INF
        else:
            need[i] = inverse_young(psi, float(v)) / s
    if not np.isfinite(need).all() or growth_trend(need) is not None:
        return None
    best = float(need.max())
    for c in cands[cands >= best * (1.0 - 1e-6)]:
        rhs = psi(c * grid)
        if np.all(lhs <= rhs * (1.0 + rtol)):
            return float(c)
    return None


# --- functions built from a prescribed inverse ----------------------------------


def young_from_inverse(r, inv, label: str = "") -> YoungFunction:
    """Tabulated Q with Q⁻¹(r_k) = inv_k, interpolated log-log between samples.

    Q need not be convex (a prescribed inverse rarely makes it so), so the
    table skips the convexity check.
    """
    r = np.asarray(r, dtype=float)
    inv = np.asarray(inv, dtype=float)
    if r.shape != inv.shape or r.ndim != 1:
        raise ValueError("need matching 1-D sample arrays")
    if np.any(np.diff(inv) < 0):
        raise ValueError("inverse table is not monotone")
    if r[0] == 0.0 and inv[0] == 0.0:
        r, inv = r[1:], inv[1:]
    if np.any(inv <= 0) or np.any(np.diff(inv) <= 0):
        raise ValueError("inverse table must be strictly increasing and positive (degenerate prefix)")
    return tabulated(inv, r, interp="loglog", label=label or "from_inverse", check_convex=False)


def fine_grid(lo: int = -60, hi: int = 60, per_octave: int = 4) -> np.ndarray:
    return dyadic_grid(lo, hi, per_octave)


def q_function(psi: YoungFunction, exponent: float, r_grid=None) -> YoungFunction:
    """Q with Q⁻¹(r) = r^exponent · Ψ⁻¹(r)."""
    r = fine_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    inv = r**exponent * inverse_array(psi, r)
    return young_from_inverse(r, inv, label=f"Q[{psi.name},{exponent:g}]")


def matched_target(phi: YoungFunction, exponent: float) -> YoungFunction:
    """Ψ with Ψ⁻¹(t) = Φ⁻¹(t)·t^(−exponent).

    Power inputs resolve in closed form (1/q = 1/p − exponent, q = ∞ giving
    the L∞ gauge); anything else is tabulated from the prescribed inverse.
    """
    if phi.family == "power":
        inv_q = 1.0 / phi.p - exponent
        if abs(inv_q) < 1e-14:
            return linfty()
        if inv_q > 0 and 1.0 / inv_q >= 1.0:
            return power(1.0 / inv_q)
        raise ValueError("no Young function has the requested inverse")
    r = fine_grid()
    inv = inverse_array(phi, r) * r ** (-exponent)
    return young_from_inverse(r, inv, label=f"matched[{phi.name},{exponent:g}]")


# --- Cianchi auxiliary functions ---------------------------------------------


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-12, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    if not all(map(math.isfinite, (fa, fb, fm))):
        return INF
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    eps = rtol * abs(whole) if whole != 0 else rtol
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, eps, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, w, e, depth = stack.pop()
        m = 0.5 * (a0 + b0)
        lm, rm = f(0.5 * (a0 + m)), f(0.5 * (m + b0))
        if not (math.isfinite(lm) and math.isfinite(rm)):
            return INF
        left = (m - a0) / 6.0 * (fa0 + 4.0 * lm + fm0)
        right = (b0 - m) / 6.0 * (fm0 + 4.0 * rm + fb0)
        delta = left + right - w
        if depth >= max_depth or abs(delta) <= 15.0 * e:
            total += left + right + delta / 15.0
        else:
            stack.append((a0, m, fa0, lm, fm0, left, e / 2.0, depth + 1))
            stack.append((m, b0, fm0, rm, fb0, right, e / 2.0, depth + 1))
    return total


def _integral_from_zero(f, s0: float, rtol: float = 1e-12) -> tuple[float, float]:
    """∫₀^s0 f over dyadic pieces [s0 2^-(j+1), s0 2^-j] with geometric tail.

    Returns (value, tail ratio). A tail ratio ≥ 1 means the pieces do not
    shrink and the integral diverges at 0.
    """
    total, pieces = 0.0, []
    hi = s0
    for _ in range(400):
        piece = adaptive_simpson(f, hi / 2.0, hi, rtol)
        pieces.append(piece)
        total += piece
        hi /= 2.0
        if len(pieces) > 8 and piece <= 1e-18 * total:
            break
    tail = pieces[-6:]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0]
    rho = float(np.exp(np.mean(np.log(ratios)))) if ratios and all(x > 0 for x in ratios) else 0.0
    if 0.0 < rho < 1.0:
        total += pieces[-1] * rho / (1.0 - rho)
    return total, rho


CONVERGENCE_RATIO = 1.0 - 1e-3
LEVEL_OFF_SLOPE = 1e-3


@dataclass(frozen=True, eq=False)
class CianchiAux:
    """Tables of s ↦ B_P(s) = ∫₀^s Ψ(t)/t^(1+P′) dt and of Ψ̃_P, with P = n/α.

    ``psi_tilde`` is the tabulated (log-log) Ψ̃_P and ``psi_p`` its
    complementary function Ψ_{n/α}. Both are None when the small-t integral
    diverges.
    """

    P: float
    Pprime: float
    convergent: bool
    tail_ratio: float
    s: np.ndarray | None = field(default=None, repr=False)
    B: np.ndarray | None = field(default=None, repr=False)
    psi_tilde_values: np.ndarray | None = field(default=None, repr=False)
    psi_tilde: YoungFunction | None = None
    psi_p: YoungFunction | None = None
    B_bounded: bool = False
    psi_tilde_knots: np.ndarray | None = field(default=None, repr=False)

    def B_inverse(self, u):
        """Inverse of B_P; ``inf`` past the table end when B_P levels off."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        pos = u > 0
        with np.errstate(over="ignore"):
            out[pos] = np.exp(_loglog(np.log(u[pos]), np.log(self.B), np.log(self.s)))
        if self.B_bounded:
            out[u > self.B[-1]] = INF
        return out


def small_t_integral_converges(psi: YoungFunction, pprime: float, levels: int = 60) -> tuple[bool, float]:
    """Dyadic test for ∫₀¹ Ψ(t)/t^(1+P′) dt < ∞ via the decay of the pieces."""
    f = lambda t: psi(t) / t ** (1.0 + pprime)  # noqa: E731
    pieces = [adaptive_simpson(f, 2.0 ** -(j + 1), 2.0**-j, 1e-10) for j in range(levels)]
    tail = pieces[-6:]
    if any(x <= 0 for x in tail):
        return all(x == 0 for x in tail), 0.0
    rho = float(np.exp(np.mean(np.log(np.array(tail[1:]) / np.array(tail[:-1])))))
    return rho < CONVERGENCE_RATIO, rho


def cianchi_construct(psi: YoungFunction, alpha: float, n: int, lo: int = -60, hi: int = 60,
                      per_octave: int = 4) -> CianchiAux:
    """Build B_P and Ψ̃_P for P = n/α on a dyadic s-grid."""
    if not 0.0 < alpha < n:
        raise ValueError("need 0 < alpha < n")
    if not psi.in_Y:
        raise ValueError("the construction is tabulated only for finite, positive Young functions")
    P = n / alpha
    pp = P / (P - 1.0)
    ok, rho = small_t_integral_converges(psi, pp)
    if not ok:
        return CianchiAux(P, pp, False, rho)
    s = dyadic_grid(lo, hi, per_octave)

    def cumulative(f, knots):
        head, _ = _integral_from_zero(f, float(knots[0]))
        vals = np.empty_like(knots)
        vals[0] = head
        for k in range(1, knots.size):
            vals[k] = vals[k - 1] + adaptive_simpson(f, float(knots[k - 1]), float(knots[k]))
        return vals

    B = cumulative(lambda t: psi(t) / t ** (1.0 + pp), s)
    # substituting u = r^P′ and then u = B_P(t) turns the defining integral into
    # Ψ̃_P(B_P(t)^(1/P′)) = (1/P′)∫₀^t Ψ(τ)/τ dτ, a smooth integrand with no inverse
    C = cumulative(lambda t: psi(t) / t, s)
    knots = B ** (1.0 / pp)
    with np.errstate(invalid="ignore"):
        keep = np.concatenate([[True], np.diff(knots) > 0]) & np.isfinite(knots)
    knots, tilde = knots[keep], C[keep] / pp
    # B_P levels off when Ψ grows slower than t^P′; then Ψ̃_P is finite only
    # below B_P(∞)^(1/P′), approximated by the table end
    end_slope = (math.log(B[-1]) - math.log(B[-1 - per_octave])) / math.log(2.0)
    bounded = end_slope < LEVEL_OFF_SLOPE
    r_max = float(knots[-1]) if bounded else INF
    psi_tilde = tabulated(knots, tilde, interp="loglog", label=f"psi_tilde_P[{psi.name}]",
                          check_convex=False, r_max=r_max)
    return CianchiAux(P, pp, True, rho, s=s, B=B, psi_tilde_values=tilde, psi_tilde=psi_tilde,
                      psi_p=conjugate(psi_tilde), B_bounded=bounded, psi_tilde_knots=knots)
