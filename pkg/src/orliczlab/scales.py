"""Dyadic scan grids and the growth-trend detector shared by the condition scans."""

from __future__ import annotations

import math

import numpy as np

DEFAULT_LO = -20
DEFAULT_HI = 20

# "bounded" on a finite scan: no monotone growth beyond this factor across
# at least TREND_SPAN dyadic steps toward either end of the grid
TREND_FACTOR = 1.5
TREND_SPAN = 4


def dyadic_grid(lo: int = DEFAULT_LO, hi: int = DEFAULT_HI, per_octave: int = 1) -> np.ndarray:
    """Points 2**k for k = lo, lo + 1/per_octave, ..., hi."""
    if hi < lo:
        raise ValueError("empty dyadic range")
    k = np.arange(lo * per_octave, hi * per_octave + 1) / per_octave
    return np.exp2(k)


def growth_trend(values, factor: float = TREND_FACTOR, span: int = TREND_SPAN) -> str | None:
    """Return "high"/"low" if ``values`` grow toward that end of the scan, else None.

    ``values`` are sampled on an increasing scale grid. Each half of the scan is
    read outward from the centre; it signals growth when its final ``span + 1``
    entries are nondecreasing and the end value exceeds the centre by ``factor``.
    Any infinite entry counts as growth toward its side.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return None
    mid = v.size // 2
    for side, seq in (("high", v[mid:]), ("low", v[: mid + 1][::-1])):
        if np.isinf(seq).any() and np.argmax(np.isinf(seq)) > 0:
            return side
        if seq.size < span + 1:
            continue
        tail = seq[-(span + 1):]
        slack = 1e-12 * np.abs(tail[:-1])
        monotone = bool(np.all(tail[1:] >= tail[:-1] - slack))
        if monotone and seq[-1] > factor * seq[0]:
            return side
    return None


# a monotone run that moves by more than this overall, without its steps
# dying out, is treated as drift rather than discretization convergence
SWEEP_FACTOR = 1.1
SWEEP_DECAY = 0.5


def _runs(d: np.ndarray, sign: int):
    start = None
    for i, x in enumerate(np.append(d, 0.0)):
        if sign * x > 0 and start is None:
            start = i
        elif sign * x <= 0 and start is not None:
            yield start, i
            start = None


def sweep_trend(values, factor: float = SWEEP_FACTOR, span: int = TREND_SPAN - 1,
                decay: float = SWEEP_DECAY) -> str | None:
    """Look for steady monotone drift along the sequence.

    A run of at least ``span`` consecutive increases (decreases) counts as
    "high" ("low") drift when its end/start ratio exceeds ``factor`` and its
    last log-step is at least ``decay`` times the run's mean log-step.
    """
    v = np.asarray(values, dtype=float)
    if v.size < span + 1 or not np.isfinite(v).all() or (v <= 0).any():
        return None
    d = np.diff(np.log(v))
    for sign, side in ((1, "high"), (-1, "low")):
        for a, b in _runs(d, sign):
            run = sign * d[a:b]
            if b - a >= span and run.sum() > math.log(factor) and run[-1] >= decay * run.mean():
                return side
    return None
