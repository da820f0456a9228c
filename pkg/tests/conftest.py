import itertools

import numpy as np
import pytest

from orliczlab import grid as G
from orliczlab import operators as O


def brute_sup(grid, alpha, family, integrand, within=None):
    """Exhaustive double loop: for every point x and family window W ∋ x, sum the integrand over W in C order."""
    out = np.full(grid.shape, -np.inf)
    windows = [(w, w.mask(grid)) for w in family.windows(grid)]
    for x in itertools.product(range(grid.N), repeat=grid.dim):
        vals = integrand(x)
        for w, m in windows:
            if not m[x]:
                continue
            if within is not None and not np.all(within[m]):
                continue
            s = 0.0
            for y in zip(*np.nonzero(m)):
                s += vals[y]
            out[x] = max(out[x], O.window_value(s, int(m.sum()), grid, alpha))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def quantized_normal(rng, shape, step=2.0**-10):
    return G.quantize(rng.normal(size=shape), step)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
