"""Acceptance criteria, each at its stated tolerance and time budget.

Run under pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import itertools
import json
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import brute_sup  # noqa: E402
from orliczlab import cli  # noqa: E402
from orliczlab import grid as G  # noqa: E402
from orliczlab import norms as N  # noqa: E402
from orliczlab import operators as O  # noqa: E402
from orliczlab import verify as V  # noqa: E402
from orliczlab import young as Y  # noqa: E402

RESULTS = {}


def record(number, title, ok, elapsed, budget, detail=""):
    passed = bool(ok) and (budget is None or elapsed < budget)
    timing = f"{elapsed:.2f}s" + (f" / {budget:g}s" if budget is not None else "")
    RESULTS[number] = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title} ({timing}) {detail}".rstrip()
    return passed


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# 1 -------------------------------------------------------------------------------------------


def criterion_duality():
    fams = [Y.power(2), Y.exp_minus_linear(), Y.linfty(), Y.llogl(), Y.default_table()]

    def run():
        return [Y.duality_bracket_check(phi, rtol=1e-8) for phi in fams]

    reps, dt = timed(run)
    ok = all(r.passed and r.params["points"] == 41 for r in reps)
    worst = min(r.worst_margin for r in reps)
    return record(1, "duality bracket, 5 families x 41 dyadic points", ok, dt, 1.0, f"worst margin {worst:.3g}")


# 2 -------------------------------------------------------------------------------------------


def criterion_indicator_norms():
    g = G.Grid(2, 32, 1 / 32)
    windows = [G.Window.cube(g.origin, r) for r in (0, 1, 2, 4, 8, 15)]
    windows += [G.Window.ball(g.origin, r) for r in (1, 3, 6)] + [G.Window.cube((3, 5), 4)]
    fams = [Y.power(2), Y.exp_minus_linear(), Y.llogl(), Y.default_table()]

    def run():
        worst = 0.0
        for phi, B in itertools.product(fams, windows):
            chi = G.indicator(B, g)
            expected = 1.0 / Y.inverse_young(phi, 1.0 / B.volume(g))
            for got in (N.luxemburg_norm(chi, phi).value, N.weak_norm(chi, phi).value):
                worst = max(worst, abs(got - expected) / expected)
        return worst

    worst, dt = timed(run)
    return record(2, "indicator norm identity, 10 windows x 4 families", worst <= 1e-8, dt, 5.0,
                  f"max relative error {worst:.2e}")


# 3 -------------------------------------------------------------------------------------------


def criterion_holder():
    g = G.Grid(2, 64, 1 / 64)
    rng = np.random.default_rng(3)

    def run():
        worst = 0.0
        for phi in (Y.power(2), Y.llogl()):
            conj = Y.conjugate(phi)
            for _ in range(100):
                f = G.SampledFunction(g, rng.standard_normal(g.shape) * rng.uniform(0.1, 10))
                h = G.SampledFunction(g, rng.standard_exponential(g.shape) * rng.uniform(0.1, 10))
                worst = max(worst, N.holder_check(f, h, phi, phi_conj=conj).empirical_constant)
        return worst

    worst, dt = timed(run)
    return record(3, "Orlicz-Holder, 100 pairs on 64^2 for power(2) and LLogL", worst <= 1.0, dt, 30.0,
                  f"max ratio {worst:.4f}")


# 4 -------------------------------------------------------------------------------------------


def criterion_brute_force():
    rng = np.random.default_rng(4)
    layouts = [(G.ZERO, G.CUBE), (G.PERIODIC, G.CUBE), (G.ZERO, G.BALL), (G.ZERO, G.BOX)]

    def run():
        bad = 0
        for case in range(20):
            boundary, shape = layouts[case % 4]
            g = G.Grid(1, 16, 0.5, boundary)
            fam = G.WindowFamily(shape, (0, 1, 2, 3))
            f = G.SampledFunction(g, G.quantize(rng.normal(size=16), 2.0**-10))
            b = G.SampledFunction(g, G.quantize(rng.normal(size=16), 2.0**-10))
            alpha = float(rng.choice([0.0, 0.25, 0.5]))
            af, bv = np.abs(f.values), b.values
            mf = brute_sup(g, alpha, fam, lambda x: af)
            checks = [
                (O.fractional_maximal(f, alpha, fam).values, mf),
                (O.maximal_commutator(b, f, alpha, fam).values,
                 brute_sup(g, alpha, fam, lambda x: np.abs(bv[x] - bv) * af)),
                (O.nonlinear_commutator(b, f, alpha, fam).values,
                 bv * mf - brute_sup(g, alpha, fam, lambda x: np.abs(bv * f.values))),
            ]
            B0 = G.Window.ball(g.origin, 1) if shape == G.BALL else G.Window.cube(g.origin, 1)
            m = B0.mask(g)
            local = O.local_fractional_maximal(b, B0, alpha, fam).values
            checks.append((local[m], brute_sup(g, alpha, fam, lambda x: np.abs(bv) * m, within=m)[m]))
            bad += sum(not np.array_equal(a, o) for a, o in checks)
        return bad

    bad, dt = timed(run)
    return record(4, "operators vs exhaustive oracle, 20 cases N=16 radii {0..3}", bad == 0, dt, 10.0,
                  f"{bad} mismatching operator outputs")


# 5 -------------------------------------------------------------------------------------------


def pointwise_cases(grid):
    corpus = V.make_corpus(grid, seed=5)
    return corpus.tagged("indicator")[::3] + corpus.tagged("lipschitz")[1:3] + corpus.tagged("spike") + \
        corpus.tagged("random")[:3]


def criterion_pointwise():
    setups = [(G.Grid(1, 64, 1 / 64), G.WindowFamily(G.CUBE, (0, 1, 2, 4, 8, 16))),
              (G.Grid(2, 32, 1 / 32), G.WindowFamily(G.CUBE, (0, 1, 2, 4, 8)))]

    def run():
        failures, cases = 0, 0
        for g, fam in setups:
            b, bound = G.synth_lipschitz(0.5, [((0.0,) * g.dim, 1.0)], g)
            for f in pointwise_cases(g):
                rep = V.pointwise_suite(b, f, 0.25 * g.dim, 0.5, fam, bound=bound)
                failures += not rep.passed
                cases += 1
        return failures, cases

    (failures, cases), dt = timed(run)
    return record(5, "pointwise suite, 10 cases on 64 (1-D) and 32^2 (2-D)", failures == 0 and cases == 20, dt,
                  60.0, f"{failures} failing of {cases}")


# 6 -------------------------------------------------------------------------------------------


def criterion_identity():
    g = G.Grid(1, 512, 1 / 512)
    b, _ = G.synth_lipschitz(0.5, [((0.05,), 1.0), ((-0.1,), -0.5)], g)

    def run():
        bad = 0
        for k in range(8):
            B0 = G.Window.cube(g.origin, 2**k)
            fam = G.WindowFamily(G.BOX, (2**k,))
            for alpha in (0.0, 0.25, 0.5):
                bad += not V.identity_suite(b, B0, alpha, fam).passed
        return bad

    bad, dt = timed(run)
    return record(6, "identity suite, 8 dyadic windows x alpha in {0, n/4, n/2}", bad == 0, dt, 10.0,
                  f"{bad} failing")


# 7 -------------------------------------------------------------------------------------------


def criterion_condition_scans():
    triples = [(2, 4, 0.25), (1, 2, 0.5), (3, 6, 1 / 6)]

    def run():
        ok = True
        for p, q, e in triples:
            c, rep = V.inverse_condition_scan(Y.power(p), Y.power(q), e)
            ratios = np.array([row[1] for row in rep.table])
            # zero grid variance up to a few ulps of the unit ratio
            ok &= rep.passed and abs(c - 1.0) <= 4e-16 * 4 and float(np.ptp(ratios)) <= 4 * 2.2e-16
            for d in (-0.05, 0.05):
                _, bad = V.inverse_condition_scan(Y.power(p), Y.power(1 / (1 / q + d)), e)
                ok &= not bad.passed
        return ok

    ok, dt = timed(run)
    return record(7, "condition scans: matched powers flat, +-0.05 perturbations diverge", ok, dt, 1.0)


# 8 -------------------------------------------------------------------------------------------


def criterion_pair_criteria():
    pairs = [(Y.power(2), Y.power(4), 0.25), (Y.power(2), Y.power(3), 0.25), (Y.llogl(), Y.power(2), 0.25),
             (Y.power(2), Y.llogl(), 0.25)]

    def run():
        reps = [V.pair_criteria_check(phi, psi, a, 1) for phi, psi, a in pairs]
        return reps

    reps, dt = timed(run)
    # every pair must reach all three criteria where they apply, agreeing with one another
    ok = all(r.passed and len(set(r.params["verdicts"].values())) == 1 for r in reps)
    ok &= sum("cianchi" in r.params["verdicts"] for r in reps) >= 2
    verdicts = "; ".join(f"{r.params['phi']}/{r.params['psi']}: {'bounded' if all(r.params['verdicts'].values()) else 'unbounded'}"
                         f" ({len(r.params['verdicts'])} criteria)" for r in reps)
    return record(8, "scan vs domination vs auxiliary pair agree", ok, dt, 10.0, verdicts)


# 9 -------------------------------------------------------------------------------------------


def criterion_capacity():
    g = G.Grid(1, 512, 1.0)
    phi = Y.power(2)
    psi = Y.matched_target(phi, 0.5)
    cone, _ = G.synth_lipschitz(0.5, [((0.0,), 1.0)], g)

    def run():
        a = V.capacity_functional(cone, phi, psi, 0.0, 0.5, radii=(4, 8, 16, 32))[1]
        b = V.capacity_functional(G.step(g), phi, psi, 0.0, 0.5, radii=(4, 8, 16, 32))[1]
        return a, b

    (a, b), dt = timed(run)
    ca = [row[2] for row in a.table]
    cb = [row[2] for row in b.table]
    cone_ratio = max(ca) / min(ca)
    step_monotone = all(x >= y for x, y in zip(cb, cb[1:]))
    step_ratio = cb[0] / cb[-1]
    ok = cone_ratio <= 1.5 and step_monotone and step_ratio >= 2.0
    return record(9, "capacity functional: cone bounded, step grows", ok, dt, 60.0,
                  f"cone max/min {cone_ratio:.3f}, step growth {step_ratio:.3f}x")


# 10 ------------------------------------------------------------------------------------------


def criterion_determinism(tmp):
    suites = ",".join(cli.SUITES)
    configs = [["--dim", "1", "--N", "64"], ["--dim", "2", "--N", "16", "--alpha", "0.5", "--radii", "0,1,2,4"]]

    def run():
        same = True
        for i, extra in enumerate(configs):
            trees = []
            for tag, par in (("a", "1"), ("b", "1"), ("c", "4")):
                out = os.path.join(tmp, f"{i}{tag}")
                cli.main(["verify", "run", "--suites", suites, "--seed", "17", "--parallel", par, "--out", out]
                         + extra)
                trees.append({n: open(os.path.join(out, n), "rb").read() for n in sorted(os.listdir(out))})
            same &= trees[0] == trees[1] == trees[2] and len(trees[0]) > len(cli.SUITES)
        return same

    same, dt = timed(run)
    return record(10, "byte-identical reports on rerun and under --parallel 4", same, dt, None)


CRITERIA = [criterion_duality, criterion_indicator_norms, criterion_holder, criterion_brute_force,
            criterion_pointwise, criterion_identity, criterion_condition_scans, criterion_pair_criteria,
            criterion_capacity]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__.replace("criterion_", ""))
def test_criterion(criterion):
    assert criterion()


def test_determinism(tmp_path):
    assert criterion_determinism(str(tmp_path))


if __name__ == "__main__":
    import tempfile

    for c in CRITERIA:
        c()
    with tempfile.TemporaryDirectory() as d:
        criterion_determinism(d)
    for k in sorted(RESULTS):
        print(RESULTS[k])
    sys.exit(0 if all("[PASS]" in v for v in RESULTS.values()) else 1)
