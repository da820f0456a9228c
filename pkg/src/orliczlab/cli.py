"""Command-line experiment runner.

Configuration is an INI file (``--config``) whose values can be overridden
by flags. Sections and keys, with defaults::

    [young]     phi = power:p=2        psi = power:p=4
    [operator]  alpha = 0.25           beta = 0.5        b = cone
    [grid]      dim = 1   N = 64       h = 1/N           boundary = zero
    [family]    shape = cube           radii = 0,1,2,4,8,16
    [corpus]    seed = 0
    [run]       suites = duality       parallel = 1
    [output]    dir = reports

Young-function specs: power:p=<p>, explin, linfty, llogl, table[:<csv>].
Function specs: const:c=, indicator:radius=,shape=, cone:beta=,weight=,
spike:gamma=, step:at=, or a path to a saved grid function.

Exit status: 0 when every selected suite passes, 1 when one fails, 2 when
the configuration is invalid.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import grid as G
from . import norms as N
from . import operators as O
from . import verify as V
from . import young as Y
from .report import VerificationReport, merge

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

SUITES = ("duality", "indicator_norms", "holder", "mean_bound", "unit_ball", "condition_scan", "pair_criteria",
          "norm_ratio", "pointwise", "identity", "capacity", "necessity", "weak_necessity")
LIPSCHITZ_SUITES = ("pointwise", "capacity", "weak_necessity")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    phi: str = "power:p=2"
    psi: str = "power:p=4"
    alpha: float = 0.25
    beta: float = 0.5
    b: str = "cone"
    dim: int = 1
    N: int = 64
    h: float | None = None
    boundary: str = G.ZERO
    shape: str = G.CUBE
    radii: tuple = (0, 1, 2, 4, 8, 16)
    seed: int = 0
    suites: tuple = ("duality",)
    out: str = "reports"
    parallel: int = 1

    def grid(self) -> G.Grid:
        return G.Grid(self.dim, self.N, self.h if self.h is not None else 1.0 / self.N, self.boundary)

    def family(self) -> G.WindowFamily:
        return G.WindowFamily(self.shape, tuple(self.radii))

    def young_pair(self) -> tuple[Y.YoungFunction, Y.YoungFunction]:
        return Y.from_spec(self.phi), Y.from_spec(self.psi)

    def validate(self) -> "ExperimentConfig":
        try:
            self.young_pair()
            g = self.grid()
            self.family().validate(g)
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from exc
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suites {unknown}; choose from {', '.join(SUITES)}")
        if not 0.0 <= self.alpha < self.dim:
            raise ConfigError(f"need 0 <= alpha < n (alpha={self.alpha}, n={self.dim})")
        if any(s in LIPSCHITZ_SUITES for s in self.suites):
            if not 0.0 < self.beta < 1.0:
                raise ConfigError(f"need 0 < beta < 1 for Lipschitz suites (beta={self.beta})")
            if not 0.0 < self.alpha + self.beta < self.dim:
                raise ConfigError(f"need 0 < alpha + beta < n for Lipschitz suites "
                                  f"(alpha+beta={self.alpha + self.beta}, n={self.dim})")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.parallel < 1:
            raise ConfigError("--parallel must be at least 1")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        # worker count and output location do not affect results
        d.pop("parallel")
        d.pop("out")
        d["radii"] = list(self.radii)
        d["suites"] = list(self.suites)
        return d


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _words(text: str) -> tuple:
    return tuple(x.strip() for x in text.replace("\n", ",").split(",") if x.strip())


# (section, key, field, parser)
_KEYS = (
    ("young", "phi", "phi", str), ("young", "psi", "psi", str),
    ("operator", "alpha", "alpha", float), ("operator", "beta", "beta", float), ("operator", "b", "b", str),
    ("grid", "dim", "dim", int), ("grid", "N", "N", int), ("grid", "h", "h", float),
    ("grid", "boundary", "boundary", str),
    ("family", "shape", "shape", str), ("family", "radii", "radii", _ints),
    ("corpus", "seed", "seed", int),
    ("run", "suites", "suites", _words), ("run", "parallel", "parallel", int),
    ("output", "dir", "out", str),
)


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the INI file, then non-None overrides."""
    values = {}
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {(s, k) for s, k, _, _ in _KEYS}
        for sec in cp.sections():
            for key in cp[sec]:
                if (sec, key) not in known:
                    raise ConfigError(f"unknown config key [{sec}] {key}")
        for sec, key, name, conv in _KEYS:
            if cp.has_option(sec, key):
                try:
                    values[name] = conv(cp.get(sec, key))
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{sec}] {key}: {exc}") from exc
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    try:
        return replace(ExperimentConfig(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# --- suites ---------------------------------------------------------------------------


@dataclass
class _Context:
    cfg: ExperimentConfig
    grid: G.Grid
    family: G.WindowFamily
    phi: Y.YoungFunction
    psi: Y.YoungFunction

    @classmethod
    def build(cls, cfg: ExperimentConfig) -> "_Context":
        phi, psi = cfg.young_pair()
        return cls(cfg, cfg.grid(), cfg.family(), phi, psi)

    @property
    def corpus(self) -> V.Corpus:
        # rebuilt per suite so suites share no state
        return V.make_corpus(self.grid, seed=self.cfg.seed, beta=self.cfg.beta)

    def symbol(self) -> tuple[G.SampledFunction, float | None]:
        return load_symbol(self.cfg.b, self.grid, self.cfg.beta)

    def cube_radii(self, candidates) -> list[int]:
        return [r for r in candidates if 2 * r + 1 <= self.grid.N]


def load_symbol(spec: str, grid: G.Grid, beta: float) -> tuple[G.SampledFunction, float | None]:
    """The multiplier b and, for synthesized cones, its exact seminorm bound."""
    kind, _, rest = spec.partition(":")
    if kind.strip().lower() == "cone":
        opts = dict(item.split("=", 1) for item in rest.split(",") if item)
        b, bound = G.synth_lipschitz(float(opts.get("beta", beta)),
                                     [((0.0,) * grid.dim, float(opts.get("weight", 1.0)))], grid)
        return b, bound
    return load_input(spec, grid), None


def load_input(spec: str, grid: G.Grid) -> G.SampledFunction:
    if os.path.exists(spec):
        f = G.load_function(spec, grid.boundary)
        if f.grid.shape != grid.shape:
            raise ConfigError(f"{spec}: grid shape {f.grid.shape} does not match {grid.shape}")
        return f
    try:
        return G.function_from_spec(spec, grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _suite_duality(ctx: _Context) -> VerificationReport:
    return merge("duality", [Y.duality_bracket_check(ctx.phi), Y.duality_bracket_check(ctx.psi)])


def _suite_indicator_norms(ctx: _Context) -> VerificationReport:
    rep = VerificationReport("indicator_norms", tolerance=1e-8)
    rep.table_header = ("young", "radius", "volume", "luxemburg", "weak", "expected")
    worst = 0.0
    for phi in (ctx.phi, ctx.psi):
        for r in ctx.cube_radii(V.indicator_radii(ctx.grid.N)):
            B = G.Window.cube(ctx.grid.origin, r)
            chi = G.indicator(B, ctx.grid)
            vol = B.volume(ctx.grid)
            expected = 1.0 / Y.inverse_young(phi, 1.0 / vol)
            lux, weak = N.luxemburg_norm(chi, phi).value, N.weak_norm(chi, phi).value
            err = max(abs(lux - expected), abs(weak - expected)) / expected
            worst = max(worst, err)
            if err > rep.tolerance:
                rep.add_witness({"young": phi.name, "radius": r, "relative_error": err})
            rep.table.append([phi.name, r, vol, lux, weak, expected])
    rep.worst_margin = rep.tolerance - worst
    rep.passed = worst <= rep.tolerance
    rep.empirical_constant = worst
    return rep


def _suite_holder(ctx: _Context) -> VerificationReport:
    rng = np.random.default_rng(ctx.cfg.seed)
    conj = Y.conjugate(ctx.phi)
    parts = []
    for _ in range(10):
        f = G.SampledFunction(ctx.grid, rng.standard_normal(ctx.grid.shape) * rng.uniform(0.1, 10))
        g = G.SampledFunction(ctx.grid, rng.standard_normal(ctx.grid.shape) * rng.uniform(0.1, 10))
        parts.append(N.holder_check(f, g, ctx.phi, phi_conj=conj))
    rep = merge("holder", parts, {"phi": ctx.phi.name, "pairs": len(parts)})
    rep.table_header = ("pair", "ratio")
    rep.table = [[i, p.empirical_constant] for i, p in enumerate(parts)]
    return rep


def _suite_mean_bound(ctx: _Context) -> VerificationReport:
    B = V.default_window(ctx.grid, ctx.family)
    items = ctx.corpus.items
    parts = [N.mean_bound_check(f, B, ctx.phi) for f in items]
    rep = merge("mean_bound", parts, {"phi": ctx.phi.name})
    rep.table_header = ("function", "constant")
    rep.table = [[f.tag, p.empirical_constant] for f, p in zip(items, parts)]
    return rep


def _suite_unit_ball(ctx: _Context) -> VerificationReport:
    parts = [N.unit_ball_check(f, ctx.phi) for f in ctx.corpus.items]
    return merge("unit_ball", parts, {"phi": ctx.phi.name})


def _suite_condition_scan(ctx: _Context) -> VerificationReport:
    return V.inverse_condition_scan(ctx.phi, ctx.psi, ctx.cfg.alpha / ctx.grid.dim)[1]


def _suite_pair_criteria(ctx: _Context) -> VerificationReport:
    return V.pair_criteria_check(ctx.phi, ctx.psi, ctx.cfg.alpha, ctx.grid.dim)


def _suite_norm_ratio(ctx: _Context) -> VerificationReport:
    op = V.maximal_op(ctx.cfg.alpha, ctx.family)
    corpus = ctx.corpus
    parts = [V.empirical_norm_ratio(op, ctx.phi, ctx.psi, corpus, target, ctx.cfg.parallel)[1]
             for target in (V.STRONG, V.WEAK)]
    rep = merge("norm_ratio", parts, {"phi": ctx.phi.name, "psi": ctx.psi.name, "alpha": ctx.cfg.alpha})
    rep.table_header = ("target", "function", "ratio")
    rep.table = [[p.params["target"]] + row for p in parts for row in p.table]
    return rep


def _suite_pointwise(ctx: _Context) -> VerificationReport:
    b, bound = ctx.symbol()
    items = ctx.corpus.items
    parts = [V.pointwise_suite(b, f, ctx.cfg.alpha, ctx.cfg.beta, ctx.family, bound=bound,
                               workers=ctx.cfg.parallel) for f in items]
    for f, p in zip(items, parts):
        p.check = f"pointwise[{f.tag}]"
    rep = merge("pointwise", parts, {"alpha": ctx.cfg.alpha, "beta": ctx.cfg.beta, "b": ctx.cfg.b,
                                     "cases": len(parts)})
    rep.empirical_constant = float("nan")
    return rep


def _suite_identity(ctx: _Context) -> VerificationReport:
    b, _ = ctx.symbol()
    parts = []
    for r in ctx.cube_radii([2**k for k in range(8)]):
        fam = ctx.family if ctx.family.shape == G.BOX else G.WindowFamily(G.BOX, (r,))
        B0 = G.Window.cube(ctx.grid.origin, r)
        if not fam.includes(B0, ctx.grid):
            continue
        p = V.identity_suite(b, B0, ctx.cfg.alpha, fam)
        p.check = f"identity[r={r}]"
        parts.append(p)
    rep = merge("identity", parts, {"alpha": ctx.cfg.alpha, "b": ctx.cfg.b})
    if ctx.family.shape != G.BOX:
        rep.notes.append("windows taken from the box family, which is closed under intersection")
    return rep


def _suite_capacity(ctx: _Context) -> VerificationReport:
    b, _ = ctx.symbol()
    radii = ctx.cube_radii((4, 8, 16, 32))
    return V.capacity_functional(b, ctx.phi, ctx.psi, ctx.cfg.alpha, ctx.cfg.beta, radii,
                                 workers=ctx.cfg.parallel)[1]


def _suite_necessity(ctx: _Context) -> VerificationReport:
    return V.necessity_chain(ctx.phi, ctx.psi, ctx.cfg.alpha, ctx.grid)


def _suite_weak_necessity(ctx: _Context) -> VerificationReport:
    b, _ = ctx.symbol()
    radii = ctx.cube_radii((2, 4, 8, 16))
    return V.weak_necessity_chain(b, ctx.phi, ctx.psi, ctx.cfg.alpha, ctx.cfg.beta, radii,
                                  workers=ctx.cfg.parallel)


RUNNERS = {name: globals()[f"_suite_{name}"] for name in SUITES}


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def run(cfg: ExperimentConfig) -> int:
    """Run the selected suites in order; write one JSON (and CSV table) per suite and summary.json."""
    cfg.validate()
    os.makedirs(cfg.out, exist_ok=True)
    summary = {"config": cfg.to_dict(), "suites": {}}
    for name in cfg.suites:
        try:
            rep = RUNNERS[name](_Context.build(cfg))
        except ValueError as exc:
            rep = VerificationReport(name, passed=False, worst_margin=float("-inf"))
            rep.notes.append(f"error: {exc}")
        rep.params.setdefault("suite", name)
        _write(os.path.join(cfg.out, f"{name}.json"), rep.to_json() + "\n")
        if rep.table:
            _write(os.path.join(cfg.out, f"{name}.csv"), rep.table_csv())
        summary["suites"][name] = {"passed": bool(rep.passed), "worst_margin": rep.to_dict()["worst_margin"]}
        print(f"{name:<16} {'PASS' if rep.passed else 'FAIL'}")
    summary["all_passed"] = all(s["passed"] for s in summary["suites"].values())
    _write(os.path.join(cfg.out, "summary.json"), json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if summary["all_passed"] else EXIT_FAIL


# --- other subcommands ------------------------------------------------------------------


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        os.makedirs(out, exist_ok=True)
        _write(os.path.join(out, "result.json"), text)
    sys.stdout.write(text)


def young_check(cfg: ExperimentConfig, r_grid=None) -> tuple[dict, bool]:
    phi = Y.from_spec(cfg.phi)
    rep = Y.duality_bracket_check(phi, r_grid)
    growth = {}
    for kind in ("delta2", "nabla2"):
        cert = Y.check_growth(phi, kind)
        growth[kind] = {"holds": cert.holds, "constant": cert.constant, "witness": cert.witness, "note": cert.note}
    return {"young": phi.name, "duality": rep.to_dict(), "growth": growth}, rep.passed


def norm_compute(cfg: ExperimentConfig, spec: str) -> dict:
    g = cfg.grid()
    f = load_input(spec, g)
    phi = Y.from_spec(cfg.phi)
    strong, weak = N.luxemburg_norm(f, phi), N.weak_norm(f, phi)
    return {"young": phi.name, "function": f.tag or spec, "grid": g.describe(),
            "luxemburg": {"value": strong.value, "bracket": strong.bracket, "status": strong.status},
            "weak": {"value": weak.value, "status": weak.status}}


OPERATORS = ("maximal", "commutator", "nonlinear", "local")


def op_apply(cfg: ExperimentConfig, op: str, spec: str) -> G.SampledFunction:
    g = cfg.grid()
    fam = cfg.family()
    O.OperatorParams(cfg.alpha, fam).validate(g)
    f = load_input(spec, g)
    if op == "maximal":
        return O.fractional_maximal(f, cfg.alpha, fam)
    b, _ = load_symbol(cfg.b, g, cfg.beta)
    if op == "commutator":
        return O.maximal_commutator(b, f, cfg.alpha, fam, cfg.parallel)
    if op == "nonlinear":
        return O.nonlinear_commutator(b, f, cfg.alpha, fam)
    if op == "local":
        return O.local_fractional_maximal(f, V.default_window(g, fam), cfg.alpha, fam)
    raise ConfigError(f"unknown operator {op!r}")


def corpus_make(cfg: ExperimentConfig) -> dict:
    corpus = V.make_corpus(cfg.grid(), seed=cfg.seed, beta=cfg.beta)
    os.makedirs(cfg.out, exist_ok=True)
    manifest = {"seed": cfg.seed, "grid": cfg.grid().describe(), "items": []}
    for i, f in enumerate(corpus):
        name = f"{i:02d}.grid"
        G.save_function(f, os.path.join(cfg.out, name))
        manifest["items"].append({"file": name, "tag": f.tag})
    _write(os.path.join(cfg.out, "manifest.json"), json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


# --- argument parsing ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    d = ExperimentConfig()
    p.add_argument("--config", help="INI experiment config (see module help for the grammar)")
    p.add_argument("--seed", type=int, help=f"corpus seed (default {d.seed})")
    p.add_argument("--out", help=f"output directory (default {d.out})")
    p.add_argument("--parallel", type=int, help=f"worker threads inside a suite (default {d.parallel})")
    p.add_argument("--phi", help=f"Young function spec (default {d.phi})")
    p.add_argument("--psi", help=f"target Young function spec (default {d.psi})")
    p.add_argument("--alpha", type=float, help=f"fractional order (default {d.alpha})")
    p.add_argument("--beta", type=float, help=f"Lipschitz order (default {d.beta})")
    p.add_argument("--b", dest="b", help=f"multiplier function spec or file (default {d.b})")
    p.add_argument("--dim", type=int, help=f"dimension (default {d.dim})")
    p.add_argument("--N", dest="N", type=int, help=f"points per axis (default {d.N})")
    p.add_argument("--h", type=float, help="spacing (default 1/N)")
    p.add_argument("--boundary", choices=G.BOUNDARIES, help=f"(default {d.boundary})")
    p.add_argument("--shape", choices=G.SHAPES, help=f"window shape (default {d.shape})")
    p.add_argument("--radii", type=_ints, help="comma-separated window radii (default 0,1,2,4,8,16)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orliczlab", description=__doc__.split("\n\n")[0],
                                     epilog=__doc__.split("\n\n", 1)[1],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    groups = parser.add_subparsers(dest="group", required=True)

    young = groups.add_parser("young").add_subparsers(dest="action", required=True)
    _common(young.add_parser("check", help="duality bracket and growth conditions of --phi"))

    norm = groups.add_parser("norm").add_subparsers(dest="action", required=True)
    p = norm.add_parser("compute", help="Luxemburg and weak norms of a function")
    _common(p)
    p.add_argument("function", help="function spec or saved grid file")

    op = groups.add_parser("op").add_subparsers(dest="action", required=True)
    p = op.add_parser("apply", help="apply an operator and save the result")
    _common(p)
    p.add_argument("operator", choices=OPERATORS)
    p.add_argument("function", help="function spec or saved grid file")

    ver = groups.add_parser("verify").add_subparsers(dest="action", required=True)
    p = ver.add_parser("run", help="run verification suites and write reports")
    _common(p)
    p.add_argument("--suites", type=_words, help=f"comma-separated suites from: {', '.join(SUITES)}")

    corpus = groups.add_parser("corpus").add_subparsers(dest="action", required=True)
    _common(corpus.add_parser("make", help="write the seeded test corpus"))
    return parser


_OVERRIDES = ("seed", "out", "parallel", "phi", "psi", "alpha", "beta", "b", "dim", "N", "h", "boundary",
              "shape", "radii", "suites")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k, None) for k in _OVERRIDES}
    try:
        cfg = load_config(args.config, overrides)
        cfg.validate()
        if args.group == "young":
            payload, ok = young_check(cfg)
            _emit(payload, args.out)
            return EXIT_OK if ok else EXIT_FAIL
        if args.group == "norm":
            _emit(norm_compute(cfg, args.function), args.out)
            return EXIT_OK
        if args.group == "op":
            out = op_apply(cfg, args.operator, args.function)
            os.makedirs(cfg.out, exist_ok=True)
            path = os.path.join(cfg.out, f"{args.operator}.grid")
            G.save_function(out, path)
            print(path)
            return EXIT_OK
        if args.group == "corpus":
            manifest = corpus_make(cfg)
            print(f"{len(manifest['items'])} functions written to {cfg.out}")
            return EXIT_OK
        return run(cfg)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
