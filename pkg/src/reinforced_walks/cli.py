"""Command-line front end: ``reinforced-walks <command> --config <path>``.

The config is one JSON document.  Numeric parameters are given as decimal
strings (plain JSON numbers are accepted too) so that p = "0.5" hits the
p = 1/2 branches exactly.  Output is CSV with LF line endings and reals
printed to 17 significant digits; the only run-dependent line is the
leading ``#`` comment carrying the timestamp.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import enumeration, gof, graphs, moments, walks
from .distributions import make_distribution
from .replicates import default_threads
from .rng import RandomStream

COMMANDS = ("simulate", "moments", "enumerate", "rate", "percolation", "constants", "verify")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------------
# config access
# ----------------------------------------------------------------------------


class Config:
    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        self.data = data

    def has(self, key):
        return key in self.data

    def raw(self, key, default=None, required=True):
        if key not in self.data:
            if required and default is None:
                raise ConfigError(f"missing required key '{key}'")
            return default
        return self.data[key]

    def fraction(self, key, default=None):
        v = self.raw(key, default)
        try:
            if isinstance(v, bool):
                raise ValueError
            if isinstance(v, float):
                return Fraction(repr(v))
            return Fraction(v)
        except (ValueError, TypeError, ZeroDivisionError):
            raise ConfigError(f"key '{key}': expected a decimal number, got {v!r}") from None

    def prob(self, key="p"):
        q = self.fraction(key)
        if not 0 < q < 1:
            raise ConfigError(f"key '{key}': must lie in (0, 1), got {self.data[key]!r}")
        return q

    def integer(self, key, default=None, minimum=None):
        v = self.raw(key, default)
        try:
            if isinstance(v, bool):
                raise ValueError
            f = Fraction(v)
            if f.denominator != 1:
                raise ValueError
            out = int(f)
        except (ValueError, TypeError):
            raise ConfigError(f"key '{key}': expected an integer, got {v!r}") from None
        if minimum is not None and out < minimum:
            raise ConfigError(f"key '{key}': must be >= {minimum}, got {out}")
        return out

    def grid(self, key="n_grid"):
        v = self.raw(key)
        if not isinstance(v, list) or not v:
            raise ConfigError(f"key '{key}': expected a nonempty list of integers")
        sub = Config({key: None})
        out = []
        for item in v:
            sub.data[key] = item
            out.append(sub.integer(key, minimum=1))
        return sorted(set(out))

    def distribution(self, key="distribution", default="rademacher"):
        try:
            return make_distribution(self.raw(key, default))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"key '{key}': {exc}") from None

    def mode(self, key="mode"):
        m = self.raw(key, "positive")
        if m not in walks.MODES:
            raise ConfigError(f"key '{key}': expected one of {walks.MODES}, got {m!r}")
        return m


# ----------------------------------------------------------------------------
# CSV output
# ----------------------------------------------------------------------------


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return format(float(v), ".17g")
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    if hasattr(v, "item"):
        return fmt(v.item())
    return str(v)


class CsvOut:
    def __init__(self, command: str):
        self.command = command
        self.lines: list[str] = []

    def row(self, *values):
        self.lines.append(",".join(fmt(v) for v in values))

    def render(self) -> str:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return f"# reinforced-walks {self.command} {stamp}\n" + "".join(line + "\n" for line in self.lines)


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def cmd_simulate(cfg: Config, out: CsvOut, threads):
    dist = cfg.distribution()
    p = cfg.prob()
    mode = cfg.mode()
    n = cfg.integer("n", minimum=1)
    reps = cfg.integer("replicates", 1, minimum=1)
    seed = cfg.integer("seed", 0, minimum=0)
    out.row("replicate", "innovations", "terminal", "normalized", "representation")
    ok = True
    for r in range(reps):
        trace = walks.simulate(mode, dist, float(p), n, RandomStream(seed, r, walks.STREAM_WALK))
        try:
            z = walks.normalized_statistic(trace, dist, p)
        except ValueError:
            z = None
        rep = walks.representation_check(trace)
        ok &= rep
        out.row(r, trace.innovation_count, trace.terminal, z, rep)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _default_grid(n):
    grid = {n}
    k = 10
    while k < n:
        grid.add(k)
        k *= 10
    return sorted(grid)


def cmd_moments(cfg: Config, out: CsvOut, threads):
    p = cfg.prob()
    grid = cfg.grid() if cfg.has("n_grid") else _default_grid(cfg.integer("n", minimum=1))
    n_max = grid[-1]
    pf = float(p)
    ez2 = moments.ez_series(3, n_max, pf)[1]
    var = moments.varz2_series(n_max, pf)
    out.row("n", "ez2", "ez2_closed", "bn", "ratio", "varz2", "b4")
    for n in grid:
        try:
            b = moments.bn(n, p)
        except ValueError:
            b = None
        e = float(ez2[n - 1])
        out.row(n, e, moments.ez2_closed(n, pf), b, None if b is None else e / b, float(var[n - 1]), moments.b_l(4, n, p))
    return EXIT_OK


def cmd_enumerate(cfg: Config, out: CsvOut, threads):
    p = cfg.prob()
    n = cfg.integer("n", minimum=1)
    lmax = cfg.integer("lmax", 6, minimum=0)
    try:
        e = enumeration.enum_percolation(n, p)
    except ValueError as exc:
        raise ConfigError(f"key 'n': {exc}") from None
    out.row("quantity", "index", "mean", "variance")
    for k in (1, 2):
        out.row("nu", k, *e.nu_moments(k))
    for l in range(lmax + 1):
        out.row("Z", l, *e.z_moments(l))
    out.row("total", None, e.total, None)
    if cfg.has("distribution"):
        dist = cfg.distribution()
        mode = cfg.mode()
        try:
            w = enumeration.enum_walk_pmf(n, p, dist, mode)
        except ValueError as exc:
            raise ConfigError(f"walk enumeration: {exc}") from None
        out.row("walk_mean", None, w.mean, None)
        out.row("walk_variance", None, w.variance, None)
        out.row("walk_dk", None, w.dk, None)
        for x, q in w.pmf.items():
            out.row("walk_atom", x, q, None)
    return EXIT_OK


def cmd_rate(cfg: Config, out: CsvOut, threads):
    target = cfg.raw("target")
    if target not in gof.TARGETS:
        raise ConfigError(f"key 'target': expected one of {gof.TARGETS}, got {target!r}")
    p = cfg.prob()
    dist = cfg.distribution() if target in ("positive-walk", "negative-walk") else None
    grid = cfg.grid()
    N = cfg.integer("replicates", minimum=gof.MIN_REPLICATES)
    seed = cfg.integer("seed", 0, minimum=0)
    alpha = float(cfg.fraction("alpha", "0.05"))
    try:
        table = gof.rate_experiment(target, dist, p, grid, N, seed, alpha=alpha, threads=threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out.row("n", "N", "dk", "dkw", "delta", "ratio")
    for r in table.rows:
        out.row(r.n, r.N, r.dk, r.dkw, r.delta, r.ratio)
    out.row("slope", table.slope, table.stderr, "inconclusive" if table.inconclusive else "conclusive")
    return EXIT_OK


def _graph_from(cfg: Config):
    spec = cfg.raw("graph")
    try:
        if isinstance(spec, str):
            return graphs.read_edge_list(spec)
        if isinstance(spec, dict) and spec.get("kind") in ("complete", "path"):
            n = Config(spec).integer("n", minimum=1)
            return graphs.Graph.complete(n) if spec["kind"] == "complete" else graphs.Graph.path(n)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"key 'graph': {exc}") from None
    raise ConfigError("key 'graph': expected an edge-list path or {'kind': 'complete'|'path', 'n': ...}")


def cmd_percolation(cfg: Config, out: CsvOut, threads):
    graph = _graph_from(cfg)
    pt = float(cfg.prob("ptilde"))
    d_max = cfg.integer("d_max", int(graph.degree.max()) if graph.m else 0, minimum=0)
    reps = cfg.integer("replicates", 10_000, minimum=2)
    seed = cfg.integer("seed", 0, minimum=0)
    sigma2 = float(cfg.fraction("sigma2")) if cfg.has("sigma2") else None
    res = graphs.mc_degree_counts(graph, pt, range(d_max + 1), reps, seed, threads)
    out.row("d", "exact_mean", "mc_mean", "mc_variance", "mc_stderr", "be_bound", "constant_free")
    for r in res:
        s2 = sigma2 if sigma2 is not None else r.variance
        bound = graphs.be_bound(graph, pt, s2) if s2 > 0 else None
        out.row(r.d, graphs.exact_mean_count(graph, pt, r.d), r.mean, r.variance, r.stderr, bound, True)
    return EXIT_OK


def cmd_constants(cfg: Config, out: CsvOut, threads):
    p = cfg.prob()
    dist = cfg.distribution()
    tc = moments.theory_constants(float(p), dist)
    out.row("name", "value")
    for name in ("p", "m1", "m2", "sigma0sq", "checkb", "checksigmasq", "sigma1sq", "sigma2sq", "sigma3sq", "sigma4sq"):
        out.row(name, getattr(tc, name))
    out.row("negative_identity_residual", tc.negative_identity_residual)
    out.row("tree_identity_residual", tc.tree_identity_residual)
    return EXIT_OK


def _verify_checks():
    """Deterministic cross-oracle checks; yields (name, ok, detail)."""
    from .distributions import discrete, rademacher

    worst = 0.0
    for n in range(1, 9):
        for p in (0.25, 0.5, 0.75):
            e = enumeration.enum_percolation(n, p)
            for l in range(1, 5):
                worst = max(worst, abs(moments.ez(l, n, p) - e.ez(l)))
            worst = max(worst, abs(moments.varz2(n, p) - e.var_z(2)))
    yield "recursion_vs_enumeration", worst <= 1e-10, worst

    worst = 0.0
    for p in (0.3, 0.5, 0.75, 0.9):
        series = moments.ez_series(2, 10_000, p)[1]
        for n in (1, 2, 3, 10, 100, 1000, 10_000):
            worst = max(worst, abs(moments.ez2_closed(n, p) / series[n - 1] - 1))
    yield "closed_form_ez2", worst <= 1e-9, worst

    ratios = {p: moments.ez(2, 10_000, p) / moments.bn(10_000, p) for p in (0.5, 0.6, 0.75, 0.9)}
    ok = all(abs(r - 1) <= (0.02 if p == 0.5 else 0.01) for p, r in ratios.items())
    yield "normalizer_ratio", ok, max(abs(r - 1) for r in ratios.values())

    worst = 0.0
    for i in range(1, 100):
        for dist in (rademacher(), discrete({0: 0.5, 2: 0.5})):
            tc = moments.theory_constants(i / 100, dist)
            worst = max(worst, abs(tc.negative_identity_residual), abs(tc.tree_identity_residual))
    yield "constant_identities", worst <= 1e-12, worst

    worst = 0.0
    for n in range(1, 9):
        for p in (0.25, 0.5, 0.75):
            worst = max(worst, abs(moments.exact_mean_mu(n, p) - enumeration.enum_tree_functionals(n, p).mean_mu))
    yield "tree_mean_vs_enumeration", worst <= 1e-12, worst

    ok = enumeration.enum_delta_pmf(2) == {0: 1} and enumeration.enum_delta_pmf(3) == {-1: Fraction(1, 2), 1: Fraction(1, 2)}
    for k in range(3, 9):
        pmf = enumeration.enum_delta_pmf(k)
        ok &= sum(v * v * q for v, q in pmf.items()) == Fraction(k, 3)
        ok &= sum(v**4 * q for v, q in pmf.items()) <= 6 * k * k
    yield "delta_law", ok, ""

    b = graphs.be_bound(graphs.Graph.path(3), 0.5, 1.0)
    yield "graph_bound_hand_value", abs(b - math.sqrt(0.65625)) <= 1e-12, b

    shape = []
    for p in (0.3, 0.5, 0.75):
        var = moments.varz2_series(10_000, p)
        shape.append((var[9999] / moments.b_l(4, 10_000, p)) / (var[999] / moments.b_l(4, 1000, p)))
    yield "variance_bound_shape", max(shape) <= 1.5, max(shape)

    ok = True
    for mode in walks.MODES:
        for p in (0.3, 0.5, 0.8):
            for dist in (rademacher(), discrete({0: 0.5, 2: 0.5})):
                for r in range(50):
                    trace = walks.simulate(mode, dist, p, 1000, RandomStream(1, r, walks.STREAM_WALK))
                    ok &= walks.representation_check(trace)
    yield "representation_coupling", ok, ""


def cmd_verify(cfg: Config, out: CsvOut, threads):
    out.row("check", "status", "detail")
    failed = False
    for name, ok, detail in _verify_checks():
        failed |= not ok
        out.row(name, "pass" if ok else "fail", detail)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


HANDLERS = {
    "simulate": cmd_simulate,
    "moments": cmd_moments,
    "enumerate": cmd_enumerate,
    "rate": cmd_rate,
    "percolation": cmd_percolation,
    "constants": cmd_constants,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="reinforced-walks", description="Step-reinforced random walk experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file ('verify' may omit it)")
    ap.add_argument("--out", help="output CSV path (default: config 'output' or stdout)")
    ap.add_argument("--threads", type=int, help="worker threads (default: $REINFORCED_WALKS_THREADS or 1)")
    return ap


def load_config(path) -> Config | None:
    if path is None:
        return None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        return Config(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None


def run(command: str, cfg: Config | None, out_path=None, threads=None, stdout=None) -> int:
    if cfg is None:
        if command != "verify":
            raise ConfigError(f"command '{command}' needs --config")
        cfg = Config({})
    out = CsvOut(command)
    status = HANDLERS[command](cfg, out, threads)
    text = out.render()
    target = out_path or cfg.data.get("output")
    if target:
        with open(target, "w", newline="\n") as fh:
            fh.write(text)
    else:
        (stdout or sys.stdout).write(text)
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = args.threads if args.threads is not None else default_threads()
        if threads < 1:
            raise ConfigError("--threads must be positive")
        cfg = load_config(args.config)
        return run(args.command, cfg, args.out, threads)
    except ConfigError as exc:
        print(f"reinforced-walks: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"reinforced-walks: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
