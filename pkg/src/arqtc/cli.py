"""Command-line front end: figure tables, optimizers and cross-validation runs.

Configuration comes from defaults, then an optional ``key=value`` file
(``--config``), then the ``SEED`` environment variable, then ``--key value``
flags.  Every command writes a CSV preceded by a ``#`` header block holding
the schema version and the full configuration, so an output file can be
re-run as its own config.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass
from typing import Optional

from .analytic import (NumericalInstabilityWarning, PrecisionLossError, success_prob_single,
                       success_prob_two_hop_exact, transmission_capacity_exact)
from .bounds import (NumericRangeError, hop_tightness, single_hop_bounds,
                     success_lower_bound_multi, success_upper_bound_single, tc_lower_bound)
from .model import HopPlan, NetworkParams, ParameterError
from .optimize import (InfeasibleAllocation, SparseApproximationWarning, allocate_budgets,
                       optimal_hop_count, sparse_tc_approximation)
from .quadrature import QuadratureSpec, ToleranceError
from .sim import SimConfig, estimate_success, simulate_first_success, summarize

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _join(values) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


@dataclass
class RunConfig:
    lam: float = 0.1
    p: float = 0.5
    alpha: float = 3.0
    beta: float = 3.0
    d: float = 1.0
    hops: tuple[float, ...] = ()
    budgets: tuple[int, ...] = ()
    D: int = 6
    N_max: int = 8
    trials: int = 10_000
    seed: int = 0
    quad_rel_tol: float = 1e-9
    delay_convention: str = "analytic-compatible"
    output: str = "-"
    workers: int = 1
    geometry: str = "segment"
    plot: bool = False
    sweep: str = "point"
    hop_count: bool = False

    # config-file key -> (attribute, parser, formatter)
    @staticmethod
    def schema():
        return {
            "lambda": ("lam", float, repr),
            "p": ("p", float, repr),
            "alpha": ("alpha", float, repr),
            "beta": ("beta", float, repr),
            "d": ("d", float, repr),
            "hops": ("hops", _floats, _join),
            "budgets": ("budgets", _ints, _join),
            "D": ("D", int, str),
            "N_max": ("N_max", int, str),
            "trials": ("trials", int, str),
            "seed": ("seed", int, str),
            "quad_rel_tol": ("quad_rel_tol", float, repr),
            "delay_convention": ("delay_convention", str, str),
            "output": ("output", str, str),
            "workers": ("workers", int, str),
            "geometry": ("geometry", str, str),
            "plot": ("plot", _bool, lambda b: "true" if b else "false"),
            "sweep": ("sweep", str, str),
            "hop_count": ("hop_count", _bool, lambda b: "true" if b else "false"),
        }

    def set(self, key: str, text: str):
        schema = self.schema()
        if key not in schema:
            raise ConfigError(f"unknown configuration key {key!r}")
        attr, parse, _ = schema[key]
        try:
            setattr(self, attr, parse(text.strip()))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None

    def serialize(self, exclude=("workers", "output")) -> list[str]:
        """``key=value`` lines.

        ``workers`` and ``output`` are left out by default: neither changes
        the numbers, and leaving them in would make otherwise identical runs
        differ byte for byte.
        """
        return [f"{key}={fmt(getattr(self, attr))}"
                for key, (attr, _, fmt) in self.schema().items() if key not in exclude]

    @classmethod
    def parse_text(cls, text: str, base: Optional["RunConfig"] = None) -> "RunConfig":
        cfg = base or cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            cfg.set(key.strip(), value)
        return cfg

    def network(self) -> NetworkParams:
        return NetworkParams(self.lam, self.p, self.alpha, self.beta)

    def distances(self) -> tuple[float, ...]:
        return self.hops if self.hops else (self.d,)

    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.quad_rel_tol)

    def sim(self, trials: Optional[int] = None) -> SimConfig:
        return SimConfig(trials=self.trials if trials is None else trials, seed=self.seed,
                         delay_convention=self.delay_convention, geometry=self.geometry,
                         workers=self.workers)


# ----------------------------------------------------------------- output

class Table:
    def __init__(self, command: str, cfg: RunConfig, columns: list[str], notes=()):
        self.command, self.cfg, self.columns = command, cfg, columns
        self.notes = list(notes)
        self.rows: list[list] = []
        self.summary: list[str] = []

    def add(self, *values):
        self.rows.append([_cell(v) for v in values])

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(f"# arqtc {self.command} schema={SCHEMA_VERSION}\n")
        for note in self.notes:
            buf.write(f"# {note}\n")
        for line in self.cfg.serialize():
            buf.write(f"# config {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        for line in self.summary:
            buf.write(f"# {line}\n")
        return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ";".join(str(x) for x in v)
    return str(v)


def _emit(text: str, cfg: RunConfig):
    if cfg.output == "-":
        sys.stdout.write(text)
        return
    with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _argmax(rows, key):
    best = None
    for r in rows:
        v = key(r)
        if v is not None and not math.isnan(v) and (best is None or v > key(best)):
            best = r
    return best


class _Flags:
    """Collects numeric-instability warnings raised while computing one row."""

    def __enter__(self):
        self._cm = warnings.catch_warnings(record=True)
        self.caught = self._cm.__enter__()
        warnings.simplefilter("always")
        return self

    def __exit__(self, *exc):
        self._cm.__exit__(*exc)
        for w in self.caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return False

    @property
    def unstable(self) -> bool:
        return any(issubclass(w.category, NumericalInstabilityWarning) for w in self.caught)


def _sim_rows(cfg: RunConfig, d: float, Ds, params):
    """Single-hop estimates for several budgets from one run at the largest horizon."""
    if not Ds:
        return {}
    sc = cfg.sim()
    first = simulate_first_success([d], [max(Ds) + 1], params, sc)
    return {D: summarize(first, [D], params, sc) for D in Ds}


def _split(cfg: RunConfig, D: int, params, distances):
    if len(distances) == 1:
        return (D,)
    return allocate_budgets(distances, D, params, spec=cfg.quad()).integer_budgets


# --------------------------------------------------------------- commands

def cmd_dr_curve(cfg: RunConfig) -> Table:
    params, spec = cfg.network(), cfg.quad()
    dist = cfg.distances()
    if len(dist) not in (1, 2):
        raise ConfigError("dr-curve needs one or two hops")
    notes = ["exact: end-to-end success probability; lower: FKG lower bound with per-hop c",
             "simulated, ci_lo, ci_hi: Monte Carlo estimate with Wilson interval"]
    if len(dist) == 1:
        notes.insert(1, "upper: independent-slot upper bound 1-qhat^(D+1)")
    else:
        notes.insert(1, "upper: min over hops of each hop's upper bound (weakest-link bound); "
                        "budgets split by the allocator")
    table = Table("dr-curve", cfg, ["D", "budgets", "exact", "upper", "lower", "simulated",
                                    "ci_lo", "ci_hi", "unstable"], notes)
    Ds = list(range(cfg.D + 1))
    sims = _sim_rows(cfg, dist[0], Ds, params) if len(dist) == 1 and cfg.trials > 0 else {}
    for D in Ds:
        with _Flags() as flags:
            if len(dist) == 1:
                b = single_hop_bounds(D, dist[0], params, spec)
                exact = success_prob_single(D, dist[0], params, spec).total
                budgets, upper, lower = (D,), b.upper, b.lower
                est = sims.get(D)
            else:
                budgets = _split(cfg, D, params, dist)
                plan = HopPlan(dist, budgets)
                exact = success_prob_two_hop_exact(budgets[0], budgets[1], dist[0], dist[1],
                                                   params, spec)
                upper = min(success_upper_bound_single(Dn, dn, params, spec)
                            for dn, Dn in zip(dist, budgets))
                lower = success_lower_bound_multi(plan, params, hop_tightness(plan, params, spec),
                                                  spec)
                est = estimate_success(plan, params, cfg.sim()) if cfg.trials > 0 else None
        sim = (est.p_success.value, est.p_success.lo, est.p_success.hi) if est else (None,) * 3
        table.add(D, budgets, exact, upper, lower, *sim, flags.unstable)
    return table


def cmd_tc_vs_d1(cfg: RunConfig) -> Table:
    params, spec = cfg.network(), cfg.quad()
    dist = cfg.hops if cfg.hops else (cfg.d, cfg.d)
    if len(dist) != 2:
        raise ConfigError("tc-vs-d1 needs exactly two hops")
    table = Table("tc-vs-d1", cfg, ["D1", "D2", "exact_tc", "lb_tc", "sim_tc", "ci_lo", "ci_hi",
                                    "unstable"],
                  ["exact_tc: exact success over summed per-hop delays",
                   "lb_tc: lower bound with per-hop c and per-hop delay model"])
    rows = []
    for D1 in range(cfg.D + 1):
        plan = HopPlan(dist, (D1, cfg.D - D1))
        with _Flags() as flags:
            exact = transmission_capacity_exact(plan, params, spec).capacity
            lb = tc_lower_bound(plan, params, hop_tightness(plan, params, spec), spec).capacity
        sim = (None,) * 3
        if cfg.trials > 0:
            cap = estimate_success(plan, params, cfg.sim()).capacity
            sim = (cap.value, cap.lo, cap.hi)
        rows.append((D1, exact, lb, sim[0]))
        table.add(D1, cfg.D - D1, exact, lb, *sim, flags.unstable)
    for name, idx in (("exact_tc", 1), ("lb_tc", 2), ("sim_tc", 3)):
        best = _argmax(rows, lambda r: r[idx])
        if best is not None:
            table.summary.append(f"argmax {name}: D1={best[0]}")
    return table


def cmd_tc_vs_hops(cfg: RunConfig) -> Table:
    params, spec = cfg.network(), cfg.quad()
    if cfg.N_max < 1:
        raise ConfigError("N_max must be >= 1")
    table = Table("tc-vs-hops", cfg, ["N", "per_hop_budget", "lb_tc", "sim_tc", "ci_lo", "ci_hi",
                                      "sparse_approx"],
                  ["lb_tc: delay-ceiling lower bound, floor(D/N) per hop, per-hop c",
                   "sparse_approx: small-density expansion, relative scale (unitless)"])
    with _Flags():
        best_n, hop_rows = optimal_hop_count(cfg.d, cfg.D, params, None, cfg.N_max, spec)
    rows = []
    for row in hop_rows:
        sim = (None,) * 3
        if cfg.trials > 0:
            plan = HopPlan.equidistant(cfg.d, row.n_hops, row.per_hop_budget)
            cap = estimate_success(plan, params, cfg.sim()).capacity
            sim = (cap.value, cap.lo, cap.hi)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SparseApproximationWarning)
            sparse = sparse_tc_approximation(row.n_hops, cfg.d, cfg.D, params)
        rows.append((row.n_hops, row.bound.capacity, sim[0]))
        table.add(row.n_hops, row.per_hop_budget, row.bound.capacity, *sim, sparse)
    table.summary.append(f"argmax lb_tc: N={best_n}")
    best = _argmax(rows, lambda r: r[2])
    if best is not None:
        table.summary.append(f"argmax sim_tc: N={best[0]}")
    caps = [r[1] for r in rows]
    monotone = all(a >= b for a, b in zip(caps, caps[1:]))
    table.summary.append(f"lb_tc monotonically non-increasing: {'yes' if monotone else 'no'}")
    return table


def cmd_optimize(cfg: RunConfig) -> str:
    params, spec = cfg.network(), cfg.quad()
    dist = cfg.distances()
    with _Flags():
        alloc = allocate_budgets(dist, cfg.D, params, spec=spec)
    lines = [f"# arqtc optimize schema={SCHEMA_VERSION}"]
    lines += [f"# config {line}" for line in cfg.serialize()]
    lines.append("# continuous budgets: " + ", ".join(f"{x:.6f}" for x in alloc.continuous_budgets))
    lines.append("# integer budgets: " + ", ".join(str(x) for x in alloc.integer_budgets))
    lines.append(f"# multiplier gamma: {alloc.multiplier:.12g}")
    lines.append(f"# objective: {alloc.objective:.12g}")
    records = [{"kind": "allocation", "distances": list(dist), "D": cfg.D,
                "continuous_budgets": list(alloc.continuous_budgets),
                "integer_budgets": list(alloc.integer_budgets),
                "multiplier": alloc.multiplier, "objective": alloc.objective,
                "q_hats": list(alloc.q_hats)}]
    if cfg.hop_count:
        with _Flags():
            best, rows = optimal_hop_count(cfg.d, cfg.D, params, None, cfg.N_max, spec)
        lines.append(f"# optimal hop count: {best}")
        for row in rows:
            lines.append(f"# N={row.n_hops} per_hop_budget={row.per_hop_budget} "
                         f"lb_tc={row.bound.capacity:.6g} "
                         f"with_remainder={row.remainder_bound.capacity:.6g}")
            records.append({"kind": "hop_count", "N": row.n_hops,
                            "per_hop_budget": row.per_hop_budget,
                            "lb_tc": row.bound.capacity,
                            "lb_tc_remainder": row.remainder_bound.capacity})
        records.append({"kind": "hop_count_best", "N": best})
    lines += [json.dumps(r, sort_keys=True) for r in records]
    return "\n".join(lines) + "\n"


def _sweep_values(cfg: RunConfig) -> list[int]:
    s = cfg.sweep.strip()
    if s == "point":
        return [sum(cfg.budgets) if cfg.budgets else cfg.D]
    if s == "D":
        return list(range(cfg.D + 1))
    try:
        return list(_ints(s))
    except ValueError:
        raise ConfigError(f"sweep must be 'point', 'D' or a list of budgets, got {s!r}") from None


def cmd_simulate(cfg: RunConfig) -> Table:
    params, spec = cfg.network(), cfg.quad()
    dist = cfg.distances()
    if cfg.trials < 1:
        raise ConfigError("simulate needs trials >= 1")
    table = Table("simulate", cfg, ["D", "budgets", "p_hat", "p_lo", "p_hi", "delay", "delay_lo",
                                    "delay_hi", "tc", "tc_lo", "tc_hi", "analytic_p",
                                    "within_ci"],
                  [f"delay convention: {cfg.delay_convention}; geometry: {cfg.geometry}",
                   "analytic_p: exact success probability (one or two hops only)"])
    verdicts = []
    for D in _sweep_values(cfg):
        if cfg.sweep.strip() == "point" and cfg.budgets:
            if len(cfg.budgets) != len(dist):
                raise ConfigError("budgets and hops must have the same length")
            budgets = cfg.budgets
        else:
            budgets = _split(cfg, D, params, dist)
        plan = HopPlan(dist, budgets)
        est = estimate_success(plan, params, cfg.sim())
        analytic = None
        if plan.n_hops <= 2:
            with _Flags():
                if plan.n_hops == 1:
                    analytic = success_prob_single(budgets[0], dist[0], params, spec).total
                else:
                    analytic = success_prob_two_hop_exact(budgets[0], budgets[1], dist[0],
                                                          dist[1], params, spec)
        within = None if analytic is None else est.p_success.contains(analytic)
        if within is not None:
            verdicts.append(within)
        table.add(D, budgets, est.p_success.value, est.p_success.lo, est.p_success.hi,
                  est.mean_delay.value, est.mean_delay.lo, est.mean_delay.hi,
                  est.capacity.value, est.capacity.lo, est.capacity.hi, analytic, within)
    if verdicts:
        table.summary.append(f"analytic within CI: {'yes' if all(verdicts) else 'no'}")
    return table


def plot_script(table: Table, csv_path: str) -> str:
    """gnuplot commands drawing every numeric column against the first one."""
    rel = os.path.basename(csv_path)
    cols = table.columns
    skip = {"budgets", "unstable", "within_ci"}
    series = [(i + 1, name) for i, name in enumerate(cols) if i > 0 and name not in skip
              and not name.endswith(("_lo", "_hi"))]
    plots = ", \\\n     ".join(f"'{rel}' using 1:{i} with linespoints title '{name}'"
                                for i, name in series)
    return (f"# generated by arqtc {table.command}\n"
            "set datafile separator ','\n"
            "set datafile commentschars '#'\n"
            "set key autotitle columnhead\n"
            f"set xlabel '{cols[0]}'\n"
            "set grid\n"
            f"plot {plots}\n")


COMMANDS = {
    "dr-curve": cmd_dr_curve,
    "tc-vs-d1": cmd_tc_vs_d1,
    "tc-vs-hops": cmd_tc_vs_hops,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arqtc", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key=value configuration file")
    for key in RunConfig.schema():
        parser.add_argument(f"--{key}", dest=f"opt_{key}", metavar="VALUE")
    return parser


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.parse_text(fh.read(), cfg)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    if "SEED" in environ:
        cfg.set("seed", environ["SEED"])
    for key in RunConfig.schema():
        value = getattr(args, f"opt_{key}")
        if value is not None:
            cfg.set(key, value)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        warnings.simplefilter("default")
        result = COMMANDS[args.command](cfg)
        if isinstance(result, Table):
            _emit(result.render(), cfg)
            if cfg.plot and cfg.output != "-":
                with open(os.path.splitext(cfg.output)[0] + ".gp", "w", encoding="utf-8") as fh:
                    fh.write(plot_script(result, cfg.output))
        else:
            _emit(result, cfg)
    except InfeasibleAllocation as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ToleranceError, NumericRangeError, PrecisionLossError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
