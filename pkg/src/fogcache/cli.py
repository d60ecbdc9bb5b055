"""Batch experiments from a JSON config: analytic tables, bounds and simulation sweeps.

Usage::

    fogcache analytic  --config exp.json [--out PREFIX]
    fogcache bounds    --config exp.json [--out PREFIX]
    fogcache simulate  --config exp.json [--seed S] [--threads N] [--out PREFIX]
    fogcache sweep-all --config exp.json ...

Each subcommand writes ``PREFIX_<subcommand>.csv`` and a JSON sidecar
``PREFIX_<subcommand>.meta.json``.  Exit codes: 0 success, 2 config error,
3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bounds, ndt, sim
from .model import (
    FronthaulRequired,
    InvalidParams,
    PolicyFamily,
    PolicyKind,
    SchemeKind,
    SystemParams,
)
from .popularity import GENERATOR_NAME

log = logging.getLogger("fogcache")

SCHEMA_ID = "fogcache.experiment/1"
SWEEP_VARIABLES = ("p", "r", "mu", "alpha")
PARAM_COLUMNS = ["M", "K", "N", "mu", "r", "p", "alpha"]

ANALYTIC_COLUMNS = ["policy", *PARAM_COLUMNS, "ndt", "delta_F", "delta_E", "cached_fraction"]
BOUNDS_COLUMNS = [
    *PARAM_COLUMNS, "offline_lb", "online_slot_lb", "longterm_lb", "offline_ach",
    "reactive_known", "sandwich_lower", "sandwich_upper", "in_stated_regime", "certified",
]
SIMULATE_COLUMNS = [
    "policy", *PARAM_COLUMNS, "ndt_mean", "ndt_ci95", "miss_rate_mean", "delta_F_mean",
    "delta_E_mean", "ndt_serial_mean", "ndt_pipelined_mean", "T", "replications", "warmup", "seed",
]

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimSettings:
    T: int = 20000
    replications: int = 10
    seed: int = 0
    warmup: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    base: SystemParams
    policies: tuple[PolicyKind, ...]
    sweep_variable: str
    sweep_values: tuple[float, ...]
    sim: SimSettings | None = None
    outputs: str = "fogcache"

    def points(self):
        """(index, params) per sweep value, in order."""
        for i, v in enumerate(self.sweep_values):
            yield i, self.base.replace(**{self.sweep_variable: v})

    def to_dict(self) -> dict:
        d = {
            "schema": SCHEMA_ID,
            "base": self.base.to_dict(),
            "policies": [str(p) for p in self.policies],
            "sweep": {"variable": self.sweep_variable, "values": list(self.sweep_values)},
            "outputs": self.outputs,
        }
        if self.sim is not None:
            d["sim"] = {"T": self.sim.T, "replications": self.sim.replications,
                        "seed": self.sim.seed, "warmup": self.sim.warmup}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config: top level must be a JSON object")
        schema = d.get("schema", SCHEMA_ID)
        if schema != SCHEMA_ID:
            raise ConfigError(f"schema: expected {SCHEMA_ID!r}, got {schema!r}")
        unknown = set(d) - {"schema", "base", "policies", "sweep", "sim", "outputs"}
        if unknown:
            raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")

        base_d = _field(d, "base", dict)
        try:
            base = SystemParams(**base_d)
        except TypeError as exc:
            raise ConfigError(f"base: {exc}") from None
        except InvalidParams as exc:
            raise ConfigError(f"base: {exc}") from None

        raw_policies = _field(d, "policies", list)
        if not raw_policies:
            raise ConfigError("policies: at least one policy is required")
        policies = []
        for i, text in enumerate(raw_policies):
            if not isinstance(text, str):
                raise ConfigError(f"policies[{i}]: expected a string, got {text!r}")
            try:
                policies.append(PolicyKind.parse(text))
            except InvalidParams as exc:
                raise ConfigError(f"policies[{i}]: {exc}") from None

        sweep = _field(d, "sweep", dict)
        variable = sweep.get("variable")
        if variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable: expected one of {SWEEP_VARIABLES}, got {variable!r}")
        values = sweep.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values: expected a non-empty list of numbers")
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"sweep.values[{i}]: expected a number, got {v!r}")
            try:
                base.replace(**{variable: v})
            except InvalidParams as exc:
                raise ConfigError(f"sweep.values[{i}]: {exc}") from None

        settings = None
        if d.get("sim") is not None:
            s = _field(d, "sim", dict)
            extra = set(s) - {"T", "replications", "seed", "warmup"}
            if extra:
                raise ConfigError(f"sim: unknown field(s) {sorted(extra)}")
            settings = SimSettings(**s)
            for name in ("T", "replications", "seed"):
                v = getattr(settings, name)
                if not isinstance(v, int) or isinstance(v, bool) or v < (0 if name == "seed" else 1):
                    raise ConfigError(f"sim.{name}: invalid value {v!r}")
            w = settings.warmup
            if w is not None and (not isinstance(w, int) or not 0 <= w < settings.T):
                raise ConfigError(f"sim.warmup: need an integer in [0, T), got {w!r}")

        outputs = d.get("outputs", "fogcache")
        if not isinstance(outputs, str) or not outputs:
            raise ConfigError("outputs: expected a non-empty path prefix")
        return cls(base, tuple(policies), variable, tuple(float(v) for v in values), settings,
                   outputs)


def _field(d: dict, name: str, kind):
    if name not in d:
        raise ConfigError(f"{name}: missing")
    v = d[name]
    if not isinstance(v, kind):
        raise ConfigError(f"{name}: expected {kind.__name__}, got {type(v).__name__}")
    return v


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# row builders


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".9g")
    return str(v)


def _param_cells(params: SystemParams) -> list:
    return [getattr(params, c) for c in PARAM_COLUMNS]


def analytic_row(policy: PolicyKind, params: SystemParams) -> list:
    """One analytic row; NDT cells stay empty where no closed form exists or r = 0 blocks it."""
    fam = policy.family
    frac = None
    try:
        if fam is PolicyFamily.CRAN_ONLY:
            pair = ndt.scheme_ndt(SchemeKind.CRAN_TRANSMISSION, params)
            value, dF, dE = pair.serial_total, pair.delta_F, pair.delta_E
        elif fam is PolicyFamily.REACTIVE_KNOWN:
            pair = ndt.reactive_known_decomposition(params)
            value, dF, dE = pair.serial_total, pair.delta_F, pair.delta_E
        elif fam is PolicyFamily.REACTIVE_ADAPTIVE_KNOWN:
            value, frac = ndt.adaptive_known_longterm(params)
            if frac == 0.0:
                pair = ndt.scheme_ndt(SchemeKind.CRAN_TRANSMISSION, params)
            else:
                pair = ndt.reactive_known_decomposition(params, frac)
            dF, dE = pair.delta_F, pair.delta_E
        elif fam is PolicyFamily.REACTIVE_UNKNOWN:
            value = ndt.reactive_unknown_upper(params)
            dE = ndt.offline_achievable(params, params.mu / params.alpha).delta_E
            dF = value - dE
        elif fam is PolicyFamily.REACTIVE_PIPELINED:
            if policy.known:
                value = sim.reactive_pipelined_known_exact(params)
                plan = sim.plan_policy(params, policy)
                dE = plan.base.delta_E
                dF = plan.base.delta_F + plan.miss_cost * ndt.steady_state_misses(params)
            else:
                value = dF = dE = None
        elif fam is PolicyFamily.PROACTIVE_PIPELINED:
            value = ndt.proactive_pipelined_longterm(params)
            pair = ndt.proactive_decomposition(params)
            dE = pair.delta_E
            dF = pair.delta_F + (ndt.over_r(params.mu, params.r) * params.p if params.p else 0.0)
        else:
            raise ValueError(f"unsupported policy {policy}")
    except FronthaulRequired:
        value = dF = dE = None
    return [str(policy), *_param_cells(params), value, dF, dE, frac]


def bounds_row(params: SystemParams) -> list:
    off_lb = bounds.offline_lower_bound(params)
    on_lb = bounds.online_slot_lower_bound(params)
    lt_lb = bounds.longterm_lower_bound(params)
    try:
        off_ach = ndt.offline_achievable(params).serial_total
        react = ndt.reactive_known_longterm(params)
    except FronthaulRequired:
        off_ach = react = None
    if params.r > 0:
        sw = bounds.sandwich_eval(params)
        lower, upper, regime = sw.lower, sw.upper, sw.in_stated_regime
        certified = react is not None and lower <= react <= upper
    else:
        lower = upper = None
        regime = params.N > params.M >= params.K >= 2
        certified = False
    return [*_param_cells(params), off_lb, on_lb, lt_lb, off_ach, react, lower, upper,
            regime, certified]


def simulate_row(policy: PolicyKind, params: SystemParams, settings: SimSettings,
                 threads: int = 1) -> list:
    config = sim.SimConfig(params, policy, settings.T, settings.replications, settings.seed,
                           settings.warmup)
    res = sim.run_trace(config, threads=threads)
    return [str(policy), *_param_cells(params), res.ndt_mean, res.ndt_ci95_halfwidth,
            res.miss_rate_mean, res.delta_F_mean, res.delta_E_mean, res.ndt_serial_mean,
            res.ndt_pipelined_mean, settings.T, settings.replications, config.warmup,
            settings.seed]


def cmd_analytic(config: ExperimentConfig) -> list[list]:
    return [analytic_row(policy, params)
            for policy in config.policies for _, params in config.points()]


def cmd_bounds(config: ExperimentConfig) -> list[list]:
    return [bounds_row(params) for _, params in config.points()]


def cmd_simulate(config: ExperimentConfig, threads: int = 1) -> list[list]:
    if config.sim is None:
        raise ConfigError("sim: the simulate subcommand needs a 'sim' section")
    rows = []
    for policy in config.policies:
        for _, params in config.points():
            log.info("simulating %s at %s=%s", policy, config.sweep_variable,
                     getattr(params, config.sweep_variable))
            rows.append(simulate_row(policy, params, config.sim, threads))
    return rows


def render_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_outputs(prefix: str, name: str, columns: list[str], rows: list[list],
                  config: ExperimentConfig) -> tuple[Path, Path]:
    csv_path = Path(f"{prefix}_{name}.csv")
    meta_path = Path(f"{prefix}_{name}.meta.json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(render_csv(columns, rows))
    meta = {
        "schema": SCHEMA_ID,
        "subcommand": name,
        "version": __version__,
        "generator": GENERATOR_NAME,
        "columns": columns,
        "config": config.to_dict(),
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path, meta_path


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogcache", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analytic", "bounds", "simulate", "sweep-all"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--out", help="output path prefix (overrides the config)")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        if args.seed is not None:
            if config.sim is None:
                raise ConfigError("--seed given but the config has no 'sim' section")
            config = ExperimentConfig(config.base, config.policies, config.sweep_variable,
                                      config.sweep_values,
                                      SimSettings(config.sim.T, config.sim.replications,
                                                  args.seed, config.sim.warmup),
                                      config.outputs)
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        if args.command in ("simulate", "sweep-all") and config.sim is None:
            raise ConfigError("sim: the simulate subcommand needs a 'sim' section")
    except (ConfigError, InvalidParams, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    prefix = args.out or config.outputs
    jobs = {
        "analytic": (ANALYTIC_COLUMNS, lambda: cmd_analytic(config)),
        "bounds": (BOUNDS_COLUMNS, lambda: cmd_bounds(config)),
        "simulate": (SIMULATE_COLUMNS, lambda: cmd_simulate(config, args.threads)),
    }
    names = list(jobs) if args.command == "sweep-all" else [args.command]
    try:
        for name in names:
            columns, run = jobs[name]
            csv_path, _ = write_outputs(prefix, name, columns, run(), config)
            print(csv_path)
    except Exception as exc:  # noqa: BLE001 - reported through the exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
