"""Command-line front end.

Subcommands:
    run         execute one run from a config file and/or --set overrides
    sweep-dogd  run a grid of dogd learning rates with identical seeds
    compare     run several configs and emit an aligned summary
    preset      run one of the packaged experiment studies

Config files are flat "key = value" text ('#' starts a comment). Flags
override file values. Keys prefixed "meta." are ignored on input, so the
meta document written next to each run's metrics.csv can be fed back as a
config to reproduce the run byte-for-byte.

Outputs per run: <outdir>/metrics.csv and <outdir>/meta. The output root
defaults to $GOSSIPBET_OUT, then ./runs.

Exit codes: 0 success, 1 config error, 2 runtime invariant violation,
3 I/O error.

Examples:
    gossipbet run --set learner=coin-func --set horizon=500 --out runs/demo
    gossipbet run --config runs/demo/meta --out runs/demo-again
    gossipbet sweep-dogd --grid 1e-3,1e-1,10,1e3 --set horizon=1000
    gossipbet compare runs/a/meta runs/b/meta --out runs/cmp
    gossipbet preset gossip-tradeoff --quick --out runs/tradeoff
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .learners import InvariantViolation
from .potentials import make_potential
from .simulator import (
    ConfigError,
    RunResult,
    SimConfig,
    comparator_loss,
    local_regret,
    network_regret,
    run,
)

CSV_HEADER = (
    "t,network_loss,cum_network_loss,avg_local_loss,cum_local_loss,"
    "disagreement_inc,cum_disagreement,min_wealth,max_pairwise_dist"
)

SUMMARY_HEADER = (
    "name,learner,potential,topology,er_p,schedule,seed,rho,horizon,"
    "final_cum_network_loss,final_cum_local_loss,final_disagreement,"
    "network_regret,local_regret"
)

SENSITIVITY_GRID = [10.0**k for k in range(-3, 4)]
REAL_DATA_GRID = [10.0**k for k in range(-3, 8)]
PRESET_SEEDS = 5


def _fmt(x: float) -> str:
    """Full-precision decimal so determinism checks can compare bytes."""
    return f"{x:.17g}"


def parse_config_file(path) -> dict:
    mapping = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key = key.strip()
            if key.startswith("meta."):
                continue
            mapping[key] = value.strip()
    return mapping


def build_config(args) -> SimConfig:
    mapping = parse_config_file(args.config) if args.config else {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        mapping[key.strip()] = value.strip()
    return SimConfig.from_mapping(mapping)


def write_metrics_csv(path: Path, result: RunResult) -> None:
    lines = [CSV_HEADER]
    for i in range(len(result.t)):
        mw = "" if math.isnan(result.min_wealth[i]) else _fmt(result.min_wealth[i])
        lines.append(
            ",".join(
                [
                    str(int(result.t[i])),
                    _fmt(result.network_loss[i]),
                    _fmt(result.cum_network_loss[i]),
                    _fmt(result.avg_local_loss[i]),
                    _fmt(result.cum_local_loss[i]),
                    _fmt(result.disagreement_inc[i]),
                    _fmt(result.cum_disagreement[i]),
                    mw,
                    _fmt(result.max_pairwise_dist[i]),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def write_meta(path: Path, result: RunResult) -> None:
    """Config echo plus derived run facts; valid as a config file itself."""
    cfg = result.config
    lines = ["# run configuration (feed this file back to `run` to reproduce)"]
    for key, value in cfg.to_mapping().items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    lines.append("# derived")
    lines.append(f"meta.version = {__version__}")
    lines.append(f"meta.rho = {_fmt(result.rho)}")
    lines.append(f"meta.mixing = {'none (W=I)' if result.rho >= 1.0 else 'geometric'}")
    lines.append(f"meta.graph_edges = {result.n_edges}")
    for role, value in result.seeds.items():
        lines.append(f"meta.seed_{role} = {value}")
    lines.append(f"meta.total_gossip_steps = {result.total_gossip_steps}")
    if result.sufficient_c is not None:
        lines.append(f"meta.sufficient_linear_c = {_fmt(result.sufficient_c)}")
    lines.append(f"meta.final_cum_network_loss = {_fmt(result.final_cum_network_loss)}")
    lines.append(f"meta.final_cum_local_loss = {_fmt(result.final_cum_local_loss)}")
    lines.append(f"meta.final_disagreement = {_fmt(result.final_disagreement)}")
    u = result.resolve_comparator()
    if u is not None:
        lines.append(f"meta.comparator_norm = {_fmt(float(np.linalg.norm(u)))}")
        lines.append(f"meta.network_regret = {_fmt(network_regret(result, u))}")
        lines.append(f"meta.local_regret = {_fmt(local_regret(result, u))}")
        lines.append(f"meta.comparator_loss = {_fmt(comparator_loss(result, u))}")
        pot = make_potential(cfg.potential, cfg.epsilon)
        lines.append(
            f"meta.local_regret_bound = {_fmt(pot.regret_bound(cfg.horizon, float(np.linalg.norm(u))))}"
        )
    lines.append("# policy notes")
    lines.append("meta.note.er_policy = ER graphs resampled until connected (max 100 draws)")
    lines.append("meta.note.dogd_gossip = dogd gossips decision vectors with q(t) rounds")
    lines.append("meta.note.features = features l2-normalized at ingestion; labels unscaled")
    lines.append("meta.note.dealing = dataset rows shuffled once, dealt round-robin, cycled")
    path.write_text("\n".join(lines) + "\n")


def _out_root(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("GOSSIPBET_OUT", "runs"))


def run_and_write(cfg: SimConfig, outdir: Path) -> RunResult:
    result = run(cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(outdir / "metrics.csv", result)
    write_meta(outdir / "meta", result)
    return result


def _summary_row(name: str, result: RunResult) -> str:
    cfg = result.config
    u = result.resolve_comparator()
    net_r = _fmt(network_regret(result, u)) if u is not None else ""
    loc_r = _fmt(local_regret(result, u)) if u is not None else ""
    return ",".join(
        [
            name,
            cfg.learner,
            cfg.potential,
            cfg.topology,
            repr(cfg.er_p),
            cfg.schedule,
            str(cfg.seed),
            _fmt(result.rho),
            str(cfg.horizon),
            _fmt(result.final_cum_network_loss),
            _fmt(result.final_cum_local_loss),
            _fmt(result.final_disagreement),
            net_r,
            loc_r,
        ]
    )


def cmd_run(args) -> int:
    cfg = build_config(args)
    outdir = _out_root(args)
    result = run_and_write(cfg, outdir)
    print(f"wrote {outdir}/metrics.csv ({cfg.horizon} rounds, rho={result.rho:.6g})")
    return 0


def cmd_sweep_dogd(args) -> int:
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--grid expects comma-separated numbers, got {args.grid!r}") from None
    if not grid:
        raise ConfigError("--grid must name at least one learning rate")
    base = build_config(args).with_overrides(learner="dogd")
    root = _out_root(args)
    rows = []
    for eta0 in grid:
        cfg = base.with_overrides(eta0=eta0)
        result = run_and_write(cfg, root / f"eta0_{eta0:g}")
        rows.append((eta0, result.final_cum_network_loss))
        print(f"eta0={eta0:g}: final cumulative network loss {rows[-1][1]:.6g}")
    root.mkdir(parents=True, exist_ok=True)
    lines = ["eta0,final_cum_network_loss"]
    lines += [f"{e!r},{_fmt(v)}" for e, v in rows]
    (root / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {root}/summary.csv")
    return 0


def cmd_compare(args) -> int:
    if len(args.configs) < 2:
        raise ConfigError("compare needs at least two config files")
    configs = [SimConfig.from_mapping(parse_config_file(p)) for p in args.configs]
    horizons = {c.horizon for c in configs}
    if len(horizons) > 1:
        raise ConfigError(f"compared runs must share one horizon, got {sorted(horizons)}")
    root = _out_root(args)
    names = []
    for path in args.configs:
        base = Path(path).parent.name or Path(path).stem
        name = base
        k = 2
        while name in names:  # duplicate config paths get unique run dirs
            name = f"{base}-{k}"
            k += 1
        names.append(name)
    lines = [SUMMARY_HEADER]
    for name, cfg in zip(names, configs):
        result = run_and_write(cfg, root / name)
        lines.append(_summary_row(name, result))
    root.mkdir(parents=True, exist_ok=True)
    (root / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {root}/summary.csv ({len(configs)} runs)")
    return 0


def _preset_runs(args) -> list[tuple[str, SimConfig]]:
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if args.quick:
        overrides.setdefault("horizon", "300")
        if args.name != "connectivity":
            # the connectivity study's edge probabilities assume 20 agents;
            # ER(10, 0.1) is essentially never connected within the retry budget
            overrides.setdefault("n_agents", "10")

    def cfg(**kw):
        mapping = {k: str(v) for k, v in kw.items()}
        mapping.update(overrides)
        return SimConfig.from_mapping(mapping)

    name = args.name
    runs: list[tuple[str, SimConfig]] = []
    if name == "sensitivity":
        for learner in ("coin-wealth", "coin-func"):
            for pot in ("exp", "kt"):
                runs.append((f"{learner}_{pot}", cfg(learner=learner, potential=pot)))
        runs.append(("oracle_kt", cfg(learner="oracle", potential="kt", topology="complete")))
        for eta0 in SENSITIVITY_GRID:
            runs.append((f"dogd_eta0_{eta0:g}", cfg(learner="dogd", eta0=eta0)))
    elif name == "connectivity":
        for p in (0.1, 0.3, 1.0):
            for seed in range(PRESET_SEEDS):
                runs.append(
                    (f"er{p:g}_seed{seed}", cfg(topology="er", er_p=p, seed=seed))
                )
        for seed in range(PRESET_SEEDS):
            runs.append(
                (f"oracle_seed{seed}", cfg(learner="oracle", topology="complete", seed=seed))
            )
    elif name == "gossip-tradeoff":
        for sched in ("constant:1", "log", "linear:0.1"):
            tag = sched.replace(":", "")
            for seed in range(PRESET_SEEDS):
                runs.append((f"{tag}_seed{seed}", cfg(schedule=sched, seed=seed)))
        for seed in range(PRESET_SEEDS):
            runs.append(
                (f"oracle_seed{seed}", cfg(learner="oracle", topology="complete", seed=seed))
            )
    elif name == "real-data":
        if not args.dataset:
            raise ConfigError("preset real-data needs at least one --dataset FILE")
        for ds in args.dataset:
            tag = Path(ds).stem
            for learner in ("coin-wealth", "coin-func"):
                for pot in ("exp", "kt"):
                    runs.append(
                        (f"{tag}_{learner}_{pot}", cfg(learner=learner, potential=pot, data=ds))
                    )
            runs.append((f"{tag}_oracle", cfg(learner="oracle", topology="complete", data=ds)))
            for eta0 in REAL_DATA_GRID:
                runs.append((f"{tag}_dogd_eta0_{eta0:g}", cfg(learner="dogd", eta0=eta0, data=ds)))
    else:
        raise ConfigError(f"unknown preset {name!r}")
    return runs


def cmd_preset(args) -> int:
    runs = _preset_runs(args)
    root = _out_root(args) / args.name
    lines = [SUMMARY_HEADER]
    for run_name, cfg in runs:
        result = run_and_write(cfg, root / run_name)
        lines.append(_summary_row(run_name, result))
        print(f"{run_name}: loss {result.final_cum_network_loss:.6g}")
    root.mkdir(parents=True, exist_ok=True)
    (root / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {root}/summary.csv ({len(runs)} runs)")
    return 0


def _add_config_args(p) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--out", help="output directory (default $GOSSIPBET_OUT or ./runs)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossipbet", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"gossipbet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one run")
    _add_config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-dogd", help="dogd learning-rate sweep with shared seeds")
    _add_config_args(p)
    p.add_argument("--grid", required=True, help="comma-separated eta0 values")
    p.set_defaults(func=cmd_sweep_dogd)

    p = sub.add_parser("compare", help="run several configs and summarize")
    p.add_argument("configs", nargs="+", help="config files to run")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("preset", help="run a packaged experiment study")
    p.add_argument(
        "name", choices=["sensitivity", "connectivity", "gossip-tradeoff", "real-data"]
    )
    _add_config_args(p)
    p.add_argument("--quick", action="store_true", help="CI profile: horizon=300, n_agents=10")
    p.add_argument("--dataset", action="append", help="LIBSVM file (real-data preset)")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
