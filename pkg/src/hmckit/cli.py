"""Command-line front end: sample | check | bench | scaling | trajectory.

All experiment inputs come from a flat key=value config file plus the --seed
and --output-dir flags.  Outputs are CSV files written atomically, so repeated
runs with the same seed produce byte-identical artifacts and interrupted runs
leave nothing partial behind.

Exit codes: 0 success, 1 configuration or I/O error, 2 numeric failure
(including failed self-checks).
"""

from __future__ import annotations

import argparse
import os
import sys as _sys

import numpy as np

from . import chainio
from .checks import run_check_suite
from .config import (
    RunConfig,
    build_integrator_spec,
    build_kernel,
    build_system,
    build_target,
    default_init,
    parse_config,
)
from .diagnostics import (
    BenchEntry,
    autocorrelation_series,
    coordinate,
    coordinate_squared,
    kernel_comparison,
)
from .dynamics import HamiltonianSystem, IntegratorSpec, PhasePoint, Trajectory, integrate
from .errors import ConfigError, DegenerateChainError, DivergenceError, NumericError
from .fibers import IdentityMetric, KineticEnergy
from .kernels import FixedTime, HMCConfig, langevin_path, run_chain
from .targets import iid_gaussian


def _load_config(path: str) -> RunConfig:
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def cmd_sample(cfg: RunConfig, outdir: str) -> int:
    system = build_system(cfg)
    kernel = build_kernel(cfg, system.dim)
    model = system if isinstance(kernel, HMCConfig) else system.target
    q0 = default_init(system.target, cfg)

    n_chains = cfg["chains"]
    streams = np.random.SeedSequence(cfg["seed"]).spawn(n_chains)
    paths = []
    for c in range(n_chains):
        chain = run_chain(kernel, model, q0, cfg["iterations"], seed=streams[c])
        path = os.path.join(outdir, f"chain_{c:02d}.csv")
        chainio.write_chain_csv(path, chain, c)
        paths.append(path)
        print(f"wrote {path}")

    # Summary statistics are recomputed from the files on disk so that the CSV
    # artifacts stay the single source of truth.
    rows = []
    for path in paths:
        index, states, accepted, divergent, _ = chainio.read_chain_csv(path)
        accept_rate = float(np.mean(accepted))
        divergences = int(np.sum(divergent))
        for i in range(states.shape[1]):
            try:
                ac = autocorrelation_series(states[:, i])
                rho1, ess = ac.rho1, ac.ess
            except (DegenerateChainError, ValueError):
                rho1, ess = float("nan"), float("nan")
            rows.append({
                "chain": index, "coord": f"q{i + 1}",
                "accept_rate": accept_rate, "divergences": divergences,
                "rho1": rho1, "ess": ess,
            })
    summary_path = os.path.join(outdir, "summary.csv")
    chainio.atomic_write_text(summary_path, chainio.summary_csv_text(rows))
    print(f"wrote {summary_path}")
    return 0


def cmd_check(cfg: RunConfig, outdir: str) -> int:
    results = run_check_suite(cfg)
    for result in results:
        print(result.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if not failed else 2


def cmd_scaling(cfg: RunConfig, outdir: str) -> int:
    if cfg["target"] != "iid_gaussian":
        raise ConfigError("scaling runs require target = iid_gaussian")
    t_total = cfg["hmc.t_fixed"] if cfg["hmc.t_fixed"] is not None else 1.0
    transitions = cfg["scaling.transitions"]
    rows = []
    for dim in cfg["scaling.dims"]:
        target = iid_gaussian(dim)
        system = HamiltonianSystem(target, KineticEnergy(IdentityMetric(dim)))
        for scheme_name, scheme in (("leapfrog", "leapfrog"), ("euler", "euler")):
            spec = IntegratorSpec(scheme, cfg["step_size"], 1)
            kernel = HMCConfig(spec, FixedTime(t_total))
            rng = np.random.default_rng(cfg["seed"] + dim)
            q0 = rng.standard_normal(dim)  # exact draw keeps the run at stationarity
            chain = run_chain(kernel, system, q0, transitions,
                              seed=cfg["seed"] + 1000 + dim)
            rows.append({
                "dim": dim, "integrator": scheme_name,
                "accept_rate": chain.accept_rate(),
            })
            print(f"dim={dim} integrator={scheme_name} "
                  f"accept_rate={rows[-1]['accept_rate']:.4f}")
    path = os.path.join(outdir, "scaling.csv")
    chainio.atomic_write_text(path, chainio.scaling_csv_text(rows))
    print(f"wrote {path}")
    return 0


def _bench_function(name: str):
    """Parse a bench.f entry (q<i> or q<i>sq) into (TestFunction, index)."""
    name = name.strip()
    squared = name.endswith("sq")
    core = name[:-2] if squared else name
    if not core.startswith("q") or not core[1:].isdigit() or int(core[1:]) < 1:
        raise ConfigError(f"bench.f entry '{name}' is not of the form q<i> or q<i>sq")
    index = int(core[1:]) - 1
    return (coordinate_squared(index) if squared else coordinate(index)), index


def _bench_cost(cfg: RunConfig, name: str) -> int:
    """Gradient/density evaluations consumed per transition, for budgeting."""
    if name == "hmc":
        eps = cfg["step_size"]
        if cfg["hmc.t_fixed"] is not None:
            mean_t = cfg["hmc.t_fixed"]
        else:
            mean_t = 0.5 * cfg["hmc.t_max"]
        return max(1, int(round(mean_t / eps)))
    if name == "mala":
        return 2
    return 1


def cmd_bench(cfg: RunConfig, outdir: str) -> int:
    system = build_system(cfg)
    q0 = default_init(system.target, cfg)
    parsed = [_bench_function(name) for name in cfg["bench.f"]]
    for f, index in parsed:
        if index >= system.dim:
            raise ConfigError(f"bench.f '{f.label}' exceeds target dim {system.dim}")
    fs = [f for f, _ in parsed]

    budget = cfg["bench.budget"]
    names = cfg["bench.kernels"]
    entries = []
    for k, name in enumerate(names):
        values = dict(cfg.values)
        values["kernel"] = name
        kernel = build_kernel(RunConfig(values, cfg.provided), system.dim)
        model = system if isinstance(kernel, HMCConfig) else system.target
        entries.append(BenchEntry(
            label=name, cfg=kernel, model=model, q0=q0,
            transitions=max(10, budget // _bench_cost(cfg, name)),
            seed=cfg["seed"] + k,
        ))
    rows = kernel_comparison(entries, fs)
    header = f"{'kernel':<8} {'f':<6} {'rho1':>8} {'ess':>10} {'accept':>8} {'div':>5}"
    print(header)
    for row in rows:
        print(f"{row.kernel:<8} {row.f:<6} {row.rho1:>8.4f} {row.ess:>10.1f} "
              f"{row.accept_rate:>8.4f} {row.divergences:>5d}")
    path = os.path.join(outdir, "bench.csv")
    chainio.atomic_write_text(path, chainio.bench_csv_text(rows))
    print(f"wrote {path}")
    return 0


def cmd_trajectory(cfg: RunConfig, outdir: str) -> int:
    target = build_target(cfg)
    q0 = default_init(target, cfg)
    rng = np.random.default_rng(cfg["seed"])
    if cfg["trajectory.kind"] == "langevin":
        path_points, divergent = langevin_path(target, q0, cfg["ula.eps"],
                                               cfg["steps"], rng)
        # Langevin paths have no momentum; the CSV keeps the trajectory schema
        # with p = 0 and h = V(q).
        energies = target.potential_batch(path_points)
        traj = Trajectory(path_points, np.zeros_like(path_points), energies, divergent)
    else:
        system = build_system(cfg)
        p0 = system.kinetic.sample(q0, rng)
        spec = build_integrator_spec(cfg, steps=cfg["steps"])
        traj = integrate(system, PhasePoint(q0, p0), spec)
    if traj.divergent:
        print("warning: trajectory flagged divergent", file=_sys.stderr)
    path = os.path.join(outdir, "trajectory.csv")
    chainio.write_trajectory_csv(path, traj)
    print(f"wrote {path}")
    return 0


COMMANDS = {
    "sample": cmd_sample,
    "check": cmd_check,
    "bench": cmd_bench,
    "scaling": cmd_scaling,
    "trajectory": cmd_trajectory,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmckit",
        description="Configuration-driven sampling experiments with CSV outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("config", help="path to a key=value config file")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the seed key from the config")
        cmd.add_argument("--output-dir", default=".",
                         help="directory for CSV artifacts (default: current)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg.values["seed"] = args.seed
            cfg.provided.add("seed")
        print(cfg.banner())
        os.makedirs(args.output_dir, exist_ok=True)
        return COMMANDS[args.command](cfg, args.output_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=_sys.stderr)
        return 1
    except (NumericError, DivergenceError) as exc:
        print(f"numeric failure: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
