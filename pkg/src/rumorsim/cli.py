"""Command-line front end: ``rumorsim <subcommand> CONFIG [options]``.

Exit status is 0 on success, 1 for configuration errors and 2 for
numerical or convergence failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import threshold_report
from .config import ConfigError, RunConfig, parse_config
from .experiments import (
    SWEEPABLE,
    SweepSpec,
    heatmap,
    reproduce_figure,
    reproduce_figure_abm,
    run_sweep,
    unit_grid,
)
from .integrate import NotConvergedError, NumericalInstabilityError, integrate, trajectory_to_csv
from .model import ParameterError, StateError, StateVector
from .network import (
    ConfigurationError,
    GraphConstructionError,
    abm_to_csv,
    ensemble,
    ensemble_to_csv,
    generate_regular,
    run,
)

log = logging.getLogger("rumorsim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _header(cfg: RunConfig) -> str:
    lines = [f"# rumorsim {__version__}"]
    lines += [f"# {k} = {v}" for k, v in cfg.resolved().items()]
    return "\n".join(lines) + "\n"


def _write(cfg: RunConfig, name: str, body: str) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(_header(cfg) + body)
    log.info("wrote %s", path)
    return path


def cmd_integrate(cfg: RunConfig, args) -> int:
    p = cfg.params
    traj = integrate(p, StateVector.two_seed(p.n), cfg.integration)
    _write(cfg, "trajectory.csv", trajectory_to_csv(traj, [f"terminated_by = {traj.terminated_by}"]))
    if not traj.converged:
        print(
            f"error: no steady state by t_max={cfg.integration.t_max:g} "
            f"(s1+s2+h = {traj.final.active:.3g} > {cfg.integration.active_tol:g})",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_analyze(cfg: RunConfig, args) -> int:
    report = threshold_report(cfg.params, n=args.n)
    sys.stdout.write(report.as_text())
    _write(cfg, "analysis.csv", report.csv_header() + "\n" + report.csv_row() + "\n")
    return EXIT_OK


def _network_degree(cfg: RunConfig) -> int:
    k = cfg.params.k_avg
    if k != int(k):
        raise ConfigError(f"k_avg = {k} must be an integer for the k-regular network")
    return int(k)


def cmd_abm(cfg: RunConfig, args) -> int:
    p, k = cfg.params, _network_degree(cfg)
    if cfg.runs == 1:
        net = generate_regular(p.n, k, cfg.abm.seed)
        res = run(net, p, cfg.abm)
        _write(cfg, "abm.csv", abm_to_csv(res))
    else:
        ens = ensemble(p, p.n, k, cfg.abm, cfg.runs, workers=args.workers)
        _write(cfg, "ensemble.csv", ensemble_to_csv(ens))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    try:
        values = tuple(float(v) for v in args.values.split(","))
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers (got {args.values!r})") from None
    spec = SweepSpec(cfg.params, args.param, values, opts=cfg.integration)
    result = run_sweep(spec)
    _write(cfg, f"sweep_{args.param}.csv", result.to_csv())
    horizon = [r.value for r in result.rows if not r.converged]
    if horizon:
        print(f"warning: {len(horizon)} cell(s) hit the horizon: {horizon}", file=sys.stderr)
    return EXIT_OK


def cmd_heatmap(cfg: RunConfig, args) -> int:
    if args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    grid = unit_grid(args.grid)
    opts = cfg.integration
    hm_opts = type(opts)(opts.step, max(opts.t_max, 2000.0), 1000, opts.active_tol)
    hm = heatmap(grid, grid, cfg.params, hm_opts)
    _write(cfg, "heatmap.csv", hm.to_csv())
    return EXIT_OK


def cmd_figure(cfg: RunConfig, args) -> int:
    if args.abm:
        files = reproduce_figure_abm(
            args.id, cfg.params, n=cfg.params.n, n_runs=cfg.runs, abm_opts=cfg.abm
        )
    else:
        files = reproduce_figure(args.id, cfg.params, cfg.integration)
    for name, text in files.items():
        _write(cfg, name, text)
    return EXIT_OK


COMMANDS = {
    "integrate": cmd_integrate,
    "analyze": cmd_analyze,
    "abm": cmd_abm,
    "sweep": cmd_sweep,
    "heatmap": cmd_heatmap,
    "figure": cmd_figure,
}


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; 2 is reserved for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rumorsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rumorsim {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress the per-stage log")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, before=None):
        sp = sub.add_parser(name, help=help_)
        if before:
            before(sp)
        sp.add_argument("config", help="key = value configuration file")
        sp.add_argument("--out-dir", help="override out_dir from the config")
        return sp

    add("integrate", "integrate the mean-field equations")
    sp = add("analyze", "thresholds and final-size law")
    sp.add_argument("--n", type=int, default=None, help="use the finite-N spreading condition")
    sp = add("abm", "agent-based run (runs > 1 gives an ensemble)")
    sp.add_argument("--workers", type=int, default=1)
    sp = add("sweep", "sweep one parameter")
    sp.add_argument("--param", required=True, choices=SWEEPABLE)
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp = add("heatmap", "final size over the (lambda1, lambda2) unit square")
    sp.add_argument("--grid", type=int, default=21, help="points per axis")
    sp = add("figure", "CSV data for one figure", before=lambda p: p.add_argument(
        "id", type=int, choices=range(2, 13), metavar="ID", help="figure number, 2..12"))
    sp.add_argument("--abm", action="store_true", help="use the agent-based ensemble")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
        if args.out_dir:
            cfg = RunConfig(cfg.params, cfg.integration, cfg.abm, cfg.runs, args.out_dir)
        log.info("%s: config %s", args.command, args.config)
        return COMMANDS[args.command](cfg, args)
    except (OSError, ConfigError, ParameterError, ConfigurationError, GraphConstructionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalInstabilityError, NotConvergedError, StateError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
