"""Command-line front end.

Every subcommand takes ``--config``, ``--out``, ``--seed`` and ``--format``
and writes its outputs plus a ``manifest.json`` into the output directory.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .channels import apply_local, partial_polarizer
from .config import ConfigError, ExperimentConfig, config_from_dict, config_to_dict, derive_seed, parse_config
from .metrics import metrics_report
from .pipelines import (
    SAMPLE_TVS,
    TOMO_DISTILLED,
    TOMO_INITIAL,
    initial_state,
    run_distill,
    run_qpt_characterization,
    run_sweep_epsilon,
    run_sweep_tv,
    run_table1,
)
from .serialize import dumps_json, emit, read_counts
from .tomography import PAIR_SETTINGS, reconstruct, simulate_counts

COMMANDS = ("simulate", "qst", "qpt", "distill", "sweep-tv", "sweep-eps", "table1")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_simulate(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    rho0 = initial_state(cfg)
    counts = simulate_counts(rho0, PAIR_SETTINGS, cfg.acquisition_scale, cfg.noise, derive_seed(cfg.seed, TOMO_INITIAL))
    paths = [
        emit(rho0, out / f"rho_initial.{fmt}", fmt, basis="two_qubit"),
        emit(counts, out / f"counts_initial.{fmt}", fmt),
    ]
    if cfg.t_v is not None:
        rho1, p = apply_local(partial_polarizer(cfg.t_v, cfg.t_h), rho0)
        counts1 = simulate_counts(
            rho1, PAIR_SETTINGS, cfg.acquisition_scale * p, cfg.noise, derive_seed(cfg.seed, TOMO_DISTILLED)
        )
        paths += [
            emit(rho1, out / f"rho_distilled.{fmt}", fmt, basis="two_qubit"),
            emit(counts1, out / f"counts_distilled.{fmt}", fmt),
        ]
    return paths


def cmd_qst(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    counts = read_counts(cfg.counts_file)
    res = reconstruct(counts, cfg.method)
    summary = {"method": res.method, "clipped_mass": res.clipped_mass, "iterations": res.iterations}
    if res.log_likelihood is not None:
        summary["log_likelihood"] = res.log_likelihood
    summary["metrics"] = metrics_report(res.rho, cfg.family).as_dict() if res.rho.shape == (4, 4) else {}
    basis = "two_qubit" if res.rho.shape == (4, 4) else "one_qubit"
    return [
        emit(res.rho, out / f"rho.{fmt}", fmt, basis=basis),
        emit(summary, out / f"qst.{fmt}", fmt),
    ]


def cmd_qpt(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    res = run_qpt_characterization(cfg)
    return [
        emit(res.chi, out / f"chi.{fmt}", fmt, basis="pauli"),
        emit(res.chi_raw, out / f"chi_raw.{fmt}", fmt, basis="pauli"),
        emit(res, out / f"qpt.{fmt}", fmt),
    ]


def cmd_distill(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    rep = run_distill(cfg)
    return [
        emit(rep, out / f"distill.{fmt}", fmt),
        emit(rep.initial.rho, out / f"rho_initial.{fmt}", fmt, basis="two_qubit"),
        emit(rep.distilled.rho, out / f"rho_distilled.{fmt}", fmt, basis="two_qubit"),
    ]


def cmd_sweep_tv(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    rows = run_sweep_tv(cfg, cfg.tv_list or SAMPLE_TVS)
    return [emit(rows, out / f"sweep_tv.{fmt}", fmt)]


def cmd_sweep_eps(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    rows = run_sweep_epsilon(cfg, cfg.eps_list, cfg.family)
    return [emit(rows, out / f"sweep_eps.{fmt}", fmt)]


def cmd_table1(cfg: ExperimentConfig, out: Path, fmt: str) -> list[Path]:
    rows = run_table1(cfg)
    return [emit(rows, out / f"table1.{fmt}", fmt)]


HANDLERS = {
    "simulate": cmd_simulate,
    "qst": cmd_qst,
    "qpt": cmd_qpt,
    "distill": cmd_distill,
    "sweep-tv": cmd_sweep_tv,
    "sweep-eps": cmd_sweep_eps,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entdistill", description="Entanglement distillation simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, help="top-level seed (overrides the config)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = _now()
    if args.config is not None:
        cfg = parse_config(args.config, args.command)
    else:
        cfg = config_from_dict({}, args.command)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed: must be >= 0")
        cfg = cfg.with_(seed=args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    paths = HANDLERS[args.command](cfg, out, args.format)
    manifest = {
        "tool": "entdistill",
        "version": __version__,
        "command": args.command,
        "config": config_to_dict(cfg),
        "seeds": {"seed": cfg.seed, "mc_seed": cfg.mc_seed},
        "started_utc": started,
        "finished_utc": _now(),
        "outputs": [p.name for p in paths],
    }
    (out / "manifest.json").write_text(dumps_json(manifest), encoding="utf-8")
    for p in paths:
        print(p)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except (ConfigError, ValueError, RuntimeError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
