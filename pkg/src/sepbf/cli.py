"""Command-line front end.

Exit codes: 0 success, 2 infeasible, 3 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .config import ConfigError, ExperimentConfig, load_config, loads_config
from .expected import PRESETS, check_rows, load_expected, preset_path
from .simulate import METHODS, SweepRow, evaluate, sweep_snr

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 2, 3

COLUMNS = (
    "method", "preset", "snr_db", "case", "lambda1", "lambda2", "sep_bob_analytic",
    "sep_eve_analytic", "ser_bob_mc", "ser_eve_mc", "ci_lo", "ci_hi", "secrecy_rate",
    "feasible", "seed",
)
DEFAULT_MC_TRIALS = 1_000_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "" if math.isnan(value) else "%.10e" % value
    return str(value)


def format_csv(rows: Sequence[SweepRow], seed: int, command: str) -> str:
    buf = io.StringIO()
    buf.write(f"# sepbf {command} seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "-"
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def summary(rows: Sequence[SweepRow]) -> str:
    head = f"{'method':<10}{'snr_db':>8}  {'case':<11}{'lambda1':>12}{'lambda2':>12}" \
           f"{'bob_sep':>14}{'eve_sep':>14}{'bob_mc':>12}{'eve_mc':>12}"
    lines = [head]
    for r in rows:
        line = (f"{r.method:<10}{_fmt(r.snr_db):>8}  {r.case:<11}{_fmt(r.lambda1):>12}"
                f"{_fmt(r.lambda2):>12}{_fmt(r.sep_bob_analytic):>14}{_fmt(r.sep_eve_analytic):>14}"
                f"{_fmt(r.ser_bob_mc):>12}{_fmt(r.ser_eve_mc):>12}")
        if r.note:
            line += f"  ({r.note})"
        lines.append(line)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sepbf", description="SEP-based beamforming for MIMO wiretap channels")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, with_config=True):
        if with_config:
            sp.add_argument("config", help="TOML experiment configuration")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--out", help="write CSV here")
        sp.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
        sp.add_argument("--threads", type=int, help="worker threads")
        sp.add_argument("--snr-db", type=float, nargs="+", dest="snr_db",
                        help="operating point(s) in dB; P = SNR * N_B")

    for name in ("antipodal", "mary", "sinr-bf"):
        common(sub.add_parser(name, help=f"solve the {name} design at one operating point"))
    sdr = sub.add_parser("sdr", help="SDR design with Bob SEP cap D")
    common(sdr)
    sdr.add_argument("--d", type=float, required=True, help="Bob SEP cap D in (0, 0.5]")
    sdr.add_argument("--draws", type=int, help="randomization draws")

    sim = sub.add_parser("simulate", help="solve, then estimate SER by Monte Carlo")
    common(sim)
    sim.add_argument("--method", choices=[m.replace("_", "-") for m in METHODS])
    sim.add_argument("--d", type=float, help="Bob SEP cap for --method sdr")

    sw = sub.add_parser("sweep", help="SNR sweep of one method")
    common(sw)
    sw.add_argument("--method", choices=[m.replace("_", "-") for m in METHODS])
    sw.add_argument("--d", type=float, help="Bob SEP cap for --method sdr")

    rep = sub.add_parser("reproduce", help="run a shipped preset and check its expected output")
    rep.add_argument("preset", choices=PRESETS)
    common(rep, with_config=False)
    return p


def _method(name: Optional[str], cfg: ExperimentConfig) -> str:
    return cfg.method if name is None else name.replace("-", "_")


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "d", None) is not None:
        if not 0.0 < args.d <= 0.5:
            raise ConfigError("--d", "Bob SEP cap must lie in (0, 0.5]")
        cfg = replace(cfg, sdr_d=args.d)
    if getattr(args, "draws", None) is not None:
        if args.draws < 1:
            raise ConfigError("--draws", "must be at least 1")
        cfg = replace(cfg, sdr_draws=args.draws)
    if args.trials is not None and args.trials < 0:
        raise ConfigError("--trials", "must be nonnegative")
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads", "must be at least 1")
    return cfg


def _run_rows(method: str, cfg: ExperimentConfig, args, grid, trials) -> list[SweepRow]:
    scfg = cfg.sweep_config(seed=args.seed, trials=trials, threads=args.threads)
    if method == "sdr" and scfg.sdr_d is None:
        raise ConfigError("sdr.d", "the SDR design needs a Bob SEP cap (--d or sdr.d)")
    if method == "mary" and scfg.constellation is None:
        raise ConfigError("mary.constellation", "the M-ary design needs a constellation")
    if grid:
        return sweep_snr(method, grid, scfg)
    return evaluate(method, scfg, None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"sepbf: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "reproduce":
            text = preset_path(args.preset).read_text(encoding="utf-8")
            cfg = loads_config(text)
        else:
            cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)

        cmd = args.command
        grid = list(args.snr_db) if args.snr_db else []
        trials = args.trials
        if cmd in ("antipodal", "mary", "sinr-bf", "sdr"):
            method = cmd.replace("-", "_")
        else:
            method = _method(getattr(args, "method", None), cfg)
        if cmd in ("sweep", "reproduce") and not grid:
            grid = list(cfg.snr_db)
            if cmd == "sweep" and not grid:
                raise ConfigError("sim.snr_db", "a sweep needs an SNR grid (sim.snr_db or --snr-db)")
        if cmd == "simulate" and trials is None:
            trials = cfg.trials or DEFAULT_MC_TRIALS

        rows = _run_rows(method, cfg, args, grid, trials)
    except ConfigError as exc:
        print(f"sepbf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # a solver rejected its input (for example a degenerate pencil)
        print(f"sepbf: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    seed = cfg.seed if args.seed is None else args.seed
    print(summary(rows))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_csv(rows, seed, f"{args.command} {method}"))

    if args.command == "reproduce":
        results = check_rows(rows, load_expected(args.preset))
        for desc, ok in results:
            print(f"[{'PASS' if ok else 'FAIL'}] {args.preset}: {desc}")

    errors = [r for r in rows if r.case == "Error"]
    for r in errors:
        print(f"sepbf: {r.method} at {_fmt(r.snr_db)} dB failed: {r.note}", file=sys.stderr)
    if rows and all(not r.feasible for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
