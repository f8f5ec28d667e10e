"""M-ary PGD sweep: best and mean-over-restarts Bob SEP, Eve bound and Monte Carlo SER."""

import argparse
from dataclasses import replace

from sepbf.cli import format_csv
from sepbf.config import load_config, loads_config
from sepbf.expected import preset_path
from sepbf.simulate import sweep_snr


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="TOML config (default: the fig9-qam4 preset)")
    ap.add_argument("--gamma", type=float, nargs="+", help="penalty weights to sweep")
    ap.add_argument("--restarts", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", help="CSV path (rows of all gammas concatenated)")
    args = ap.parse_args()

    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = loads_config(preset_path("fig9-qam4").read_text(encoding="utf-8"))
    if args.restarts:
        cfg = replace(cfg, pgd=replace(cfg.pgd, restarts=args.restarts))
    gammas = args.gamma or [cfg.pgd.gamma]
    rows = []
    for g in gammas:
        scfg = cfg.sweep_config(trials=args.trials, threads=args.threads)
        scfg = replace(scfg, pgd=replace(scfg.pgd, gamma=g))
        part = sweep_snr("mary", cfg.snr_db or [0.0, 10.0, 20.0, 30.0], scfg)
        print(f"gamma = {g}")
        print(f"{'snr_db':>7} {'case':>5} {'bob bound':>11} {'eve bound':>11} {'bob mc':>11}")
        for r in part:
            mc = "" if r.ser_bob_mc is None else f"{r.ser_bob_mc:11.4e}"
            print(f"{r.snr_db:7.1f} {r.case:>5} {r.sep_bob_analytic:11.4e} "
                  f"{r.sep_eve_analytic:11.4e} {mc}")
        rows.extend(part)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(format_csv(rows, cfg.seed, "sweep mary"))


if __name__ == "__main__":
    main()
