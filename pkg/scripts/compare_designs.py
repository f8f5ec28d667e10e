"""SNR sweep of the antipodal, SINR-BF and SDR designs on one system.

Writes one CSV per method and prints Bob and Eve SEP side by side.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from sepbf.antipodal import KktConfig
from sepbf.cli import format_csv
from sepbf.config import load_config, loads_config
from sepbf.expected import preset_path
from sepbf.simulate import sweep_snr


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="TOML config (default: the fig4-gaussian preset)")
    ap.add_argument("--case3", choices=["rescale", "full-power"],
                    help="override the Case 3 candidate rule")
    ap.add_argument("--sdr-d", type=float, help="Bob SEP cap for the SDR design")
    ap.add_argument("--trials", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = loads_config(preset_path("fig4-gaussian").read_text(encoding="utf-8"))
    if args.case3:
        cfg = replace(cfg, kkt=replace(cfg.kkt, case3=args.case3))
    if args.sdr_d is not None:
        cfg = replace(cfg, sdr_d=args.sdr_d)
    scfg = cfg.sweep_config(trials=args.trials)
    grid = list(cfg.snr_db) or [float(s) for s in range(0, 31, 2)]

    methods = ["antipodal", "sinr_bf"] + (["sdr"] if cfg.sdr_d is not None else [])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = {}
    for m in methods:
        rows = sweep_snr(m, grid, scfg)
        (out / f"{cfg.name or 'custom'}-{m}.csv").write_text(
            format_csv(rows, scfg.seed, f"sweep {m}"), encoding="utf-8")
        table[m] = {r.snr_db: r for r in rows}

    def cell(r):
        if r is None or r.sep_bob_analytic is None:
            return f"{(r.case if r else '-'):>23}"
        return f"{r.sep_bob_analytic:11.4e} {r.sep_eve_analytic:11.4e}"

    print("snr_db " + " ".join(f"{m + ' bob/eve':>23}" for m in methods))
    for s in grid:
        print(f"{s:6.1f} " + " ".join(cell(table[m].get(s)) for m in methods))


if __name__ == "__main__":
    main()
