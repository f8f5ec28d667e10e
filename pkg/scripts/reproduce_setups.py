"""Solve the three deterministic 2x2 setups and print every KKT case."""

import argparse

from sepbf.antipodal import solve_antipodal
from sepbf.config import loads_config
from sepbf.expected import check_rows, load_expected, preset_path
from sepbf.simulate import evaluate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", nargs="+", default=["setup1", "setup2", "setup3"])
    args = ap.parse_args()
    for name in args.presets:
        cfg = loads_config(preset_path(name).read_text(encoding="utf-8"))
        rep = solve_antipodal(cfg.system, cfg.antipodal, cfg.kkt)
        print(f"== {name}: selected {rep.case.value}, threshold t = {rep.threshold:.6e}")
        for case, cand in rep.candidates.items():
            if cand is None:
                print(f"   {case.value:<6} empty")
                continue
            w = ", ".join(f"{x.real:+.4f}{x.imag:+.4f}j" for x in cand.w_bar)
            print(f"   {case.value:<6} lambda1={cand.lambda1:.4f} lambda2={cand.lambda2:.4f} "
                  f"bob={cand.sep_bob:.4e} eve={cand.sep_eve:.4f} w=[{w}]")
        rows = evaluate("antipodal", cfg.sweep_config())
        for desc, ok in check_rows(rows, load_expected(name)):
            print(f"   [{'PASS' if ok else 'FAIL'}] {desc}")


if __name__ == "__main__":
    main()
