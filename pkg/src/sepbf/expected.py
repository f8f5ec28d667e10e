"""Expected-output tolerances shipped with the presets."""

from __future__ import annotations

import math
from importlib import resources

import tomli

__all__ = ["PRESETS", "preset_path", "load_expected", "check_rows"]

PRESETS = ("setup1", "setup2", "setup3", "fig3-orthogonal", "fig4-gaussian", "fig9-qam4")


def preset_path(name: str, suffix: str = ".toml"):
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("sepbf") / "presets" / f"{name}{suffix}"


def load_expected(name: str) -> dict:
    return tomli.loads(preset_path(name, ".expected.toml").read_text(encoding="utf-8"))


def _value(row, column):
    return getattr(row, column)


def _close(got, check) -> bool:
    if got is None or (isinstance(got, float) and math.isnan(got)):
        return False
    if "equals" in check:
        return got == check["equals"]
    tol = check.get("abs", 0.0) + check.get("rel", 0.0) * abs(check["value"])
    return abs(got - check["value"]) <= tol


def _series(rows, prop):
    sel = [r for r in rows if "case" not in prop or r.case == prop["case"]]
    return [_value(r, prop["column"]) for r in sel if r.feasible or prop["column"] == "feasible"]


def _holds(rows, prop) -> bool:
    kind, vals = prop["kind"], _series(rows, prop)
    if not vals:
        return False
    pairs = list(zip(vals, vals[1:]))
    if kind == "strictly_decreasing":
        return all(b < a for a, b in pairs)
    if kind == "nonincreasing":
        return all(b <= a * (1 + 1e-9) for a, b in pairs)
    if kind == "at_least":
        return all(v >= prop["value"] for v in vals)
    if kind == "at_most":
        return all(v <= prop["value"] for v in vals)
    if kind == "feasible_then_infeasible":
        # a nonempty feasible prefix followed by a nonempty infeasible tail
        k = vals.index(False) if False in vals else len(vals)
        return 0 < k < len(vals) and not any(vals[k:])
    raise ValueError(f"unknown property kind {kind!r}")


def check_rows(rows, expected: dict) -> list[tuple[str, bool]]:
    """Evaluate every check and property; returns ``(description, ok)``.

    Checks without ``snr_db`` apply to every feasible row (or every row when
    none is feasible).
    """
    out = []
    for chk in expected.get("check", []):
        sel = [r for r in rows if "snr_db" not in chk or r.snr_db == chk["snr_db"]]
        sel = [r for r in sel if r.feasible] or sel
        target = chk.get("equals", chk.get("value"))
        desc = f"{chk['column']} ~ {target}"
        out.append((desc, bool(sel) and all(_close(_value(r, chk["column"]), chk) for r in sel)))
    for prop in expected.get("property", []):
        desc = f"{prop['column']} {prop['kind']}" + (f" {prop['value']}" if "value" in prop else "")
        out.append((desc, _holds(rows, prop)))
    return out
