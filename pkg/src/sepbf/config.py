"""Strict TOML experiment configuration.

Layout::

    [meta]                      # optional
    name = "setup1"
    method = "antipodal"        # default method for `reproduce`

    [system]
    n_b = 0.01
    n_e = 0.01
    power = 1.0
    [system.h_b]
    rows = 2
    cols = 2
    data = [[0.21, 0.0], [0.011, 0.0], [0.09, 0.0], [0.3, 0.0]]   # row-major [re, im]
    [system.h_e]
    ...

    [antipodal]  amplitude, eve_sep_min, sweep_points, eq_tol, refine, case3
    [sdr]        d, tol, max_iters, rho, relax, draws
    [mary]       constellation ("qam4" or a rows/cols/data table), gamma, alpha,
                 eps, max_iters, restarts, seed, structured, backtrack, init_scale,
                 eve_lb_min
    [sim]        trials, seed, threads, snr_db

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import tomli
import tomli_w

from .antipodal import KktConfig
from .mary import PgdConfig
from .model import QAM4_SYMBOLS, AntipodalSpec, Constellation, WiretapSystem, validate_system
from .sdr import SdrConfig
from .simulate import METHODS, SweepConfig

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "loads_config", "save_config",
           "dumps_config"]


class ConfigError(ValueError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field = field_path


@dataclass(frozen=True)
class ExperimentConfig:
    system: WiretapSystem
    name: str = ""
    method: str = "antipodal"
    description: str = ""
    antipodal: AntipodalSpec = AntipodalSpec()
    kkt: KktConfig = KktConfig()
    sdr: SdrConfig = SdrConfig()
    sdr_d: Optional[float] = None
    sdr_draws: int = 500
    pgd: PgdConfig = PgdConfig()
    constellation: Optional[Constellation] = None
    constellation_name: str = ""
    trials: int = 0
    seed: int = 0
    threads: int = 1
    snr_db: tuple = field(default_factory=tuple)

    def sweep_config(self, seed: Optional[int] = None, trials: Optional[int] = None,
                     threads: Optional[int] = None) -> SweepConfig:
        """Build a :class:`SweepConfig`; command-line overrides win."""
        seed = self.seed if seed is None else seed
        threads = self.threads if threads is None else threads
        return SweepConfig(
            system=self.system,
            antipodal=self.antipodal,
            kkt=self.kkt,
            sdr=self.sdr,
            sdr_d=self.sdr_d,
            sdr_draws=self.sdr_draws,
            pgd=replace(self.pgd, seed=seed, threads=threads),
            constellation=self.constellation,
            trials=self.trials if trials is None else trials,
            seed=seed,
            threads=threads,
            preset=self.name,
        )


# ---------------------------------------------------------------------------
# field readers
# ---------------------------------------------------------------------------
def _table(doc: dict, key: str, path: str, allowed: set, required: bool = False) -> dict:
    if key not in doc:
        if required:
            raise ConfigError(f"{path}{key}", "missing required section")
        return {}
    sec = doc[key]
    if not isinstance(sec, dict):
        raise ConfigError(f"{path}{key}", "expected a table")
    unknown = sorted(set(sec) - allowed)
    if unknown:
        raise ConfigError(f"{path}{key}.{unknown[0]}", "unknown key")
    return sec


def _float(sec: dict, key: str, path: str, default=None, required=False) -> Optional[float]:
    if key not in sec:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return v


def _int(sec: dict, key: str, path: str, default=None) -> Optional[int]:
    if key not in sec:
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {type(v).__name__}")
    return v


def _bool(sec: dict, key: str, path: str, default: bool) -> bool:
    if key not in sec:
        return default
    v = sec[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", "expected true or false")
    return v


def _str(sec: dict, key: str, path: str, default: str) -> str:
    if key not in sec:
        return default
    v = sec[key]
    if not isinstance(v, str):
        raise ConfigError(f"{path}.{key}", "expected a string")
    return v


def _matrix(sec: dict, key: str, path: str) -> np.ndarray:
    where = f"{path}.{key}"
    if key not in sec:
        raise ConfigError(where, "missing required matrix")
    tab = sec[key]
    if not isinstance(tab, dict):
        raise ConfigError(where, "expected a table with rows, cols and data")
    unknown = sorted(set(tab) - {"rows", "cols", "data"})
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}", "unknown key")
    rows, cols = _int(tab, "rows", where), _int(tab, "cols", where)
    if rows is None or cols is None:
        raise ConfigError(where, "rows and cols are required")
    if rows < 1 or cols < 1:
        raise ConfigError(where, "rows and cols must be positive")
    data = tab.get("data")
    if not isinstance(data, list):
        raise ConfigError(f"{where}.data", "expected a list of [re, im] pairs")
    if len(data) != rows * cols:
        raise ConfigError(f"{where}.data", f"expected {rows * cols} entries, got {len(data)}")
    out = np.empty(rows * cols, complex)
    for k, pair in enumerate(data):
        ok = (isinstance(pair, list) and len(pair) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair))
        if not ok:
            raise ConfigError(f"{where}.data[{k}]", "expected an [re, im] pair of numbers")
        out[k] = complex(float(pair[0]), float(pair[1]))
    return out.reshape(rows, cols)


# ---------------------------------------------------------------------------
_TOP = {"meta", "system", "antipodal", "sdr", "mary", "sim"}
_META = {"name", "method", "description"}
_SYSTEM = {"h_b", "h_e", "n_b", "n_e", "power"}
_ANTIPODAL = {"amplitude", "eve_sep_min", "sweep_points", "eq_tol", "refine", "case3"}
_SDR = {"d", "tol", "max_iters", "rho", "relax", "draws"}
_MARY = {"constellation", "gamma", "alpha", "eps", "max_iters", "restarts", "seed",
         "structured", "backtrack", "init_scale", "eve_lb_min"}
_SIM = {"trials", "seed", "threads", "snr_db"}

_NAMED_CONSTELLATIONS = {"qam4": QAM4_SYMBOLS}


def _wrap(path: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _parse(doc: dict) -> ExperimentConfig:
    unknown = sorted(set(doc) - _TOP)
    if unknown:
        raise ConfigError(unknown[0], "unknown section")
    meta = _table(doc, "meta", "", _META)
    method = _str(meta, "method", "meta", "antipodal")
    if method not in METHODS:
        raise ConfigError("meta.method", f"must be one of {', '.join(METHODS)}")

    s = _table(doc, "system", "", _SYSTEM, required=True)
    h_b, h_e = _matrix(s, "h_b", "system"), _matrix(s, "h_e", "system")
    n_b = _float(s, "n_b", "system", required=True)
    n_e = _float(s, "n_e", "system", required=True)
    power = _float(s, "power", "system", default=1.0)
    system = _wrap("system", WiretapSystem, h_b, h_e, n_b, n_e, power)
    problems = validate_system(system)
    if problems:
        raise ConfigError("system", "; ".join(problems))

    a = _table(doc, "antipodal", "", _ANTIPODAL)
    spec = _wrap("antipodal", AntipodalSpec,
                 amplitude=_float(a, "amplitude", "antipodal", 1.0),
                 eve_sep_min=_float(a, "eve_sep_min", "antipodal", 0.5))
    kkt = _wrap("antipodal", KktConfig,
                sweep_points=_int(a, "sweep_points", "antipodal", 2000),
                eq_tol=_float(a, "eq_tol", "antipodal", 1e-3),
                refine=_bool(a, "refine", "antipodal", True),
                case3=_str(a, "case3", "antipodal", "rescale"))

    d = _table(doc, "sdr", "", _SDR)
    sdr_d = _float(d, "d", "sdr")
    if sdr_d is not None and not 0.0 < sdr_d <= 0.5:
        raise ConfigError("sdr.d", "Bob SEP cap must lie in (0, 0.5]")
    sdr = SdrConfig(tol=_float(d, "tol", "sdr", 1e-6), max_iters=_int(d, "max_iters", "sdr", 50_000),
                    rho=_float(d, "rho", "sdr", 1.0), relax=_float(d, "relax", "sdr", 1.6))
    draws = _int(d, "draws", "sdr", 500)
    if draws < 1:
        raise ConfigError("sdr.draws", "must be at least 1")

    sim = _table(doc, "sim", "", _SIM)
    seed = _int(sim, "seed", "sim", 0)
    threads = _int(sim, "threads", "sim", 1)
    trials = _int(sim, "trials", "sim", 0)
    if trials < 0:
        raise ConfigError("sim.trials", "must be nonnegative")
    if threads < 1:
        raise ConfigError("sim.threads", "must be at least 1")
    grid = sim.get("snr_db", [])
    if not isinstance(grid, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in grid):
        raise ConfigError("sim.snr_db", "expected a list of numbers")

    m = _table(doc, "mary", "", _MARY)
    cons, cons_name = None, ""
    if "constellation" in m:
        raw = m["constellation"]
        eve_lb = _float(m, "eve_lb_min", "mary", 0.0)
        if isinstance(raw, str):
            if raw not in _NAMED_CONSTELLATIONS:
                raise ConfigError("mary.constellation", f"unknown constellation {raw!r}")
            cons_name = raw
            symbols = _NAMED_CONSTELLATIONS[raw]
        else:
            symbols = _matrix(m, "constellation", "mary")
        cons = _wrap("mary.constellation", Constellation, symbols, eve_lb)
    alpha = _float(m, "alpha", "mary")
    if alpha is not None and alpha <= 0:
        raise ConfigError("mary.alpha", "must be positive")
    pgd = PgdConfig(
        alpha=alpha,
        gamma=_float(m, "gamma", "mary", 1.0),
        eps=_float(m, "eps", "mary", 1e-5),
        max_iters=_int(m, "max_iters", "mary", 300),
        restarts=_int(m, "restarts", "mary", 100),
        seed=_int(m, "seed", "mary", seed),
        init_scale=_float(m, "init_scale", "mary"),
        structured=_bool(m, "structured", "mary", False),
        backtrack=_int(m, "backtrack", "mary", 20),
        threads=threads,
    )
    if pgd.restarts < 1 or pgd.max_iters < 1:
        raise ConfigError("mary", "restarts and max_iters must be at least 1")

    return ExperimentConfig(
        system=system, name=_str(meta, "name", "meta", ""), method=method,
        description=_str(meta, "description", "meta", ""),
        antipodal=spec, kkt=kkt, sdr=sdr, sdr_d=sdr_d, sdr_draws=draws, pgd=pgd,
        constellation=cons, constellation_name=cons_name, trials=trials, seed=seed,
        threads=threads, snr_db=tuple(float(x) for x in grid),
    )


def loads_config(text: str) -> ExperimentConfig:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("", f"parse error: {exc}") from None
    return _parse(doc)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    return loads_config(text)


# ---------------------------------------------------------------------------
def _matrix_doc(h: np.ndarray) -> dict:
    h = np.asarray(h, dtype=complex)
    return {
        "rows": h.shape[0],
        "cols": h.shape[1],
        "data": [[float(z.real), float(z.imag)] for z in h.ravel()],
    }


def _to_doc(cfg: ExperimentConfig) -> dict[str, Any]:
    sys = cfg.system
    doc: dict[str, Any] = {
        "meta": {"name": cfg.name, "method": cfg.method, "description": cfg.description},
        "system": {
            "n_b": sys.n_b, "n_e": sys.n_e, "power": sys.power,
            "h_b": _matrix_doc(sys.h_b), "h_e": _matrix_doc(sys.h_e),
        },
        "antipodal": {
            "amplitude": float(cfg.antipodal.amplitude.real),
            "eve_sep_min": cfg.antipodal.eve_sep_min,
            "sweep_points": cfg.kkt.sweep_points, "eq_tol": cfg.kkt.eq_tol,
            "refine": cfg.kkt.refine, "case3": cfg.kkt.case3,
        },
        "sdr": {"tol": cfg.sdr.tol, "max_iters": cfg.sdr.max_iters, "rho": cfg.sdr.rho,
                "relax": cfg.sdr.relax, "draws": cfg.sdr_draws},
        "sim": {"trials": cfg.trials, "seed": cfg.seed, "threads": cfg.threads,
                "snr_db": list(cfg.snr_db)},
    }
    if cfg.sdr_d is not None:
        doc["sdr"]["d"] = cfg.sdr_d
    p = cfg.pgd
    mary: dict[str, Any] = {
        "gamma": p.gamma, "eps": p.eps, "max_iters": p.max_iters, "restarts": p.restarts,
        "seed": p.seed, "structured": p.structured, "backtrack": p.backtrack,
    }
    if p.alpha is not None:
        mary["alpha"] = p.alpha
    if p.init_scale is not None:
        mary["init_scale"] = p.init_scale
    if cfg.constellation is not None:
        mary["constellation"] = cfg.constellation_name or _matrix_doc(cfg.constellation.symbols)
        mary["eve_lb_min"] = cfg.constellation.eve_lb_min
    doc["mary"] = mary
    return doc


def dumps_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(_to_doc(cfg))


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg), encoding="utf-8")
