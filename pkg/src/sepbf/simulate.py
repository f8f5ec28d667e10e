"""Monte-Carlo SER estimation, random channels and SNR sweeps.

Randomness comes from counter-based substreams keyed by
``(seed, stream, sub, block)``; trials are processed in fixed blocks of
``rng.BLOCK`` so error counts do not depend on the number of threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .antipodal import KktConfig, solve_antipodal
from .baseline import sinr_bf
from .mary import PgdConfig, embed_problem, pgd_solve
from .model import AntipodalSpec, Constellation, WiretapSystem
from .numerics import unembed_matrix
from .rng import blocks, substream
from .sdr import NoFeasibleSample, SdrConfig, SdrInfeasible, bob_threshold, randomize, solve_sdr
from .sep import eve_lower_bound, secrecy_rate, sep_antipodal, sep_union_bound

__all__ = [
    "SerEstimate",
    "wilson_interval",
    "gen_gaussian_channel",
    "estimate_ser_antipodal",
    "estimate_ser_mary",
    "SweepConfig",
    "SweepRow",
    "METHODS",
    "evaluate",
    "sweep_snr",
]

_CHANNEL, _ANTIPODAL, _MARY = 2, 3, 4
METHODS = ("antipodal", "sdr", "mary", "sinr_bf")


@dataclass(frozen=True)
class SerEstimate:
    trials: int
    errors: int
    ser: float
    ci95: tuple[float, float]
    seed: int


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # rounding can push a bound past p at errors = 0 or errors = trials
    return min(p, max(0.0, centre - half)), max(p, min(1.0, centre + half))


def _estimate(errors: int, trials: int, seed: int) -> SerEstimate:
    return SerEstimate(trials, errors, errors / trials, wilson_interval(errors, trials), seed)


def _count(trials: int, fn, threads: int) -> int:
    chunks = list(blocks(trials))
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return int(sum(ex.map(fn, chunks)))
    return int(sum(fn(ch) for ch in chunks))


def gen_gaussian_channel(k: int, n: int, var: float, kind: str = "real", seed: int = 0,
                         index: int = 0) -> np.ndarray:
    """``k x n`` Gaussian matrix with per-entry variance ``var``.

    ``kind='real'`` gives real N(0, var) entries; ``'complex'`` gives
    circular entries with ``E|h|^2 = var``. ``index`` selects an independent
    draw under the same seed.
    """
    if var <= 0:
        raise ValueError("variance must be positive")
    rng = substream(seed, _CHANNEL, index)
    if kind == "real":
        return rng.normal(0.0, math.sqrt(var), (k, n)) + 0j
    if kind == "complex":
        z = rng.standard_normal((k, n, 2)) * math.sqrt(var / 2.0)
        return z[..., 0] + 1j * z[..., 1]
    raise ValueError(f"unknown channel kind {kind!r}")


def estimate_ser_antipodal(h, w, a, n0: float, trials: int, seed: int = 0,
                           stream: int = 0, threads: int = 1) -> SerEstimate:
    """ML detection of ``+-w a`` through ``H`` in complex circular noise of
    per-entry variance ``n0``. Equal distances decide ``+``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    v = h @ np.asarray(w, dtype=complex).ravel() * a
    k = v.shape[0]
    sigma = math.sqrt(n0 / 2.0)

    def run(chunk):
        b, _, size = chunk
        rng = substream(seed, _ANTIPODAL, stream, b)
        sign = np.where(rng.integers(0, 2, size) == 1, 1.0, -1.0)
        z = rng.standard_normal((size, k, 2)) * sigma
        y = sign[:, None] * v + (z[..., 0] + 1j * z[..., 1])
        d_plus = np.sum(np.abs(y - v) ** 2, axis=1)
        d_minus = np.sum(np.abs(y + v) ** 2, axis=1)
        decided = np.where(d_plus <= d_minus, 1.0, -1.0)
        return int(np.count_nonzero(decided != sign))

    return _estimate(_count(trials, run, threads), trials, seed)


def estimate_ser_mary(h_t, w_t, symbols_t, n0: float, trials: int, seed: int = 0,
                      stream: int = 0, threads: int = 1) -> SerEstimate:
    """ML detection over the embedded constellation (rows of ``symbols_t``)
    with real noise N(0, n0/2) per component and a uniform prior."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    h_t = np.atleast_2d(np.asarray(h_t, dtype=float))
    points = (h_t @ np.asarray(w_t, dtype=float) @ np.asarray(symbols_t, dtype=float).T).T
    m, k = points.shape
    energy = np.sum(points * points, axis=1)
    sigma = math.sqrt(n0 / 2.0)

    def run(chunk):
        b, _, size = chunk
        rng = substream(seed, _MARY, stream, b)
        idx = rng.integers(0, m, size)
        y = points[idx] + rng.standard_normal((size, k)) * sigma
        # ||y - p||^2 up to the common ||y||^2 term
        metric = energy[None, :] - 2.0 * (y @ points.T)
        return int(np.count_nonzero(np.argmin(metric, axis=1) != idx))

    return _estimate(_count(trials, run, threads), trials, seed)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SweepConfig:
    system: WiretapSystem
    antipodal: AntipodalSpec = AntipodalSpec()
    kkt: KktConfig = KktConfig()
    sdr: SdrConfig = SdrConfig()
    sdr_d: Optional[float] = None       # Bob SEP cap for the SDR design
    sdr_draws: int = 500
    pgd: PgdConfig = PgdConfig()
    constellation: Optional[Constellation] = None
    trials: int = 0                     # 0 disables Monte Carlo
    seed: int = 0
    threads: int = 1
    preset: str = ""


@dataclass
class SweepRow:
    method: str
    preset: str = ""
    snr_db: Optional[float] = None
    case: str = ""
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    sep_bob_analytic: Optional[float] = None
    sep_eve_analytic: Optional[float] = None
    ser_bob_mc: Optional[float] = None
    ser_eve_mc: Optional[float] = None
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    secrecy_rate: Optional[float] = None
    feasible: bool = False
    seed: Optional[int] = None
    note: str = field(default="", compare=False)
    w: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


def _power_at(sys: WiretapSystem, snr_db: Optional[float]) -> WiretapSystem:
    if snr_db is None:
        return sys
    return sys.with_power(10.0 ** (snr_db / 10.0) * sys.n_b)


def _fill_vector(row: SweepRow, sys: WiretapSystem, w: np.ndarray, a: complex,
                 cfg: SweepConfig) -> None:
    row.w = w
    row.sep_bob_analytic = sep_antipodal(sys.h_b, w, a, sys.n_b)
    row.sep_eve_analytic = sep_antipodal(sys.h_e, w, a, sys.n_e)
    row.secrecy_rate = secrecy_rate(sys, abs(a) ** 2 * np.outer(w, w.conj())).rate
    if cfg.trials > 0:
        bob = estimate_ser_antipodal(sys.h_b, w, a, sys.n_b, cfg.trials, cfg.seed, 0, cfg.threads)
        eve = estimate_ser_antipodal(sys.h_e, w, a, sys.n_e, cfg.trials, cfg.seed, 1, cfg.threads)
        row.ser_bob_mc, row.ser_eve_mc = bob.ser, eve.ser
        row.ci_lo, row.ci_hi = bob.ci95


def _run_antipodal(sys, cfg, row):
    rep = solve_antipodal(sys, cfg.antipodal, cfg.kkt)
    row.case = rep.case.value
    if not rep.feasible:
        return [row]
    row.feasible = True
    row.lambda1, row.lambda2 = rep.lambda1, rep.lambda2
    _fill_vector(row, sys, rep.w_bar.w, cfg.antipodal.amplitude, cfg)
    return [row]


def _run_sinr(sys, cfg, row):
    beam = sinr_bf(sys)
    row.case, row.feasible = "Full", True
    _fill_vector(row, sys, beam.w, cfg.antipodal.amplitude, cfg)
    return [row]


def _run_sdr(sys, cfg, row):
    if cfg.sdr_d is None:
        raise ValueError("the SDR design needs a Bob SEP cap (sdr_d)")
    amp = cfg.antipodal.amplitude
    t_b = bob_threshold(sys, cfg.sdr_d, amp)
    try:
        sol = solve_sdr(sys, t_b, cfg.sdr)
        w = randomize(sol, sys, t_b, cfg.sdr_draws, cfg.seed, cfg.threads)
    except (SdrInfeasible, NoFeasibleSample) as exc:
        row.case, row.note = "Infeasible", str(exc)
        return [row]
    row.case, row.feasible = f"rank{sol.rank_est}", True
    _fill_vector(row, sys, w, amp, cfg)
    return [row]


def _mary_rate(sys, cons, wt, structured):
    if not structured:
        return None
    w = unembed_matrix(wt)
    cov = cons.symbols.T @ cons.symbols.conj() / cons.m
    return secrecy_rate(sys, w @ cov @ w.conj().T).rate


def _run_mary(sys, cfg, row):
    cons = cfg.constellation
    if cons is None:
        raise ValueError("the M-ary design needs a constellation")
    cons.check_against(sys)
    pgd = cfg.pgd if cfg.pgd.threads == cfg.threads else _replace(cfg.pgd, threads=cfg.threads)
    trace = pgd_solve(sys, cons, pgd)
    prob = embed_problem(sys, cons, pgd.structured)

    def analytic(wt):
        bob = sep_union_bound(prob.h_b, wt, prob.symbols, prob.n_b)
        eve = eve_lower_bound(prob.h_e, wt, prob.symbols, prob.n_e)[0]
        return bob, eve

    wt = trace.best_w.w_tilde
    row.case, row.feasible, row.w = "best", True, wt
    row.sep_bob_analytic, row.sep_eve_analytic = analytic(wt)
    row.secrecy_rate = _mary_rate(sys, cons, wt, pgd.structured)
    if cfg.trials > 0:
        bob = estimate_ser_mary(prob.h_b, wt, prob.symbols, prob.n_b, cfg.trials, cfg.seed, 0, cfg.threads)
        eve = estimate_ser_mary(prob.h_e, wt, prob.symbols, prob.n_e, cfg.trials, cfg.seed, 1, cfg.threads)
        row.ser_bob_mc, row.ser_eve_mc = bob.ser, eve.ser
        row.ci_lo, row.ci_hi = bob.ci95

    per = np.array([analytic(w) for w in trace.restart_ws])
    mean = _replace(row, case="mean", ser_bob_mc=None, ser_eve_mc=None, ci_lo=None,
                    ci_hi=None, w=None, note=f"{len(per)} restarts")
    mean.sep_bob_analytic, mean.sep_eve_analytic = (float(x) for x in per.mean(axis=0))
    rates = [_mary_rate(sys, cons, w, pgd.structured) for w in trace.restart_ws]
    mean.secrecy_rate = None if rates[0] is None else float(np.mean(rates))
    return [row, mean]


def _replace(obj, **kw):
    from dataclasses import replace
    return replace(obj, **kw)


_RUNNERS = {
    "antipodal": _run_antipodal,
    "sinr_bf": _run_sinr,
    "sdr": _run_sdr,
    "mary": _run_mary,
}


def evaluate(method: str, cfg: SweepConfig, snr_db: Optional[float] = None) -> list[SweepRow]:
    """Solve ``method`` at one operating point and evaluate it.

    With ``snr_db`` given the power is set to ``SNR * N_B``; otherwise the
    configured power is used. Errors propagate.
    """
    if method not in _RUNNERS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    sys = _power_at(cfg.system, snr_db)
    row = SweepRow(method=method, preset=cfg.preset, snr_db=snr_db, seed=cfg.seed)
    return _RUNNERS[method](sys, cfg, row)


def sweep_snr(method: str, grid, cfg: SweepConfig) -> list[SweepRow]:
    """One or more rows per SNR point; failures become flagged rows."""
    grid = list(grid)
    if not grid:
        raise ValueError("SNR grid is empty")
    if method not in _RUNNERS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    rows = []
    for snr in grid:
        try:
            rows.extend(evaluate(method, cfg, float(snr)))
        except Exception as exc:  # noqa: BLE001 - a failed point must not abort the sweep
            rows.append(SweepRow(method=method, preset=cfg.preset, snr_db=float(snr),
                                 case="Error", seed=cfg.seed, note=f"{type(exc).__name__}: {exc}"))
    return rows
