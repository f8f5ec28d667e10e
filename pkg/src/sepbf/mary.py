"""M-ary beamforming by projected gradient descent on the real embedding.

The penalized objective is

    f(W, gamma) = union bound for Bob - gamma * (weakest pairwise term for Eve),

where the weakest Eve pair ``(i*, j*)`` is recomputed from the current
iterate and treated as fixed when differentiating. Iterates are projected
onto the Frobenius ball ``||W||_F <= sqrt(P)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .model import Constellation, RealBeamMatrix, WiretapSystem
from .numerics import herm_eig, q, q_prime, real_embed_matrix, real_embed_vector
from .rng import substream
from .sep import eve_lower_bound, pair_differences

__all__ = [
    "SingularPoint",
    "BracketFailure",
    "StopReason",
    "PgdConfig",
    "PgdTrace",
    "EmbeddedProblem",
    "embed_problem",
    "critical_pair",
    "objective",
    "gradient",
    "project_power",
    "structure",
    "pgd_solve",
    "tune_gamma",
    "default_alpha",
]


class SingularPoint(ArithmeticError):
    """A pair distance vanished, so the gradient of Q(sqrt(.)) is unbounded."""


class BracketFailure(ValueError):
    pass


class StopReason(str, Enum):
    TOLERANCE = "Tolerance"
    MAX_ITERS = "MaxIters"


@dataclass(frozen=True)
class PgdConfig:
    alpha: Optional[float] = None  # None -> default_alpha()
    gamma: float = 1.0
    eps: float = 1e-5
    max_iters: int = 300
    restarts: int = 100
    seed: int = 0
    init_scale: Optional[float] = None  # None -> sqrt of the power budget
    structured: bool = False
    backtrack: int = 20
    threads: int = 1

    def __post_init__(self):
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be >= 1")


@dataclass(frozen=True)
class EmbeddedProblem:
    """Real-embedded channels, symbol differences and noise powers."""

    h_b: np.ndarray      # 2K_B x 2N
    h_e: np.ndarray      # 2K_E x 2N
    symbols: np.ndarray  # M x 2L
    pairs: list
    diffs: np.ndarray    # 2L x M(M-1)
    n_b: float
    n_e: float
    power: float         # budget on Tr(W W^T)

    @property
    def m(self) -> int:
        return self.symbols.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.h_b.shape[1], self.symbols.shape[1]


def embed_problem(sys: WiretapSystem, cons: Constellation, structured: bool = False
                  ) -> EmbeddedProblem:
    """Embed ``sys`` and ``cons``.

    The unstructured mode keeps the budget ``P`` on ``Tr(W W^T)``. The
    structured mode uses ``2P``, since ``Tr(W~ W~^T) = 2 Tr(W W^H)`` for an
    embedded complex ``W``.
    """
    symbols = real_embed_vector(cons.symbols.T).T
    pairs, diffs = pair_differences(symbols)
    power = 2.0 * sys.power if structured else sys.power
    return EmbeddedProblem(
        real_embed_matrix(sys.h_b), real_embed_matrix(sys.h_e), symbols, pairs, diffs,
        sys.n_b, sys.n_e, power,
    )


def default_alpha(prob: EmbeddedProblem) -> float:
    lam = float(herm_eig(prob.h_b.T @ prob.h_b).values[-1])
    return 0.05 * prob.power / (1.0 + lam)


# ---------------------------------------------------------------------------
def critical_pair(wt: np.ndarray, prob: EmbeddedProblem) -> tuple[int, int]:
    """Ordered pair with the smallest Eve term; lexicographic tie-break."""
    return eve_lower_bound(prob.h_e, wt, prob.symbols, prob.n_e)[1]


def _bob_args(wt, prob):
    return np.linalg.norm(prob.h_b @ wt @ prob.diffs, axis=0) / math.sqrt(2.0 * prob.n_b)


def _eve_arg(wt, prob, pair):
    d = prob.symbols[pair[0]] - prob.symbols[pair[1]]
    return float(np.linalg.norm(prob.h_e @ wt @ d)) / math.sqrt(2.0 * prob.n_e)


def objective(wt: np.ndarray, prob: EmbeddedProblem, gamma: float,
              pair: Optional[tuple[int, int]] = None) -> float:
    if pair is None:
        pair = critical_pair(wt, prob)
    bob = float(np.sum(q(_bob_args(wt, prob)))) / prob.m
    return bob - gamma * q(_eve_arg(wt, prob, pair))


def gradient(wt: np.ndarray, prob: EmbeddedProblem, gamma: float,
             pair: Optional[tuple[int, int]] = None, floor: float = 1e-12) -> np.ndarray:
    """Gradient of :func:`objective` with the Eve pair held fixed.

    Each pair contributes ``Q'(u) / (2u) * H^T H W d d^T / N`` with
    ``u = ||H W d|| / sqrt(2N)``; the Bob terms carry ``1/M``.
    """
    if pair is None:
        pair = critical_pair(wt, prob)
    g = np.zeros_like(wt)
    gram_b = prob.h_b.T @ prob.h_b
    hwd = gram_b @ wt @ prob.diffs
    u = _bob_args(wt, prob)
    if np.any(u * math.sqrt(2.0 * prob.n_b) < floor) and np.linalg.norm(gram_b) > 0:
        raise SingularPoint("a Bob pair distance vanished")
    if np.linalg.norm(gram_b) > 0:
        coef = q_prime(u) / (2.0 * u) / prob.n_b / prob.m
        g += (hwd * coef) @ prob.diffs.T
    if gamma != 0.0:
        d = prob.symbols[pair[0]] - prob.symbols[pair[1]]
        gram_e = prob.h_e.T @ prob.h_e
        ue = _eve_arg(wt, prob, pair)
        if ue * math.sqrt(2.0 * prob.n_e) < floor:
            raise SingularPoint("the critical Eve pair distance vanished")
        coef_e = q_prime(ue) / (2.0 * ue) / prob.n_e
        g -= gamma * coef_e * np.outer(gram_e @ wt @ d, d)
    return g


def project_power(g: np.ndarray, power: float) -> np.ndarray:
    """Frobenius-ball projection: ``g`` if ``||g||_F <= sqrt(P)``, else rescaled."""
    nrm = float(np.linalg.norm(g))
    root = math.sqrt(power)
    if nrm <= root:
        return g
    return g * (root / nrm)


def structure(wt: np.ndarray) -> np.ndarray:
    """Nearest matrix of the form ``[[A, -B], [B, A]]`` (block averaging)."""
    n, l = wt.shape[0] // 2, wt.shape[1] // 2
    a = 0.5 * (wt[:n, :l] + wt[n:, l:])
    b = 0.5 * (wt[n:, :l] - wt[:n, l:])
    return np.block([[a, -b], [b, a]])


# ---------------------------------------------------------------------------
@dataclass
class PgdTrace:
    objective_per_iter: list
    critical_pairs: list
    best_w: RealBeamMatrix
    best_objective: float
    stop_reason: StopReason
    initial_objective: float = math.nan
    restart_objectives: list = field(default_factory=list)
    iterations: int = 0
    restart_ws: list = field(default_factory=list, repr=False)

    @property
    def mean_restart_objective(self) -> float:
        return float(np.mean(self.restart_objectives)) if self.restart_objectives else math.nan


def _project(wt, prob, structured):
    if structured:
        wt = structure(wt)
    return project_power(wt, prob.power)


def _initial(prob, cfg, rng):
    n2, l2 = prob.shape
    w0 = rng.standard_normal((n2, l2))
    if cfg.structured:
        w0 = structure(w0)
    scale = cfg.init_scale if cfg.init_scale is not None else math.sqrt(prob.power)
    nrm = np.linalg.norm(w0)
    w0 = w0 * (scale / nrm) if nrm > 0 else w0
    return _project(w0, prob, cfg.structured)


def _run_once(prob, cfg, w0, alpha):
    """One PGD run from ``w0``; tracks the best iterate."""
    wt = w0
    pair = critical_pair(wt, prob)
    f = objective(wt, prob, cfg.gamma, pair)
    f0 = f
    objs, pairs = [f], [pair]
    best_w, best_f = wt, f
    reason = StopReason.MAX_ITERS
    for _ in range(cfg.max_iters):
        g = gradient(wt, prob, cfg.gamma, pair)
        step = alpha
        for _ in range(cfg.backtrack + 1):
            cand = _project(wt - step * g, prob, cfg.structured)
            cand_pair = critical_pair(cand, prob)
            f_new = objective(cand, prob, cfg.gamma, cand_pair)
            if f_new <= f:
                break
            step *= 0.5
        improvement = f - f_new
        wt, pair, f = cand, cand_pair, f_new
        objs.append(f)
        pairs.append(pair)
        if f < best_f:
            best_w, best_f = wt, f
        if improvement <= cfg.eps:
            reason = StopReason.TOLERANCE
            break
    return objs, pairs, best_w, best_f, reason, f0


def _restart(prob, cfg, alpha, r):
    # a singular start is redrawn once from the next draw of the same substream
    rng = substream(cfg.seed, 1, r)
    for attempt in range(2):
        w0 = _initial(prob, cfg, rng)
        try:
            return _run_once(prob, cfg, w0, alpha)
        except SingularPoint:
            if attempt == 1:
                return None
    return None


def pgd_solve(sys: WiretapSystem, cons: Constellation, cfg: PgdConfig = PgdConfig()
              ) -> PgdTrace:
    """Multi-start PGD; returns the best feasible iterate over all restarts.

    The stopping rule ends a run once an accepted step improves the objective
    by no more than ``eps``. A step that increases the objective is halved up
    to ``backtrack`` times before being accepted anyway.
    """
    sys.check()
    prob = embed_problem(sys, cons, cfg.structured)
    alpha = cfg.alpha if cfg.alpha is not None else default_alpha(prob)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            runs = list(ex.map(lambda r: _restart(prob, cfg, alpha, r), range(cfg.restarts)))
    else:
        runs = [_restart(prob, cfg, alpha, r) for r in range(cfg.restarts)]

    done = [(r, run) for r, run in enumerate(runs) if run is not None]
    if not done:
        raise SingularPoint("every restart hit a singular point")
    r_best, best = min(done, key=lambda it: (it[1][3], it[0]))
    objs, pairs, best_w, best_f, reason, f0 = best
    return PgdTrace(
        objective_per_iter=objs,
        critical_pairs=pairs,
        best_w=RealBeamMatrix(best_w, prob.power, {"restart": r_best, "alpha": alpha}),
        best_objective=best_f,
        stop_reason=reason,
        initial_objective=f0,
        restart_objectives=[run[3] for _, run in done],
        iterations=len(objs) - 1,
        restart_ws=[run[2] for _, run in done],
    )


def tune_gamma(sys: WiretapSystem, cons: Constellation, target: float,
               cfg: PgdConfig = PgdConfig(), bracket: tuple[float, float] = (0.0, 100.0),
               tol: float = 1e-3, max_steps: int = 30):
    """Bisect ``gamma`` so that Eve's lower bound at the PGD solution hits ``target``.

    Returns ``(gamma, achieved_bound, trace)``. If the lower end already
    meets the target, it is returned without bisection.
    """
    prob = embed_problem(sys, cons, cfg.structured)

    def run(gamma):
        tr = pgd_solve(sys, cons, _with(cfg, gamma=gamma))
        lb = eve_lower_bound(prob.h_e, tr.best_w.w_tilde, prob.symbols, prob.n_e)[0]
        return lb, tr

    lo, hi = bracket
    lb_lo, tr_lo = run(lo)
    if lb_lo >= target:
        return lo, lb_lo, tr_lo
    lb_hi, tr_hi = run(hi)
    if lb_hi < target:
        raise BracketFailure(
            f"Eve bound {lb_hi:.4g} at gamma={hi} does not reach target {target:.4g}"
        )
    gamma, lb, tr = hi, lb_hi, tr_hi
    for _ in range(max_steps):
        if abs(lb - target) <= tol:
            break
        gamma = 0.5 * (lo + hi)
        lb, tr = run(gamma)
        if lb > target:
            hi = gamma
        else:
            lo = gamma
    return gamma, lb, tr


def _with(cfg: PgdConfig, **kw) -> PgdConfig:
    from dataclasses import replace
    return replace(cfg, **kw)
