"""Alternative design: maximize Eve's SEP under a cap on Bob's SEP.

The equivalent problem ``min ||H_E w||^2 s.t. ||H_B w||^2 >= t_B,
||w||^2 <= P`` is lifted to ``A = w w^H`` and the rank constraint dropped.
The resulting SDP is solved with ADMM (a projection onto the two trace
halfspaces alternating with a PSD cone projection) and a beamvector is
recovered by random-phase sampling of the relaxed solution.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import WiretapSystem
from .numerics import herm_eig, psd_project, q_inv
from .rng import BLOCK, blocks, substream

log = logging.getLogger(__name__)

__all__ = [
    "SdrInfeasible",
    "NoFeasibleSample",
    "SdrConfig",
    "SdrSolution",
    "bob_threshold",
    "solve_sdr",
    "randomize",
    "raw_samples",
]


class SdrInfeasible(ValueError):
    pass


class NoFeasibleSample(RuntimeError):
    pass


@dataclass(frozen=True)
class SdrConfig:
    tol: float = 1e-6
    max_iters: int = 50_000
    rho: float = 1.0
    relax: float = 1.6


@dataclass
class SdrSolution:
    a_star: np.ndarray
    objective: float
    rank_est: int
    w_hat: Optional[np.ndarray] = None
    solver_stats: dict = field(default_factory=dict)


def bob_threshold(sys: WiretapSystem, d: float, amplitude: complex = 1.0) -> float:
    """Lower bound on ``||H_B w||^2`` equivalent to ``Bob SEP <= D``."""
    if not (0.0 < d <= 0.5):
        raise ValueError(f"Bob SEP cap must lie in (0, 0.5], got {d}")
    if d == 0.5:
        return 0.0
    root = math.sqrt(sys.n_b / 2.0) * q_inv(d) / abs(amplitude)
    return root * root


def _inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.real(np.vdot(x, y)))


def _project_halfspaces(y, normals, offsets):
    """Euclidean projection onto ``{x : <a_i, x> <= b_i}`` for two halfspaces
    by active-set enumeration."""
    viol = [_inner(a, y) - b for a, b in zip(normals, offsets)]
    if max(viol) <= 0:
        return y
    best = None
    for active in ([0], [1], [0, 1]):
        gram = np.array([[_inner(normals[i], normals[j]) for j in active] for i in active])
        rhs = np.array([viol[i] for i in active])
        try:
            mu = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.any(mu < -1e-14):
            continue
        x = y - sum(m * normals[i] for m, i in zip(mu, active))
        ok = all(_inner(a, x) - b <= 1e-12 * (1 + abs(b)) for a, b in zip(normals, offsets))
        if ok:
            dist = np.linalg.norm(x - y)
            if best is None or dist < best[0]:
                best = (dist, x)
    if best is None:
        raise SdrInfeasible("trace constraints have no common point")
    return best[1]


def solve_sdr(sys: WiretapSystem, t_b: float, cfg: SdrConfig = SdrConfig()) -> SdrSolution:
    """Minimize ``Tr(A_E A)`` s.t. ``Tr(A_B A) >= t_b``, ``Tr A <= P``, ``A >= 0``.

    Works on ``X = A / P`` with the objective normalized to unit Frobenius
    norm; residuals in ``solver_stats`` refer to these scaled variables.
    Non-convergence within ``max_iters`` is logged and flagged in
    ``solver_stats['converged']``; the last iterate is returned.
    """
    a_b, a_e = sys.gram_b, sys.gram_e
    n = a_b.shape[0]
    lam_max = float(herm_eig(a_b).values[-1])
    if t_b > sys.power * lam_max * (1 + 1e-12):
        raise SdrInfeasible(
            f"t_b = {t_b:.6g} exceeds P * lambda_max(H_B^H H_B) = {sys.power * lam_max:.6g}"
        )
    cn = float(np.linalg.norm(a_e)) or 1.0
    gn = float(np.linalg.norm(a_b)) or 1.0
    c = a_e / cn
    normals = [-a_b / gn, np.eye(n, dtype=complex)]
    offsets = [-t_b / (sys.power * gn), 1.0]

    rho, alpha = cfg.rho, cfg.relax
    z = np.eye(n, dtype=complex) / n
    u = np.zeros((n, n), complex)
    r_p = r_d = math.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        x = _project_halfspaces(z - u - c / rho, normals, offsets)
        xh = alpha * x + (1 - alpha) * z
        z_old = z
        z = psd_project(xh + u)
        u = u + xh - z
        r_p = float(np.linalg.norm(x - z))
        r_d = float(rho * np.linalg.norm(z - z_old))
        if r_p <= cfg.tol and r_d <= cfg.tol:
            break
        if r_p > 10 * r_d:
            rho *= 2.0
            u /= 2.0
        elif r_d > 10 * r_p:
            rho /= 2.0
            u *= 2.0
    converged = r_p <= cfg.tol and r_d <= cfg.tol
    if not converged:
        log.warning("SDR solver stopped after %d iterations (r_p=%.2e, r_d=%.2e)", it, r_p, r_d)

    a_star = _polish(sys.power * z, a_b, t_b, sys.power)
    ev = herm_eig(a_star).values
    top = max(float(ev[-1]), 0.0)
    rank = int(np.sum(ev > 1e-8 * top)) if top > 0 else 0
    stats = {
        "iterations": it,
        "primal_residual": r_p,
        "dual_residual": r_d,
        "converged": converged,
        "rho": rho,
        "bob_gain": _inner(a_b, a_star),
        "trace": float(np.real(np.trace(a_star))),
    }
    return SdrSolution(a_star, _inner(a_e, a_star), rank, None, stats)


def _polish(a, a_b, t_b, power):
    """Remove the O(tol) infeasibility left by ADMM.

    Clip the trace to ``P``, then cover any Bob deficit by mixing in
    ``P v v^H`` with ``v`` the top eigenvector of ``A_B`` (strictly feasible
    whenever ``t_b < P lambda_max``).
    """
    a = 0.5 * (a + a.conj().T)
    tr = float(np.real(np.trace(a)))
    if tr > power:
        a = a * (power / tr)
    deficit = t_b - _inner(a_b, a)
    if deficit > 0:
        eb = herm_eig(a_b)
        v = eb.vectors[:, -1]
        anchor = power * np.outer(v, v.conj())
        surplus = power * float(eb.values[-1]) - t_b
        if surplus > 0:
            theta = min(1.0, deficit / (deficit + surplus) * (1 + 1e-9))
            a = (1 - theta) * a + theta * anchor
    return 0.5 * (a + a.conj().T)


def _factor(a_star: np.ndarray) -> np.ndarray:
    eig = herm_eig(a_star)
    return eig.vectors * np.sqrt(np.clip(eig.values, 0.0, None))


def raw_samples(a_star: np.ndarray, count: int, seed: int, start: int = 0) -> np.ndarray:
    """Draws ``w_l = U Sigma^{1/2} e_l`` for ``l`` in ``[start, start + count)``.

    Draw ``l`` lives in block ``l // BLOCK`` of substream ``(seed, 0, .)``, so
    any index range reproduces the same vectors. Returned as rows.
    """
    f = _factor(np.asarray(a_star, dtype=complex))
    n = f.shape[0]
    out = np.empty((count, n), complex)
    first, last = start // BLOCK, (start + count - 1) // BLOCK
    pos = 0
    for b in range(first, last + 1):
        theta = substream(seed, 0, b).uniform(0.0, 2.0 * math.pi, size=(BLOCK, n))
        lo = max(start - b * BLOCK, 0)
        hi = min(start + count - b * BLOCK, BLOCK)
        e = np.exp(1j * theta[lo:hi])
        out[pos:pos + hi - lo] = e @ f.T
        pos += hi - lo
    return out


def _scale_to_feasible(w, a_b, t_b, power):
    """Scale ``w`` onto the feasible set, or return None.

    The admissible squared scalings form ``[t_b / bob, P / |w|^2]``. A
    violated Bob constraint is met with the smallest admissible factor, an
    exceeded power budget with the largest.
    """
    bob = float(np.real(w.conj() @ a_b @ w))
    pw = float(np.real(w.conj() @ w))
    if pw == 0.0:
        return None if t_b > 0 else w
    lo = t_b / bob if bob > 0 else (0.0 if t_b == 0 else math.inf)
    hi = power / pw
    if lo > hi * (1 + 1e-12):
        return None
    if lo > 1.0:
        c2 = lo
    elif hi < 1.0:
        c2 = hi
    else:
        return w
    return w * math.sqrt(c2)


def randomize(sol: SdrSolution, sys: WiretapSystem, t_b: float, n_draws: int,
              seed: int = 0, threads: int = 1) -> np.ndarray:
    """Random-phase rounding of the relaxed solution.

    Returns the feasible scaled draw with the smallest ``||H_E w||^2``; ties
    keep the earliest draw. Also stores it in ``sol.w_hat``.
    """
    if n_draws < 1:
        raise ValueError("need at least one draw")
    a_b, a_e = sys.gram_b, sys.gram_e

    def run(chunk):
        _, start, size = chunk
        best = (math.inf, -1, None)
        for k, w in enumerate(raw_samples(sol.a_star, size, seed, start)):
            ws = _scale_to_feasible(w, a_b, t_b, sys.power)
            if ws is None:
                continue
            obj = float(np.real(ws.conj() @ a_e @ ws))
            if obj < best[0]:
                best = (obj, start + k, ws)
        return best

    chunks = list(blocks(n_draws))
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, chunks))
    else:
        results = [run(ch) for ch in chunks]
    obj, idx, w = min(results, key=lambda r: (r[0], r[1]))
    if w is None:
        raise NoFeasibleSample(f"no feasible sample among {n_draws} draws")
    sol.w_hat = w
    return w
