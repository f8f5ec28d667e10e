"""Binary antipodal beamforming by KKT case analysis.

The normalized problem is

    maximize ||H_B w||^2  s.t.  ||H_E w||^2 <= t,  ||w||^2 <= 1,

with ``t`` the Eve energy threshold from :func:`eve_threshold`. Candidates
come from three KKT cases: the power constraint alone active (an eigenvector
of ``H_B^H H_B``), the Eve constraint alone active (a generalized
eigenvector, rescaled onto the Eve boundary) and both active (a sweep over
the Eve multiplier ``lambda1``). The all-inactive case only yields interior
points and is skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .model import AntipodalSpec, BeamVector, WiretapSystem
from .numerics import canonical_phase, gen_herm_eig, herm_eig, q_inv, real_embed_matrix
from .sep import sep_antipodal

__all__ = [
    "Case",
    "KktConfig",
    "Candidate",
    "KktReport",
    "eve_threshold",
    "lambda1_upper_bound",
    "lambda1_bounds",
    "solve_case2",
    "solve_case3",
    "solve_case4",
    "solve_antipodal",
]


class Case(str, Enum):
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class KktConfig:
    sweep_points: int = 2000
    eq_tol: float = 1e-3
    refine: bool = True
    # "rescale": eigenvectors moved onto the Eve boundary (interior power)
    # "full-power": unit eigenvectors only, accepted if within eq_tol of it
    case3: str = "rescale"

    def __post_init__(self):
        if self.case3 not in ("rescale", "full-power"):
            raise ValueError(f"case3 must be 'rescale' or 'full-power', got {self.case3!r}")
        if self.sweep_points < 2:
            raise ValueError("sweep_points must be >= 2")
        if not self.eq_tol > 0:
            raise ValueError("eq_tol must be > 0")


@dataclass(frozen=True)
class Candidate:
    case: Case
    w_bar: np.ndarray
    lambda1: float
    lambda2: float
    sep_bob: float
    sep_eve: float
    refined: bool = False


@dataclass
class KktReport:
    case: Case
    lambda1: float
    lambda2: float
    w_bar: Optional[BeamVector]
    sep_bob: float
    sep_eve: float
    threshold: float
    lambda1_bound: float = math.nan
    lambda1_bound_printed: float = math.nan
    candidates: dict = field(default_factory=dict)
    sweep_trace: Optional[list] = None

    @property
    def feasible(self) -> bool:
        return self.case is not Case.INFEASIBLE


# ---------------------------------------------------------------------------
def eve_threshold(sys: WiretapSystem, spec: AntipodalSpec) -> float:
    """Bound on ``||H_E w_bar||^2`` equivalent to ``Eve SEP >= D``."""
    d = spec.eve_sep_min
    if d <= 0.0:
        raise ValueError("eve_sep_min = 0 puts no bound on Eve's energy (infinite threshold)")
    if d > 0.5:
        raise ValueError("eve_sep_min must not exceed 0.5")
    if d == 0.5:
        return 0.0
    root = math.sqrt(sys.n_e / (2.0 * sys.power)) * q_inv(d) / abs(spec.amplitude)
    return root * root


def _smallest_positive(values: np.ndarray, rel: float = 1e-10) -> float:
    top = float(np.max(values)) if len(values) else 0.0
    pos = values[values > rel * top] if top > 0 else values[:0]
    return float(np.min(pos)) if len(pos) else math.nan


def lambda1_bounds(sys: WiretapSystem) -> tuple[float, float]:
    """``(lmax(A_B)/lmin(A_E), lmin(A_B)/lmax(A_E))``.

    The first is the bound obtained from positive definiteness of
    ``A_B - lambda1 A_E``; the second is the interval printed in the
    algorithm listing. Only the first is used for the sweep.
    """
    eb = herm_eig(sys.gram_b).values
    ee = herm_eig(sys.gram_e).values
    lmin_e = _smallest_positive(ee)
    emax = float(ee[-1])
    derived = float(eb[-1]) / lmin_e if lmin_e > 0 else math.nan
    printed = float(eb[0]) / emax if emax > 0 else math.nan
    return derived, printed


def lambda1_upper_bound(sys: WiretapSystem) -> float:
    """Sweep limit for ``lambda1``: ``lmax(H_B^H H_B) / lmin(H_E^H H_E)``.

    A singular ``H_E^H H_E`` uses its smallest positive eigenvalue instead.
    """
    return lambda1_bounds(sys)[0]


# ---------------------------------------------------------------------------
def _cluster_rotate(values: np.ndarray, vectors: np.ndarray, gram_e: np.ndarray,
                    rel: float = 1e-10):
    """Within each cluster of (numerically) equal eigenvalues, rotate the
    basis so it diagonalizes ``gram_e`` restricted to that eigenspace."""
    vecs = vectors.copy()
    n = len(values)
    scale = max(float(np.max(np.abs(values))), 1e-300) if n else 1.0
    i = 0
    while i < n:
        j = i + 1
        while j < n and values[j] - values[i] <= rel * scale:
            j += 1
        if j - i > 1:
            u = vecs[:, i:j]
            sub = herm_eig(u.conj().T @ gram_e @ u)
            vecs[:, i:j] = u @ sub.vectors
        i = j
    return vecs


def _make_candidate(sys, spec, case, w_bar, lam1, lam2, refined=False) -> Candidate:
    w = math.sqrt(sys.power) * w_bar
    return Candidate(
        case=case,
        w_bar=w_bar,
        lambda1=float(lam1),
        lambda2=float(lam2),
        sep_bob=sep_antipodal(sys.h_b, w, spec.amplitude, sys.n_b),
        sep_eve=sep_antipodal(sys.h_e, w, spec.amplitude, sys.n_e),
        refined=refined,
    )


def _best(cands: list[Candidate]) -> Optional[Candidate]:
    if not cands:
        return None
    # Bob SEP ties are resolved by the Bob gain, which has full precision
    return min(cands, key=lambda c: (c.sep_bob, -c.lambda2 - c.lambda1))


def solve_case2(sys: WiretapSystem, spec: AntipodalSpec, cfg: KktConfig = KktConfig(),
                threshold: Optional[float] = None) -> Optional[Candidate]:
    """Power constraint active, Eve constraint strictly slack.

    Scans unit eigenvectors of ``H_B^H H_B`` with positive eigenvalue and
    keeps those whose Eve energy is below ``(1 - eq_tol) t``.
    """
    t = eve_threshold(sys, spec) if threshold is None else threshold
    a, b = sys.gram_b, sys.gram_e
    eig = herm_eig(a)
    vecs = _cluster_rotate(eig.values, eig.vectors, b)
    top = max(float(eig.values[-1]), 0.0)
    cands = []
    for lam, v in zip(eig.values, vecs.T):
        if lam <= 1e-12 * top or top == 0.0:
            continue
        eve = float(np.real(v.conj() @ b @ v))
        if math.isinf(t) or eve < (1.0 - cfg.eq_tol) * t:
            cands.append(_make_candidate(sys, spec, Case.CASE2, v, 0.0, lam))
    return _best(cands)


def _second_order_ok(a, b, lam1, w, tol=1e-9) -> bool:
    """Second-order necessary condition for a local maximizer with only the
    Eve constraint active: ``lam1*B - A`` must be PSD on the tangent space
    ``{u : Re(w^H B u) = 0}``."""
    m = real_embed_matrix(lam1 * b - a)
    m = 0.5 * (m + m.T)
    g = np.concatenate([(b @ w).real, (b @ w).imag])
    g /= np.linalg.norm(g)
    proj = np.eye(len(g)) - np.outer(g, g)
    k = proj @ m @ proj
    scale = np.linalg.norm(a) + lam1 * np.linalg.norm(b)
    return float(herm_eig(k).values[0]) >= -tol * scale


def solve_case3(sys: WiretapSystem, spec: AntipodalSpec, cfg: KktConfig = KktConfig(),
                threshold: Optional[float] = None) -> Optional[Candidate]:
    """Eve constraint active, power constraint strictly slack.

    Generalized eigenvectors of ``(H_B^H H_B, H_E^H H_E)`` are rescaled onto
    the Eve boundary; those with norm below ``1 - eq_tol`` that also pass the
    second-order necessary condition are kept.
    """
    t = eve_threshold(sys, spec) if threshold is None else threshold
    if not t > 0 or math.isinf(t):
        return None
    a, b = sys.gram_b, sys.gram_e
    gen = gen_herm_eig(a, b)
    cands = []
    for lam1, v in zip(gen.values, gen.vectors.T):
        if lam1 <= 0:
            continue
        he_v = float(np.linalg.norm(sys.h_e @ v))
        if he_v <= 0:
            continue
        if cfg.case3 == "full-power":
            w = v / np.linalg.norm(v)
            if abs(_eve_energy(b, w) - t) <= cfg.eq_tol * t:
                cands.append(_make_candidate(sys, spec, Case.CASE3, w, lam1, 0.0))
            continue
        w = v * math.sqrt(t) / he_v
        if np.linalg.norm(w) >= 1.0 - cfg.eq_tol:
            continue
        if not _second_order_ok(a, b, lam1, w):
            continue
        cands.append(_make_candidate(sys, spec, Case.CASE3, w, lam1, 0.0))
    return _best(cands)


def _branches(a, b, lam1):
    eig = herm_eig(a - lam1 * b)
    return eig.values, _cluster_rotate(eig.values, eig.vectors, b)


def _sweep_branches(a, b, lams):
    # one batched LAPACK call for the whole grid; ascending like herm_eig
    vals, vecs = np.linalg.eigh(a[None, :, :] - lams[:, None, None] * b[None, :, :])
    for k in range(len(lams)):
        yield vals[k], _cluster_rotate(vals[k], vecs[k], b)


def _eve_energy(b, v) -> float:
    return float(np.real(v.conj() @ b @ v))


def solve_case4(sys: WiretapSystem, spec: AntipodalSpec, cfg: KktConfig = KktConfig(),
                threshold: Optional[float] = None, trace: Optional[list] = None
                ) -> Optional[Candidate]:
    """Both constraints active: sweep ``lambda1`` over ``(0, bound)``.

    At each of ``sweep_points`` uniform grid points the unit eigenvectors of
    ``A_B - lambda1 A_E`` with positive eigenvalue are tested against the Eve
    equality. Grid points whose Eve energy lies within ``eq_tol * t`` below
    the threshold are candidates. When no grid point qualifies and
    ``cfg.refine`` is set, sign changes of the Eve residual along each
    eigenbranch are bisected down to a relative residual of 1e-10.
    """
    t = eve_threshold(sys, spec) if threshold is None else threshold
    if not t > 0 or math.isinf(t):
        return None
    a, b = sys.gram_b, sys.gram_e
    bound = lambda1_upper_bound(sys)
    if not (bound > 0 and math.isfinite(bound)):
        return None
    scale = float(np.linalg.norm(a)) + 1e-300
    grid = bound * np.arange(1, cfg.sweep_points + 1) / (cfg.sweep_points + 1)

    cands = []
    # residual table per branch index, including lambda1 = 0 for bracketing
    lams = np.concatenate([[0.0], grid])
    resid = np.full((len(lams), a.shape[0]), np.nan)
    for k, (lam1, (vals, vecs)) in enumerate(zip(lams, _sweep_branches(a, b, lams))):
        best_l2, best_r = math.nan, math.nan
        for idx, (lam2, v) in enumerate(zip(vals, vecs.T)):
            if lam2 <= 1e-12 * scale:
                continue
            r = _eve_energy(b, v) - t
            resid[k, idx] = r
            if lam1 > 0 and -cfg.eq_tol * t <= r <= 0.0:
                cands.append(_make_candidate(sys, spec, Case.CASE4, v, lam1, lam2))
            if not lam2 <= best_l2:
                best_l2, best_r = lam2, r
        if trace is not None and lam1 > 0:
            trace.append((float(lam1), float(best_l2), float(best_r)))

    if not cands and cfg.refine:
        for idx in range(a.shape[0]):
            col = resid[:, idx]
            for k in range(len(lams) - 1):
                r0, r1 = col[k], col[k + 1]
                if np.isnan(r0) or np.isnan(r1) or r0 * r1 > 0 or (r0 == 0 and r1 == 0):
                    continue
                root = _bisect_branch(a, b, t, idx, lams[k], lams[k + 1], r0, scale)
                if root is not None:
                    lam1, lam2, v = root
                    if lam1 > 0:
                        cands.append(_make_candidate(sys, spec, Case.CASE4, v, lam1, lam2, True))
    return _best(cands)


def _bisect_branch(a, b, t, idx, lo, hi, r_lo, scale, rtol=1e-10, max_iter=200):
    """Bisect the Eve residual of eigenbranch ``idx`` on ``[lo, hi]``.

    Returns the endpoint on the feasible side (residual <= 0).
    """
    feas = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        vals, vecs = _branches(a, b, mid)
        lam2, v = vals[idx], vecs[:, idx]
        if lam2 <= 1e-12 * scale:
            return None
        r = _eve_energy(b, v) - t
        if r <= 0:
            feas = (mid, float(lam2), v)
        if abs(r) <= rtol * t and r <= 0:
            return feas
        if (r > 0) == (r_lo > 0):
            lo, r_lo = mid, r
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(hi, 1.0):
            break
    return feas


# ---------------------------------------------------------------------------
def solve_antipodal(sys: WiretapSystem, spec: AntipodalSpec,
                    cfg: KktConfig = KktConfig(), keep_trace: bool = False) -> KktReport:
    """Run Cases 2-4 and return the candidate with the smallest Bob SEP."""
    sys.check()
    derived, printed = lambda1_bounds(sys)
    if spec.eve_sep_min == 0.0:
        t = math.inf  # Eve constraint is vacuous
    else:
        t = eve_threshold(sys, spec)
    trace = [] if keep_trace else None
    found = {
        Case.CASE2: solve_case2(sys, spec, cfg, t),
        Case.CASE3: solve_case3(sys, spec, cfg, t),
        Case.CASE4: solve_case4(sys, spec, cfg, t, trace),
    }
    best = _best([c for c in found.values() if c is not None])
    if best is None:
        return KktReport(Case.INFEASIBLE, math.nan, math.nan, None, math.nan, math.nan, t,
                         derived, printed, found, trace)
    w_bar = BeamVector(canonical_phase(best.w_bar), sys.power)
    return KktReport(best.case, best.lambda1, best.lambda2, w_bar, best.sep_bob,
                     best.sep_eve, t, derived, printed, found, trace)
