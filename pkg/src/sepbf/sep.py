"""Closed-form symbol error probabilities and the secrecy rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Constellation, WiretapSystem
from .numerics import q

__all__ = [
    "sep_antipodal",
    "pair_differences",
    "pairwise_q",
    "sep_union_bound",
    "eve_lower_bound",
    "SecrecyRate",
    "secrecy_rate",
]


def _check_dims(h: np.ndarray, w: np.ndarray) -> None:
    if h.shape[1] != w.shape[0]:
        raise ValueError(f"dimension mismatch: H is {h.shape}, W has {w.shape[0]} rows")


def sep_antipodal(h, w, a, n0: float) -> float:
    """``Q(||H w a|| / sqrt(n0/2))`` for symbols ``+-a`` sent along ``w``."""
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    w = np.asarray(w, dtype=complex).ravel()
    _check_dims(h, w[:, None])
    if n0 <= 0:
        raise ValueError("noise power must be positive")
    return q(np.linalg.norm(h @ w) * abs(a) / math.sqrt(n0 / 2.0))


def pair_differences(symbols: np.ndarray):
    """Ordered pairs ``(i, j)``, ``i != j``, in lexicographic order, and the
    matching difference vectors ``s_i - s_j`` as columns."""
    m = symbols.shape[0]
    pairs = [(i, j) for i in range(m) for j in range(m) if i != j]
    diffs = np.stack([symbols[i] - symbols[j] for i, j in pairs], axis=1)
    return pairs, diffs


def pairwise_q(h, w_mat, symbols, n0: float) -> tuple[list, np.ndarray]:
    """Pairwise error terms ``Q(||H W (s_i - s_j)|| / (2 sqrt(n0/2)))``.

    Works for complex (H, W, s) and for their real embeddings alike.
    """
    h = np.atleast_2d(np.asarray(h))
    w_mat = np.asarray(w_mat)
    if w_mat.ndim == 1:
        w_mat = w_mat[:, None]
    symbols = np.asarray(symbols)
    if symbols.ndim == 1:
        symbols = symbols[:, None]
    _check_dims(h, w_mat)
    if w_mat.shape[1] != symbols.shape[1]:
        raise ValueError(
            f"dimension mismatch: W has {w_mat.shape[1]} columns, symbols have length {symbols.shape[1]}"
        )
    pairs, diffs = pair_differences(symbols)
    dist = np.linalg.norm(h @ (w_mat @ diffs), axis=0)
    return pairs, q(dist / (2.0 * math.sqrt(n0 / 2.0)))


def _symbols(cons) -> np.ndarray:
    return cons.symbols if isinstance(cons, Constellation) else np.asarray(cons)


def sep_union_bound(h, w_mat, cons, n0: float) -> float:
    """``(1/M) sum_i sum_{j != i} Q(...)``; lies in ``[0, M - 1]``."""
    symbols = _symbols(cons)
    _, terms = pairwise_q(h, w_mat, symbols, n0)
    return float(np.sum(terms) / symbols.shape[0])


def eve_lower_bound(h_e, w_mat, cons, n_e: float) -> tuple[float, tuple[int, int]]:
    """Smallest pairwise term and its (0-based) ordered pair.

    Ties resolve to the lexicographically smallest ``(i, j)``, which is what
    ``argmin`` over the lexicographic pair list gives.
    """
    pairs, terms = pairwise_q(h_e, w_mat, _symbols(cons), n_e)
    k = int(np.argmin(terms))
    return float(terms[k]), pairs[k]


@dataclass(frozen=True)
class SecrecyRate:
    rate: float
    c_b: float
    c_e: float


def _log2det_eye_plus(h: np.ndarray, q_a: np.ndarray) -> float:
    m = np.eye(h.shape[0]) + h @ q_a @ h.conj().T
    sign, logdet = np.linalg.slogdet(0.5 * (m + m.conj().T))
    return float(logdet / math.log(2.0))


def secrecy_rate(sys: WiretapSystem, q_a, scale: float = 1.0) -> SecrecyRate:
    """``log2|I + H_B Q H_B^H| - log2|I + H_E Q H_E^H|`` evaluated verbatim.

    No noise normalization is applied; pass ``scale`` (e.g. ``1/N``) to
    pre-scale the input covariance if a normalized rate is wanted.
    """
    q_a = np.asarray(q_a, dtype=complex) * scale
    herm = 0.5 * (q_a + q_a.conj().T)
    if np.linalg.norm(q_a - herm) > 1e-10 * max(1.0, np.linalg.norm(q_a)):
        raise ValueError("input covariance must be Hermitian")
    if np.linalg.eigvalsh(herm).min() < -1e-10 * max(1.0, np.linalg.norm(herm)):
        raise ValueError("input covariance must be positive semidefinite")
    c_b = _log2det_eye_plus(sys.h_b, herm)
    c_e = _log2det_eye_plus(sys.h_e, herm)
    return SecrecyRate(c_b - c_e, c_b, c_e)
