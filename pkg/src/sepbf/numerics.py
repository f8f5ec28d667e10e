"""Scalar and small dense matrix kernels.

Q-function pair, a cyclic Jacobi eigensolver for Hermitian matrices, the
Hermitian-definite generalized eigenproblem (with deflation of a singular
right-hand matrix), PSD cone projection and the complex-to-real embeddings
used by the M-ary solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "EigenPairs",
    "GenEigenPairs",
    "q",
    "q_inv",
    "q_prime",
    "herm_eig",
    "gen_herm_eig",
    "psd_project",
    "real_embed_matrix",
    "real_embed_vector",
    "unembed_matrix",
    "canonical_phase",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Q-function
# ---------------------------------------------------------------------------
def q(x):
    """Gaussian tail probability Q(x) = P(Z > x), Z ~ N(0, 1).

    Accepts scalars or arrays. ``erfc`` keeps full relative precision in the
    upper tail, which matters for the 1e-6 level SEPs of the antipodal setups.
    """
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def q_prime(x):
    """Derivative of Q, i.e. minus the standard normal density."""
    x = np.asarray(x, dtype=float)
    out = -_INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if np.ndim(out) == 0 else out


def q_inv(p: float, newton_steps: int = 3) -> float:
    """Inverse of :func:`q` on (0, 1).

    Starts from the inverse normal CDF and polishes with Newton steps on
    ``q(x) - p`` so that ``q(q_inv(p))`` matches ``p`` to ~1e-14 relative.
    """
    p = float(p)
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise ValueError(f"q_inv: probability must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    x = float(-special.ndtri(p))
    for _ in range(newton_steps):
        d = q_prime(x)
        if d == 0.0:
            break
        step = (q(x) - p) / d
        x -= step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


# ---------------------------------------------------------------------------
# Eigensolvers
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EigenPairs:
    values: np.ndarray   # ascending, real
    vectors: np.ndarray  # columns, unit norm, same order

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class GenEigenPairs:
    values: np.ndarray   # finite generalized eigenvalues, ascending
    vectors: np.ndarray  # columns, unit 2-norm
    singular: bool = False
    # orthonormal basis of the infinite-eigenvalue directions (null(B) minus
    # the common null space), columns sorted by decreasing A-gain
    infinite_vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))

    def __len__(self):
        return len(self.values)


def _as_square(a, name="A") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _off_norm(a: np.ndarray) -> float:
    d = np.diag(np.diag(a))
    return float(np.linalg.norm(a - d))


def herm_eig(a, tol: float = 1e-14, max_sweeps: int = 100) -> EigenPairs:
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary, then applies the classical real Jacobi rotation.
    Sweeps stop once ``off(A) <= tol * ||A||_F``.
    """
    a = _symmetrize(_as_square(a).astype(complex))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    if n == 0:
        return EigenPairs(np.zeros(0), np.zeros((0, 0), complex))
    if scale == 0.0:
        return EigenPairs(np.zeros(n), v)

    for _ in range(max_sweeps):
        if _off_norm(a) <= tol * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                mag = abs(apr)
                if mag <= 1e-300 or mag <= 1e-18 * scale:
                    continue
                ph = apr / mag
                # a <- D^H a D with D = diag(.., conj(ph) at r, ..)
                a[:, r] *= np.conj(ph)
                a[r, :] *= ph
                v[:, r] *= np.conj(ph)
                app = a[p, p].real
                arr = a[r, r].real
                theta = (arr - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [p, r]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.T @ a[idx, :]
                a[p, r] = a[r, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    vecs = v[:, order]
    vecs /= np.linalg.norm(vecs, axis=0)
    return EigenPairs(w[order], vecs)


def _psd_factor(b: np.ndarray, rank_tol: float):
    """Eigen-split of a PSD matrix into range and null bases."""
    eb = herm_eig(b)
    smax = max(float(np.max(np.abs(eb.values))), 0.0) if len(eb) else 0.0
    keep = eb.values > rank_tol * smax if smax > 0 else np.zeros(len(eb), bool)
    return eb.values[keep], eb.vectors[:, keep], eb.vectors[:, ~keep]


def gen_herm_eig(a, b, rank_tol: float = 1e-10) -> GenEigenPairs:
    """Solve ``A v = lambda B v`` for Hermitian PSD ``A`` and ``B``.

    Positive definite ``B`` is reduced through its Cholesky factor. When
    ``B`` is singular (eigenvalues below ``rank_tol * sigma_max``), the null
    space of ``B`` is eliminated by a Schur complement, directions shared with
    ``null(A)`` are dropped, and only the finite pairs are returned with
    ``singular=True``. The infinite-eigenvalue directions are exposed through
    ``infinite_vectors``.
    """
    a = _symmetrize(_as_square(a, "A").astype(complex))
    b = _symmetrize(_as_square(b, "B").astype(complex))
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: A is {a.shape}, B is {b.shape}")
    n = a.shape[0]

    sig, ur, u0 = _psd_factor(b, rank_tol)
    if u0.shape[1] == 0:
        low = np.linalg.cholesky(b)
        linv = np.linalg.inv(low)
        c = linv @ a @ linv.conj().T
        ec = herm_eig(c)
        vecs = linv.conj().T @ ec.vectors
        vecs /= np.linalg.norm(vecs, axis=0)
        return GenEigenPairs(ec.values, vecs, False, np.zeros((n, 0), complex))

    # null(B) block of A; its null space is the common null space of A and B
    a00 = u0.conj().T @ a @ u0
    e00 = herm_eig(a00)
    amax = float(np.linalg.norm(a, 2))
    pos = e00.values > rank_tol * max(amax, 1e-300)
    inf_vecs = (u0 @ e00.vectors[:, pos])[:, ::-1]
    y0 = u0 @ e00.vectors[:, pos]  # null(B) part where A is nonsingular

    if ur.shape[1] == 0:
        return GenEigenPairs(np.zeros(0), np.zeros((n, 0), complex), True, inf_vecs)

    # v = ur x + y0 z ; second block row gives z = -(y0^H a y0)^-1 y0^H a ur x
    arr = ur.conj().T @ a @ ur
    if y0.shape[1]:
        a0r = y0.conj().T @ a @ ur
        a00p = y0.conj().T @ a @ y0
        coupling = np.linalg.solve(a00p, a0r)
        schur = arr - a0r.conj().T @ coupling
    else:
        coupling = np.zeros((0, ur.shape[1]), complex)
        schur = arr
    d = 1.0 / np.sqrt(sig)
    c = _symmetrize(d[:, None] * schur * d[None, :])
    ec = herm_eig(c)
    x = d[:, None] * ec.vectors
    vecs = ur @ x - (y0 @ (coupling @ x) if y0.shape[1] else 0.0)
    vecs = np.asarray(vecs)
    vecs /= np.linalg.norm(vecs, axis=0)
    return GenEigenPairs(ec.values, vecs, True, inf_vecs)


def psd_project(s) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip the spectrum at zero."""
    s = _symmetrize(_as_square(s))
    w, u = np.linalg.eigh(s)
    if w.min() >= 0.0:
        return s
    w = np.clip(w, 0.0, None)
    return _symmetrize((u * w) @ u.conj().T)


# ---------------------------------------------------------------------------
# Real embeddings
# ---------------------------------------------------------------------------
def real_embed_matrix(h) -> np.ndarray:
    """``[[Re H, -Im H], [Im H, Re H]]``."""
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def real_embed_vector(s) -> np.ndarray:
    """Stack ``[Re s; Im s]``; a 2-D input embeds column by column."""
    s = np.asarray(s, dtype=complex)
    return np.concatenate([s.real, s.imag], axis=0)


def unembed_matrix(wt) -> np.ndarray:
    """Complex matrix from the left block column of a structured embedding."""
    wt = np.asarray(wt, dtype=float)
    n, l = wt.shape[0] // 2, wt.shape[1] // 2
    return wt[:n, :l] + 1j * wt[n:, :l]


def canonical_phase(w) -> np.ndarray:
    """Rotate ``w`` so its first nonzero entry is real and nonnegative."""
    w = np.asarray(w, dtype=complex)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0:
        return w.copy()
    for z in w:
        if abs(z) > 1e-12 * scale:
            return w * (abs(z) / z)
    return w.copy()
