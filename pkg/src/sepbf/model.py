"""Domain value types shared by every solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .numerics import canonical_phase

__all__ = [
    "WiretapSystem",
    "AntipodalSpec",
    "Constellation",
    "BeamVector",
    "RealBeamMatrix",
    "validate_system",
    "QAM4_SYMBOLS",
]


def _cmatrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim == 1:
        a = a[None, :]
    return a


@dataclass(frozen=True)
class WiretapSystem:
    """Main channel ``h_b`` (K_B x N), eavesdropper channel ``h_e`` (K_E x N),
    noise powers and the transmit power budget."""

    h_b: np.ndarray
    h_e: np.ndarray
    n_b: float
    n_e: float
    power: float

    def __post_init__(self):
        object.__setattr__(self, "h_b", _cmatrix(self.h_b))
        object.__setattr__(self, "h_e", _cmatrix(self.h_e))
        for name in ("n_b", "n_e", "power"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def n_tx(self) -> int:
        return self.h_b.shape[1]

    @property
    def gram_b(self) -> np.ndarray:
        return self.h_b.conj().T @ self.h_b

    @property
    def gram_e(self) -> np.ndarray:
        return self.h_e.conj().T @ self.h_e

    def with_power(self, power: float) -> "WiretapSystem":
        return WiretapSystem(self.h_b, self.h_e, self.n_b, self.n_e, power)

    def check(self) -> "WiretapSystem":
        problems = validate_system(self)
        if problems:
            raise ValueError("invalid WiretapSystem: " + "; ".join(problems))
        return self


def validate_system(sys: WiretapSystem) -> list[str]:
    """Return the violated invariants of ``sys`` (empty list means ok)."""
    problems = []
    hb, he = np.asarray(sys.h_b), np.asarray(sys.h_e)
    if hb.ndim != 2 or he.ndim != 2:
        problems.append("h_b and h_e must be 2-D matrices")
    elif hb.shape[1] != he.shape[1]:
        problems.append(
            f"column count mismatch: h_b has {hb.shape[1]} columns, h_e has {he.shape[1]}"
        )
    if not (np.all(np.isfinite(hb)) and np.all(np.isfinite(he))):
        problems.append("channel entries must be finite")
    for name in ("n_b", "n_e", "power"):
        val = getattr(sys, name)
        if not (math.isfinite(val) and val > 0):
            problems.append(f"{name} must be finite and > 0, got {val!r}")
    return problems


@dataclass(frozen=True)
class AntipodalSpec:
    amplitude: complex = 1.0
    eve_sep_min: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if abs(self.amplitude) == 0:
            raise ValueError("amplitude must be nonzero")
        if not (0.0 <= self.eve_sep_min <= 0.5):
            raise ValueError(f"eve_sep_min must lie in [0, 0.5], got {self.eve_sep_min}")


@dataclass(frozen=True)
class Constellation:
    """M complex L-vectors, stored as rows of ``symbols`` (M x L)."""

    symbols: np.ndarray
    eve_lb_min: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=complex)
        if s.ndim == 1:
            s = s[:, None]
        object.__setattr__(self, "symbols", s)
        if s.shape[0] < 2:
            raise ValueError("constellation needs at least two symbols")
        for i, j in combinations(range(s.shape[0]), 2):
            if np.allclose(s[i], s[j], rtol=0, atol=0):
                raise ValueError(f"symbols {i + 1} and {j + 1} coincide")
        if self.eve_lb_min < 0:
            raise ValueError("eve_lb_min must be nonnegative")

    @property
    def m(self) -> int:
        return self.symbols.shape[0]

    @property
    def length(self) -> int:
        return self.symbols.shape[1]

    def check_against(self, sys: WiretapSystem) -> None:
        k = min(sys.h_b.shape[0], sys.h_e.shape[0])
        if self.length > min(sys.n_tx, k):
            raise ValueError(
                f"symbol length L={self.length} exceeds min(N, K)={min(sys.n_tx, k)}"
            )


# 4-ary constellation used throughout the M-ary experiments
QAM4_SYMBOLS = np.array(
    [
        [1 + 1j, 1 - 1j],
        [-1 - 1j, 1 - 1j],
        [-1 + 1j, 1 - 1j],
        [-1 - 1j, -1 + 1j],
    ]
)


@dataclass(frozen=True)
class BeamVector:
    """Unit-ball beamvector ``w_bar``; the transmitted one is ``sqrt(P) w_bar``."""

    w_bar: np.ndarray
    power: float

    def __post_init__(self):
        w = np.asarray(self.w_bar, dtype=complex).ravel()
        if np.linalg.norm(w) > 1 + 1e-9:
            raise ValueError(f"|w_bar| = {np.linalg.norm(w):.12g} exceeds 1")
        object.__setattr__(self, "w_bar", w)

    @property
    def w(self) -> np.ndarray:
        return math.sqrt(self.power) * self.w_bar

    @classmethod
    def from_w(cls, w, power: float) -> "BeamVector":
        return cls(np.asarray(w, dtype=complex) / math.sqrt(power), power)

    def canonical(self) -> "BeamVector":
        return BeamVector(canonical_phase(self.w_bar), self.power)


@dataclass(frozen=True)
class RealBeamMatrix:
    w_tilde: np.ndarray
    power: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        wt = np.asarray(self.w_tilde, dtype=float)
        object.__setattr__(self, "w_tilde", wt)
        if np.sum(wt * wt) > self.power + 1e-9:
            raise ValueError("Tr(W W^T) exceeds the power budget")
