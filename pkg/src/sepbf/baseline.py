"""SINR-based beamforming baseline (generalized eigenvector, full power)."""

from __future__ import annotations

import math

import numpy as np

from .model import BeamVector, WiretapSystem
from .numerics import canonical_phase, gen_herm_eig

__all__ = ["DegeneratePencil", "sinr_bf"]


class DegeneratePencil(ValueError):
    pass


def sinr_bf(sys: WiretapSystem) -> BeamVector:
    """Maximize ``||H_B w||^2 / ||H_E w||^2`` and scale to ``||w||^2 = P``.

    With ``K_E <= N`` the top generalized eigenvector of
    ``(H_B^H H_B, H_E^H H_E)`` is used; directions in ``null(H_E)`` with
    positive Bob gain count as infinite eigenvalues and win outright. With
    ``K_E > N`` the bottom eigenvector of the reversed pencil is used.
    """
    a, b = sys.gram_b, sys.gram_e
    if np.linalg.norm(a) == 0 and np.linalg.norm(b) == 0:
        raise DegeneratePencil("both channels vanish")
    k_e, n = sys.h_e.shape
    if k_e <= n:
        gen = gen_herm_eig(a, b)
        if gen.infinite_vectors.shape[1]:
            w = gen.infinite_vectors[:, 0]
        elif len(gen):
            w = gen.vectors[:, -1]
        else:
            raise DegeneratePencil("pencil has no finite or infinite eigenvector")
    else:
        gen = gen_herm_eig(b, a)
        if len(gen):
            w = gen.vectors[:, 0]
        elif gen.infinite_vectors.shape[1]:
            raise DegeneratePencil("H_B^H H_B vanishes on every direction Eve observes")
        else:
            raise DegeneratePencil("pencil has no finite eigenvector")
    if np.vdot(w, a @ w).real <= 0 and np.vdot(w, b @ w).real <= 0:
        raise DegeneratePencil("both quadratic forms vanish on the selected vector")
    w = canonical_phase(w / np.linalg.norm(w))
    return BeamVector(w, sys.power)


def full_power_w(beam: BeamVector) -> np.ndarray:
    return math.sqrt(beam.power) * beam.w_bar
