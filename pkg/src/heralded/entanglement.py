"""Negativity of bipartite pure states.

``negativity_closed`` is the two-branch formula in terms of the photon
amplitudes and the branch weight factor ``B``. ``schmidt_negativity`` works
for any pure bipartite amplitude matrix: for a pure state the trace norm of
the partial transpose is ``(sum_i s_i)**2`` with ``s_i`` the Schmidt
coefficients, so the negativity (normalized so a Bell pair scores 1) is
``(sum_i s_i)**2 - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotNormalized

NORM_TOL = 1e-9


@dataclass(frozen=True)
class NegativityResult:
    value: float
    schmidt_coeffs: tuple[float, ...]

    @property
    def rank(self) -> int:
        return sum(1 for s in self.schmidt_coeffs if s > 0.0)

    def to_dict(self) -> dict:
        return {"value": self.value, "schmidt_coeffs": list(self.schmidt_coeffs)}


def negativity_closed(a0: complex, a1: complex, B: float) -> float:
    x, y, b = abs(a0), abs(a1), abs(B)
    denom = x * x + y * y * b * b
    if denom == 0.0:
        return 0.0
    return min(1.0, 2.0 * x * y * b / denom)


def max_negativity_residual(a0: complex, a1: complex, B: float) -> float:
    """Signed ``|a0| - |a1| |B|``; zero exactly on the maximal-negativity set."""
    return abs(a0) - abs(a1) * abs(B)


def schmidt_negativity(state, tol: float = NORM_TOL) -> NegativityResult:
    """Negativity of a normalized pure bipartite state.

    ``state`` is either an amplitude matrix ``[i_A, i_B]`` or any object
    exposing ``coefficient_matrix()`` (hybrid and CV entangled states do).
    """
    if hasattr(state, "coefficient_matrix"):
        mat = state.coefficient_matrix()
    else:
        mat = np.asarray(getattr(state, "amps", state), dtype=complex)
    if mat.ndim != 2:
        raise NotNormalized("expected a bipartite amplitude matrix")
    s = np.linalg.svd(mat, compute_uv=False)
    nrm = float(np.sqrt(np.sum(s**2)))
    if abs(nrm * nrm - 1.0) > tol:
        raise NotNormalized(f"state has squared norm {nrm * nrm!r}")
    s = np.sort(s / nrm)[::-1]
    value = max(0.0, float(np.sum(s)) ** 2 - 1.0)
    return NegativityResult(value, tuple(float(x) for x in s))
