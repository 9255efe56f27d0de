"""Numerical heralding pipeline.

Mode 1 holds the squeezed vacuum, modes 2 and 3 share the delocalized
photon. The beam splitter mixes modes 1 and 2, mode 2 is measured, and the
surviving mode-1 (CV) / mode-3 (DV) state is split by the DV occupation into
two CV branches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .entanglement import schmidt_negativity
from .errors import (
    InvalidParameter,
    NotNormalized,
    NumericalError,
    OutcomeBeyondCutoff,
    ZeroProbabilityOutcome,
)
from .fock import (
    TAIL_EPS,
    DelocalizedPhoton,
    FockAmplitudes,
    ThreeModeAmplitudes,
    TwoModeAmplitudes,
    _Amplitudes,
    choose_cutoff,
    smsv_amplitudes,
)
from .interferometer import BeamSplitter, apply_bs

PARITY_TOL = 1e-13


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True, eq=False)
class HybridState:
    """``c_psi |psi>|1> + c_phi |phi>|0>`` with normalized CV branches.

    A branch whose weight is exactly zero carries a zero vector; this only
    happens in degenerate corners such as an unsqueezed input.
    """

    c_psi: complex
    psi: FockAmplitudes
    c_phi: complex
    phi: FockAmplitudes

    def __post_init__(self):
        total = abs(self.c_psi) ** 2 + abs(self.c_phi) ** 2
        if abs(total - 1.0) > 1e-12:
            raise NotNormalized(f"branch weights have squared norm {total!r}")

    @property
    def dim(self) -> int:
        return max(self.psi.cutoff, self.phi.cutoff) + 1

    def coefficient_matrix(self) -> np.ndarray:
        """Amplitudes ``[n_cv, n_dv]`` with the DV mode in ``{|0>, |1>}``."""
        out = np.zeros((self.dim, 2), dtype=complex)
        out[: self.phi.cutoff + 1, 0] = self.c_phi * self.phi.amps
        out[: self.psi.cutoff + 1, 1] = self.c_psi * self.psi.amps
        return out

    def to_dict(self) -> dict:
        return {
            "c_psi": _complex_pair(self.c_psi),
            "c_phi": _complex_pair(self.c_phi),
            "psi": self.psi.to_dict(),
            "phi": self.phi.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class HeraldRecord:
    p: int
    state: HybridState | None
    probability: float
    negativity: float
    zero_probability: bool = False

    def __post_init__(self):
        if self.p < 0:
            raise InvalidParameter("outcome must be >= 0")
        if not (0.0 <= self.probability <= 1.0 + 1e-12):
            raise NumericalError(f"probability {self.probability!r} outside [0, 1]")

    def to_dict(self) -> dict:
        state = self.state.to_dict() if self.state is not None else {
            "c_psi": [0.0, 0.0], "c_phi": [0.0, 0.0], "psi": None, "phi": None,
        }
        return {
            "p": self.p,
            "probability": self.probability,
            "negativity": self.negativity,
            "c_psi": state["c_psi"],
            "c_phi": state["c_phi"],
            "psi": state["psi"],
            "phi": state["phi"],
            "zero_probability": self.zero_probability,
        }


class Projection(NamedTuple):
    state: _Amplitudes
    probability: float
    zero_probability: bool


_LOWER = {2: FockAmplitudes, 3: TwoModeAmplitudes}


def project_photon_number(state: _Amplitudes, mode: int, p: int) -> Projection:
    """Condition ``state`` on finding ``p`` photons in ``mode``.

    Returns the renormalized slice and its probability. A zero-probability
    outcome gives an all-zero slice, a ``ZeroProbabilityOutcome`` warning
    and ``zero_probability=True``.
    """
    if state.ndim not in _LOWER:
        raise InvalidParameter("projection needs a two- or three-mode state")
    if not 0 <= mode < state.ndim:
        raise InvalidParameter(f"mode {mode} does not exist")
    if p < 0:
        raise InvalidParameter("outcome must be >= 0")
    if p > state.cutoffs[mode]:
        raise OutcomeBeyondCutoff(f"outcome {p} exceeds the cutoff {state.cutoffs[mode]} of mode {mode}")
    sl = np.take(state.amps, p, axis=mode)
    prob = float(np.sum(np.abs(sl) ** 2))
    cls = _LOWER[state.ndim]
    if prob == 0.0:
        warnings.warn(f"outcome {p} has zero probability", ZeroProbabilityOutcome, stacklevel=2)
        return Projection(cls(np.zeros_like(sl)), 0.0, True)
    return Projection(cls(sl / math.sqrt(prob)), min(prob, 1.0), False)


def _phase_fixed(vec: np.ndarray) -> tuple[complex, np.ndarray]:
    # split vec into weight * unit vector whose largest entry is real positive
    w = float(np.linalg.norm(vec))
    if w == 0.0:
        return 0j, np.zeros_like(vec)
    unit = vec / w
    lead = unit[int(np.argmax(np.abs(unit)))]
    phase = lead / abs(lead)
    return w * phase, unit / phase


def split_branches(cond: np.ndarray, p: int) -> HybridState:
    """Build a ``HybridState`` from conditional amplitudes ``[n_cv, n_dv]``.

    Branch parity is checked against the outcome: for even ``p`` the DV-|1>
    branch must be even and the DV-|0> branch odd, reversed for odd ``p``.
    """
    psi_vec, phi_vec = cond[:, 1], cond[:, 0]
    psi_par = p % 2
    n = np.arange(cond.shape[0])
    leak_psi = float(np.sum(np.abs(psi_vec[n % 2 != psi_par]) ** 2))
    leak_phi = float(np.sum(np.abs(phi_vec[n % 2 == psi_par]) ** 2))
    if leak_psi > PARITY_TOL or leak_phi > PARITY_TOL:
        raise NumericalError(
            f"branch parity violated for outcome {p}: leaks {leak_psi:.3e}, {leak_phi:.3e}"
        )
    c_psi, psi = _phase_fixed(psi_vec)
    c_phi, phi = _phase_fixed(phi_vec)
    ref = c_psi if c_psi != 0 else c_phi
    rot = abs(ref) / ref if ref != 0 else 1.0
    c_psi, c_phi = c_psi * rot, c_phi * rot
    if c_psi != 0:
        c_psi = complex(abs(c_psi), 0.0)
    scale = math.sqrt(abs(c_psi) ** 2 + abs(c_phi) ** 2)
    return HybridState(c_psi / scale, FockAmplitudes(psi), c_phi / scale, FockAmplitudes(phi))


def herald_joint(r_sq: float, bs: BeamSplitter, photon: DelocalizedPhoton, cutoff: int) -> ThreeModeAmplitudes:
    """Three-mode state after the beam splitter, before any measurement.

    ``cutoff`` truncates the squeezed vacuum; modes 1 and 2 are padded to
    ``cutoff + 1`` so that no photon is lost in the mixing.
    """
    smsv = smsv_amplitudes(r_sq, cutoff).amps
    dim = cutoff + 2
    joint = np.zeros((dim, dim, 2), dtype=complex)
    joint[: cutoff + 1, 0, 1] = photon.a0 * smsv
    joint[: cutoff + 1, 1, 0] = photon.a1 * smsv
    return apply_bs(ThreeModeAmplitudes(joint), bs, modes=(0, 1))


def _record(joint: ThreeModeAmplitudes, p: int) -> HeraldRecord:
    proj = project_photon_number(joint, 1, p)
    if proj.zero_probability:
        return HeraldRecord(p, None, 0.0, 0.0, zero_probability=True)
    state = split_branches(proj.state.amps, p)
    return HeraldRecord(p, state, proj.probability, schmidt_negativity(state).value)


def herald_hybrid_numeric(
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    p: int,
    tail_eps: float = TAIL_EPS,
    cutoff: int | None = None,
) -> HeraldRecord:
    if p < 0:
        raise InvalidParameter("outcome must be >= 0")
    cutoff = choose_cutoff(r_sq, tail_eps) if cutoff is None else cutoff
    return _record(herald_joint(r_sq, bs, photon, cutoff), p)


def herald_distribution(
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    p_max: int | None = None,
    tail_eps: float = TAIL_EPS,
    cutoff: int | None = None,
) -> list[HeraldRecord]:
    """Records for every outcome ``0..p_max`` (default: all outcomes the truncation allows)."""
    cutoff = choose_cutoff(r_sq, tail_eps) if cutoff is None else cutoff
    joint = herald_joint(r_sq, bs, photon, cutoff)
    limit = joint.cutoffs[1]
    p_max = limit if p_max is None else p_max
    if p_max > limit:
        raise OutcomeBeyondCutoff(f"p_max {p_max} exceeds the detector-mode cutoff {limit}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroProbabilityOutcome)
        return [_record(joint, p) for p in range(p_max + 1)]
