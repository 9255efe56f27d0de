"""Second heralding stage: CV-CV entangled states.

A fresh squeezed vacuum in mode 2 is mixed with the DV mode 3 of a heralded
hybrid state (outcome 0), and mode 3 is measured. Conditioned on ``p``
photons the modes 1 and 2 are left in

    N' (a0 |Psi_0>_1 |Phi_p>_2  -/+  a1 B' |Phi_0>_1 |Psi_p>_2)

with ``B' = B_0 / B_p``: ``B_0`` from the first stage, ``B_p`` from the
second stage's parameters. The sign is ``+`` for ``p = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import factors, phi_closed, psi_closed
from .entanglement import negativity_closed
from .errors import BranchFactorizationFailure, CutoffOverflow, InvalidParameter
from .fock import (
    TAIL_EPS,
    DelocalizedPhoton,
    FockAmplitudes,
    ThreeModeAmplitudes,
    TwoModeAmplitudes,
    check_r_sq,
    choose_cutoff,
    fidelity,
    smsv_amplitudes,
)
from .herald import HeraldRecord, _phase_fixed, project_photon_number
from .interferometer import BeamSplitter, apply_bs

RANK_TOL = 1e-9
MAX_TENSOR = 20_000_000


@dataclass(frozen=True, eq=False)
class CVEntangledState:
    """``w1 |A1>|B1> + w2 |A2>|B2>`` over modes 1 and 2.

    ``branch1`` carries the even-parity mode-1 state of the first stage,
    ``branch2`` the odd one; ``labels`` names each factor as psi/phi.
    """

    w1: complex
    branch1: tuple[FockAmplitudes, FockAmplitudes]
    w2: complex
    branch2: tuple[FockAmplitudes, FockAmplitudes]
    p: int
    labels: tuple[dict, dict] = (
        {"mode1": "psi", "mode2": "phi"},
        {"mode1": "phi", "mode2": "psi"},
    )

    def __post_init__(self):
        total = abs(self.w1) ** 2 + abs(self.w2) ** 2
        if abs(total - 1.0) > 1e-12:
            raise InvalidParameter(f"branch weights have squared norm {total!r}")

    def coefficient_matrix(self) -> np.ndarray:
        d1 = max(self.branch1[0].cutoff, self.branch2[0].cutoff) + 1
        d2 = max(self.branch1[1].cutoff, self.branch2[1].cutoff) + 1
        out = np.zeros((d1, d2), dtype=complex)
        for w, (a, b) in ((self.w1, self.branch1), (self.w2, self.branch2)):
            out[: a.cutoff + 1, : b.cutoff + 1] += w * np.outer(a.amps, b.amps)
        return out

    def as_two_mode(self) -> TwoModeAmplitudes:
        return TwoModeAmplitudes(self.coefficient_matrix())

    def to_dict(self) -> dict:
        def pair(z):
            return [float(z.real), float(z.imag)]

        return {
            "p": self.p,
            "w1": pair(complex(self.w1)),
            "w2": pair(complex(self.w2)),
            "branch1": {
                "labels": self.labels[0],
                "mode1": self.branch1[0].to_dict(),
                "mode2": self.branch1[1].to_dict(),
            },
            "branch2": {
                "labels": self.labels[1],
                "mode1": self.branch2[0].to_dict(),
                "mode2": self.branch2[1].to_dict(),
            },
        }


def _rank_one(block: np.ndarray, what: str):
    # block ~ w * outer(u, v); returns (w, u, v) with the phase convention of the herald module
    if not np.any(block):
        return 0j, np.zeros(block.shape[0], complex), np.zeros(block.shape[1], complex)
    u, s, vh = np.linalg.svd(block, full_matrices=False)
    if len(s) > 1 and s[1] > RANK_TOL * s[0]:
        raise BranchFactorizationFailure(f"{what} block is not a product state (s1/s0 = {s[1] / s[0]:.3e})")
    cu, uu = _phase_fixed(u[:, 0])
    cv, vv = _phase_fixed(vh[0])
    return s[0] * cu * cv, uu, vv


def _definite_parity(vec: np.ndarray) -> int | None:
    n = np.arange(vec.size)
    even = float(np.sum(np.abs(vec[n % 2 == 0]) ** 2))
    odd = float(np.sum(np.abs(vec[n % 2 == 1]) ** 2))
    if even + odd == 0.0:
        return None
    if min(even, odd) > RANK_TOL * (even + odd):
        raise BranchFactorizationFailure("mode-2 branch has mixed parity")
    return 0 if even >= odd else 1


def factor_cv_state(cond: np.ndarray, p: int) -> CVEntangledState:
    """Split a conditional two-mode state into its two parity-separated product branches."""
    s = np.linalg.svd(cond, compute_uv=False)
    if s.size > 2 and s[2] > RANK_TOL * s[0]:
        raise BranchFactorizationFailure(f"conditional state has Schmidt rank > 2 (s2/s0 = {s[2] / s[0]:.3e})")
    n1 = np.arange(cond.shape[0])
    even_rows = np.where((n1 % 2 == 0)[:, None], cond, 0)
    odd_rows = np.where((n1 % 2 == 1)[:, None], cond, 0)
    w1, a1, b1 = _rank_one(even_rows, "even")
    w2, a2, b2 = _rank_one(odd_rows, "odd")
    pb1, pb2 = _definite_parity(b1), _definite_parity(b2)
    if pb1 is not None and pb2 is not None and pb1 == pb2:
        raise BranchFactorizationFailure("mode-2 branches share a parity")
    ref = w1 if w1 != 0 else w2
    rot = abs(ref) / ref
    w1, w2 = w1 * rot, w2 * rot
    if w1 != 0:
        w1 = complex(abs(w1), 0.0)
    scale = math.sqrt(abs(w1) ** 2 + abs(w2) ** 2)
    return CVEntangledState(
        w1 / scale,
        (FockAmplitudes(a1), FockAmplitudes(b1)),
        w2 / scale,
        (FockAmplitudes(a2), FockAmplitudes(b2)),
        p,
    )


def cascade_joint(stage1: HeraldRecord, r_sq2: float, bs2: BeamSplitter, cutoff2: int) -> ThreeModeAmplitudes:
    """Modes (1, 2, 3) after the second beam splitter, before measuring mode 3."""
    if stage1.p != 0 or stage1.state is None:
        raise InvalidParameter("the second stage starts from a heralded outcome-0 hybrid state")
    coeffs = stage1.state.coefficient_matrix()
    smsv = smsv_amplitudes(r_sq2, cutoff2).amps
    d1, d2 = coeffs.shape[0], cutoff2 + 2
    if d1 * d2 * d2 > MAX_TENSOR:
        raise CutoffOverflow(f"three-mode tensor {d1}x{d2}x{d2} exceeds the desk-scale budget")
    joint = np.zeros((d1, d2, d2), dtype=complex)
    for dv in (0, 1):
        joint[:, : cutoff2 + 1, dv] = np.outer(coeffs[:, dv], smsv)
    return apply_bs(ThreeModeAmplitudes(joint), bs2, modes=(1, 2))


def cascade_numeric(
    stage1: HeraldRecord,
    r_sq2: float,
    bs2: BeamSplitter,
    p: int,
    tail_eps: float = TAIL_EPS,
    cutoff2: int | None = None,
) -> tuple[CVEntangledState, float]:
    """Condition the second stage on ``p`` photons in mode 3.

    Returns the factored CV-CV state and the conditional probability of
    ``p`` given the first-stage outcome.
    """
    if p < 0:
        raise InvalidParameter("outcome must be >= 0")
    r_sq2 = check_r_sq(r_sq2)
    cutoff2 = choose_cutoff(r_sq2, tail_eps) if cutoff2 is None else cutoff2
    joint = cascade_joint(stage1, r_sq2, bs2, cutoff2)
    proj = project_photon_number(joint, 2, p)
    if proj.zero_probability:
        raise BranchFactorizationFailure(f"outcome {p} has zero probability")
    return factor_cv_state(proj.state.amps, p), proj.probability


def cascade_distribution(stage1: HeraldRecord, r_sq2: float, bs2: BeamSplitter, tail_eps: float = TAIL_EPS,
                         cutoff2: int | None = None) -> list[float]:
    """Probabilities of every second-stage outcome the truncation allows."""
    r_sq2 = check_r_sq(r_sq2)
    cutoff2 = choose_cutoff(r_sq2, tail_eps) if cutoff2 is None else cutoff2
    joint = cascade_joint(stage1, r_sq2, bs2, cutoff2)
    sq = np.abs(joint.amps) ** 2
    return [float(x) for x in sq.sum(axis=(0, 1))]


def b_prime(p: int, r_sq1: float, bs1: BeamSplitter, r_sq2: float, bs2: BeamSplitter,
            photon: DelocalizedPhoton, cutoff1: int | None = None, cutoff2: int | None = None) -> float:
    """Second-stage weight factor ``B_0 / B_p``.

    For ``p >= 1`` this is ``B_0 r K_p / (p L_p)`` with ``r``, ``K_p``, ``L_p``
    taken from the second stage.
    """
    b0 = factors(0, r_sq1, bs1, photon, cutoff1).B_p
    bp = factors(p, r_sq2, bs2, photon, cutoff2).B_p
    return b0 / bp


def cascade_closed(
    p: int,
    r_sq1: float,
    bs1: BeamSplitter,
    photon: DelocalizedPhoton,
    r_sq2: float,
    bs2: BeamSplitter,
    tail_eps: float = TAIL_EPS,
    cutoff1: int | None = None,
    cutoff2: int | None = None,
) -> CVEntangledState:
    r_sq1, r_sq2 = check_r_sq(r_sq1), check_r_sq(r_sq2)
    cutoff1 = choose_cutoff(r_sq1, tail_eps) if cutoff1 is None else cutoff1
    cutoff2 = choose_cutoff(r_sq2, tail_eps) if cutoff2 is None else cutoff2
    psi0, _ = psi_closed(0, r_sq1, bs1, cutoff1)
    phi0, _ = phi_closed(0, r_sq1, bs1, cutoff1)
    psi_p, _ = psi_closed(p, r_sq2, bs2, cutoff2)
    phi_p, _ = phi_closed(p, r_sq2, bs2, cutoff2)
    bp = b_prime(p, r_sq1, bs1, r_sq2, bs2, photon, cutoff1, cutoff2)
    a0, a1 = photon.a0, photon.a1
    norm = 1.0 / math.sqrt(abs(a0) ** 2 + abs(a1) ** 2 * bp**2)
    sign = 1.0 if p == 0 else -1.0
    rot = abs(a0) / a0
    return CVEntangledState(
        complex(abs(a0) * norm),
        (psi0, phi_p),
        sign * a1 * bp * norm * rot,
        (phi0, psi_p),
        p,
    )


def cascade_probability_closed(
    p: int,
    r_sq1: float,
    bs1: BeamSplitter,
    photon: DelocalizedPhoton,
    r_sq2: float,
    bs2: BeamSplitter,
    tail_eps: float = TAIL_EPS,
    cutoff1: int | None = None,
    cutoff2: int | None = None,
) -> float:
    """Probability of ``p`` at the second stage given outcome 0 at the first.

    ``N_0^2 * pref_p / L_p^2 * (|a0|^2 B_p^2 + |a1|^2 B_0^2)`` where
    ``pref_p / L_p^2`` is the second stage's vacuum-input branch weight.
    """
    f0 = factors(0, r_sq1, bs1, photon, cutoff1, tail_eps)
    fp = factors(p, r_sq2, bs2, photon, cutoff2, tail_eps)
    lr, lt = math.log(bs2.r_bs), math.log(bs2.t_bs)
    log_pref = 2 * p * lr - math.lgamma(p + 1) + (2 * lt if p % 2 else 0.0) - 2 * fp.log_L
    a0, a1 = photon.mags
    mix = a0 * a0 * fp.B_p**2 + a1 * a1 * f0.B_p**2
    return min(1.0, f0.N_p**2 * math.exp(log_pref) * mix)


def cascade_negativity_closed(
    p: int,
    r_sq1: float,
    bs1: BeamSplitter,
    photon: DelocalizedPhoton,
    r_sq2: float,
    bs2: BeamSplitter,
    **kw,
) -> float:
    return negativity_closed(photon.a0, photon.a1, b_prime(p, r_sq1, bs1, r_sq2, bs2, photon, **kw))


def cascade_errata(
    stage1: HeraldRecord,
    r_sq1: float,
    bs1: BeamSplitter,
    photon: DelocalizedPhoton,
    r_sq2: float,
    bs2: BeamSplitter,
    p_values=range(5),
    tail_eps: float = TAIL_EPS,
) -> list[dict]:
    """As-written cascade forms against the three-mode pipeline.

    Checks the unweighted outcome-0 form (exact only when both stages share
    ``B_0``) and the odd-outcome ``B'`` variant written with ``L_{2m}``.
    """
    cutoff1 = choose_cutoff(r_sq1, tail_eps)
    cutoff2 = choose_cutoff(r_sq2, tail_eps)
    params = {"r_sq1": r_sq1, "t_bs1": bs1.t_bs, "r_sq2": r_sq2, "t_bs2": bs2.t_bs, "a1_mag": abs(photon.a1)}
    out = []
    for p in p_values:
        state, _ = cascade_numeric(stage1, r_sq2, bs2, p, tail_eps, cutoff2)
        measured = abs(state.w2 / state.w1) * abs(photon.a0 / photon.a1)
        if p == 0:
            printed, form = 1.0, "cascade-vacuum-weights"
        elif p % 2:
            m = p // 2
            b0 = factors(0, r_sq1, bs1, photon, cutoff1).B_p
            fp = factors(p, r_sq2, bs2, photon, cutoff2)
            _, l_even = psi_closed(2 * m, r_sq2, bs2, cutoff2)
            printed, form = b0 * bs2.r_bs * fp.K_p / (p * l_even), "cascade-bprime-odd"
        else:
            continue
        dev = abs(measured - printed)
        if dev > RANK_TOL:
            out.append({"form": form, "p": p, "params": dict(params), "deviation": float(dev)})
    return out


def cascade_fidelity(a: CVEntangledState, b: CVEntangledState) -> float:
    return fidelity(a.as_two_mode(), b.as_two_mode())
