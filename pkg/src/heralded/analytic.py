"""Closed-form conditional states, weight factors and success probabilities.

For outcome ``p`` in the measured mode the heralded state is
``N_p (a0 |Psi_p>|1> +/- a1 B_p |Phi_p>|0>)`` (plus sign only for
``p = 0``). ``Psi_p`` and ``Phi_p`` are finite series in the squeezed-vacuum
amplitudes ``b_2n``; they are evaluated here in log space so that the
factorial ratios never overflow, and truncated at the same squeezed-vacuum
cutoff the numerical pipeline uses, which makes the two paths comparable to
rounding error.

Odd-outcome branch ``Phi_{2m+1}``: the series pairs ``|2k>`` with
``b_{2(k+m)}`` (photon-number conservation fixes the index). A variant with
``b_{2(k+m+1)}`` is kept as ``printed=True`` for the errata comparison.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .entanglement import negativity_closed
from .errors import InvalidParameter
from .fock import TAIL_EPS, DelocalizedPhoton, FockAmplitudes, check_r_sq, choose_cutoff, fidelity
from .herald import HybridState, herald_joint, project_photon_number
from .interferometer import BeamSplitter

ERRATA_TOL = 1e-9


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


def parity_of(p: int) -> tuple[Parity, Parity]:
    """(psi parity, phi parity) for outcome ``p``."""
    if p < 0:
        raise InvalidParameter("outcome must be >= 0")
    if p % 2 == 0:
        return Parity.EVEN, Parity.ODD
    return Parity.ODD, Parity.EVEN


def _log_smsv(r_sq: float, cutoff: int) -> np.ndarray:
    # log b_{2n}, n = 0..cutoff//2; -inf where the amplitude vanishes (r = 0)
    n = np.arange(cutoff // 2 + 1)
    th = math.tanh(r_sq)
    head = -0.5 * math.log(math.cosh(r_sq)) + 0.5 * gammaln(2 * n + 1) - n * math.log(2.0) - gammaln(n + 1)
    if th == 0.0:
        return np.where(n == 0, head, -np.inf)
    return head + n * math.log(th)


def _assemble(kets, log_mag, sign, dim):
    # returns (normalized vector, log of the normalization factor); a series
    # with no support gives (zeros, +inf), i.e. a vanishing branch
    finite = np.isfinite(log_mag) & (sign != 0)
    if not np.any(finite):
        return np.zeros(dim, dtype=complex), math.inf
    top = np.max(log_mag[finite])
    vals = np.where(finite, sign * np.exp(np.where(finite, log_mag, top) - top), 0.0)
    scale = float(np.linalg.norm(vals))
    vec = np.zeros(dim, dtype=complex)
    vec[kets] = vals / scale
    # series = exp(top) * scale * vec, so the normalization factor is its inverse
    return vec, -(top + math.log(scale))


def _psi_series(p, r_sq, bs, cutoff):
    m, odd = divmod(p, 2)
    log_b = _log_smsv(r_sq, cutoff)
    n_max = cutoff // 2
    lt = math.log(bs.t_bs)
    k = np.arange(n_max - m - odd + 1)
    n = k + m + odd
    ket = 2 * k + odd
    log_mag = log_b[n] + 2 * k * lt + 0.5 * (gammaln(2 * n + 1) - gammaln(ket + 1))
    return _assemble(ket, log_mag, np.ones_like(log_mag), cutoff + 2)


def _phi_series(p, r_sq, bs, cutoff, printed=False):
    m, odd = divmod(p, 2)
    log_b = _log_smsv(r_sq, cutoff)
    n_max = cutoff // 2
    t, r = bs.t_bs, bs.r_bs
    lt = math.log(t)
    if p == 0:
        k = np.arange(n_max + 1)
        log_mag = log_b[k] + 2 * k * lt + 0.5 * np.log(2 * k + 1)
        return _assemble(2 * k + 1, log_mag, np.ones_like(log_mag), cutoff + 2)
    if not odd:
        k = np.arange(n_max - m + 1)
        n = k + m
        ket = 2 * k + 1
        factor = t * t - (2 * k + 1) / (2 * m) * r * r
        t_pow = 2 * k
    else:
        shift = m + 1 if printed else m
        k = np.arange(n_max - shift + 1)
        n = k + shift
        ket = 2 * k
        factor = t * t - (2 * k) / (2 * m + 1) * r * r
        t_pow = 2 * (k - 1)
    with np.errstate(divide="ignore"):
        log_mag = (
            log_b[n] + t_pow * lt + 0.5 * (gammaln(2 * n + 1) - gammaln(ket + 1)) + np.log(np.abs(factor))
        )
    return _assemble(ket, log_mag, np.sign(factor), cutoff + 2)


def _supported(log_norm: float, name: str, p: int) -> float:
    if math.isinf(log_norm):
        raise InvalidParameter(f"{name} has no support for outcome {p} (degenerate parameters)")
    return log_norm


def _resolve(r_sq, cutoff, tail_eps):
    r_sq = check_r_sq(r_sq)
    return r_sq, choose_cutoff(r_sq, tail_eps) if cutoff is None else int(cutoff)


def psi_closed(p: int, r_sq: float, bs: BeamSplitter, cutoff: int | None = None, tail_eps: float = TAIL_EPS):
    """Normalized ``|Psi_p>`` and its normalization factor ``L_p``."""
    parity_of(p)
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    vec, log_l = _psi_series(p, r_sq, bs, cutoff)
    return FockAmplitudes(vec), math.exp(_supported(log_l, "Psi", p))


def phi_closed(
    p: int,
    r_sq: float,
    bs: BeamSplitter,
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
    printed: bool = False,
):
    """Normalized ``|Phi_p>`` and its normalization factor ``K_p``.

    ``printed=True`` selects the ``b_{2(k+m+1)}`` pairing for odd outcomes
    (errata comparison only); it has no effect for even outcomes.
    """
    parity_of(p)
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    vec, log_k = _phi_series(p, r_sq, bs, cutoff, printed)
    return FockAmplitudes(vec), math.exp(_supported(log_k, "Phi", p))


@dataclass(frozen=True)
class ClosedFormFactors:
    p: int
    L_p: float
    K_p: float
    B_p: float
    N_p: float
    log_L: float
    log_K: float

    @property
    def log_B(self) -> float:
        return math.log(self.B_p)


def _log_b_factor(p: int, log_l: float, log_k: float, r_bs: float) -> float:
    if p == 0:
        return math.log(r_bs) + log_l - log_k
    return math.log(p) + log_l - math.log(r_bs) - log_k


def factors(
    p: int,
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
    printed: bool = False,
) -> ClosedFormFactors:
    """``L_p``, ``K_p``, ``B_p`` and ``N_p``.

    ``B_0 = r L_0 / K_0`` and ``B_p = p L_p / (r K_p)`` for ``p >= 1``, with
    ``r`` the beam-splitter reflectance.
    """
    parity_of(p)
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    log_l = _supported(_psi_series(p, r_sq, bs, cutoff)[1], "Psi", p)
    log_k = _supported(_phi_series(p, r_sq, bs, cutoff, printed)[1], "Phi", p)
    log_b = _log_b_factor(p, log_l, log_k, bs.r_bs)
    a0, a1 = photon.mags
    log_n = -0.5 * np.logaddexp(2 * math.log(a0), 2 * math.log(a1) + 2 * log_b)
    return ClosedFormFactors(
        p, math.exp(log_l), math.exp(log_k), math.exp(log_b), math.exp(log_n), log_l, log_k
    )


def success_probability_closed(
    p: int,
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
) -> float:
    """``P_2m = r^4m / ((2m)! L^2 N^2)``, ``P_2m+1 = r^(4m+2) t^2 / ((2m+1)! L^2 N^2)``.

    Evaluated as ``prefactor * (|a0|^2 / L^2 + |a1|^2 B^2 / L^2)``, which stays
    finite when one branch vanishes (no squeezing, or the truncation edge).
    """
    parity_of(p)
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    log_l = _psi_series(p, r_sq, bs, cutoff)[1]
    log_k = _phi_series(p, r_sq, bs, cutoff)[1]
    return _probability_from_logs(p, log_l, log_k, bs, photon)


def _probability_from_logs(p, log_l, log_k, bs, photon):
    lr, lt = math.log(bs.r_bs), math.log(bs.t_bs)
    a0, a1 = photon.mags
    # log(B / L) without forming L, which may be infinite
    log_b_over_l = lr - log_k if p == 0 else math.log(p) - lr - log_k
    log_weight = np.logaddexp(2 * math.log(a0) - 2 * log_l, 2 * math.log(a1) + 2 * log_b_over_l)
    log_p = 2 * p * lr - math.lgamma(p + 1) + log_weight
    if p % 2:
        log_p += 2 * lt
    return min(1.0, math.exp(log_p))


class ClosedSummary(NamedTuple):
    B_p: float
    negativity: float
    probability: float


def closed_summary(
    p: int,
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
) -> ClosedSummary:
    """Weight factor, negativity and success probability from one series pass.

    When the ``Psi_p`` branch vanishes (no squeezing, ``p >= 1``) ``B_p`` is
    infinite and the heralded state is a product: negativity 0.
    """
    parity_of(p)
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    log_l = _psi_series(p, r_sq, bs, cutoff)[1]
    log_k = _phi_series(p, r_sq, bs, cutoff)[1]
    prob = _probability_from_logs(p, log_l, log_k, bs, photon)
    if math.isinf(log_l) or math.isinf(log_k):
        b = math.inf if math.isinf(log_l) else 0.0
        return ClosedSummary(b, 0.0, prob)
    b = math.exp(_log_b_factor(p, log_l, log_k, bs.r_bs))
    return ClosedSummary(b, negativity_closed(photon.a0, photon.a1, b), prob)


def closed_hybrid_state(
    p: int,
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
) -> HybridState:
    """The normalized heralded state assembled from the closed forms.

    Weights follow the same phase convention as the numerical pipeline
    (``c_psi`` real non-negative), so the result can be compared entrywise
    up to the sign conventions of each branch vector.
    """
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    psi, _ = psi_closed(p, r_sq, bs, cutoff)
    phi, _ = phi_closed(p, r_sq, bs, cutoff)
    f = factors(p, r_sq, bs, photon, cutoff)
    sign = 1.0 if p == 0 else -1.0
    c_psi = photon.a0 * f.N_p
    c_phi = sign * photon.a1 * f.B_p * f.N_p
    rot = abs(c_psi) / c_psi
    return HybridState(complex(abs(c_psi)), psi, c_phi * rot, phi)


def apply_phase_flip(h: HybridState) -> HybridState:
    """Phase shifter on the DV single photon: ``|1> -> -|1>``."""
    return HybridState(-h.c_psi, h.psi, h.c_phi, h.phi)


def signed_weight_ratio(
    p: int,
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
    joint=None,
) -> float:
    """Real ratio ``w_phi / w_psi`` read off the numerical pipeline.

    ``w`` are the overlaps of the conditional branches with the closed-form
    ``Psi_p`` and ``Phi_p`` after removing the photon amplitudes ``a0``, ``a1``.
    The closed forms predict ``+B_0`` for ``p = 0`` and ``-B_p`` otherwise.
    """
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    joint = herald_joint(r_sq, bs, photon, cutoff) if joint is None else joint
    cond = project_photon_number(joint, 1, p).state.amps
    psi, _ = psi_closed(p, r_sq, bs, cutoff)
    phi, _ = phi_closed(p, r_sq, bs, cutoff)
    w_psi = np.vdot(psi.amps, cond[:, 1]) / photon.a0
    w_phi = np.vdot(phi.amps, cond[:, 0]) / photon.a1
    return float((w_phi / w_psi).real)


def _form_labels(p: int) -> tuple[str, str, str, str]:
    # keys for (Psi, Phi, B, relative sign) by outcome class
    cls = "vacuum" if p == 0 else ("even" if p % 2 == 0 else "odd")
    return f"psi-{cls}", f"phi-{cls}", f"weight-{cls}", f"sign-{cls}"


def errata_report(
    r_sq: float,
    bs: BeamSplitter,
    photon: DelocalizedPhoton,
    p_values=range(7),
    cutoff: int | None = None,
    tail_eps: float = TAIL_EPS,
) -> list[dict]:
    """Discrepancies between the as-written closed forms and the numerical pipeline.

    Each entry is ``{"form", "p", "params", "deviation"}``; only
    deviations above ``ERRATA_TOL`` are listed. Branch-state deviations are
    ``1 - fidelity``; weight-factor deviations are absolute.
    """
    r_sq, cutoff = _resolve(r_sq, cutoff, tail_eps)
    joint = herald_joint(r_sq, bs, photon, cutoff)
    params = {"r_sq": r_sq, "t_bs": bs.t_bs, "a1_mag": abs(photon.a1), "cutoff": cutoff}
    out = []

    def note(form, p, deviation):
        if deviation > ERRATA_TOL:
            out.append({"form": form, "p": p, "params": dict(params), "deviation": float(deviation)})

    for p in p_values:
        proj = project_photon_number(joint, 1, p)
        if proj.zero_probability:
            continue
        cond = proj.state.amps
        num_psi, num_phi = FockAmplitudes(cond[:, 1]), FockAmplitudes(cond[:, 0])
        psi_eq, phi_eq, b_eq, sign_eq = _form_labels(p)
        psi, _ = psi_closed(p, r_sq, bs, cutoff)
        note(psi_eq, p, 1.0 - fidelity(psi, num_psi))
        phi_printed, _ = phi_closed(p, r_sq, bs, cutoff, printed=True)
        note(phi_eq, p, 1.0 - fidelity(phi_printed, num_phi))
        ratio = signed_weight_ratio(p, r_sq, bs, photon, cutoff, joint=joint)
        printed_b = factors(p, r_sq, bs, photon, cutoff, printed=True).B_p
        note(b_eq, p, abs(abs(ratio) - printed_b))
        printed_sign = 1.0 if p == 0 else -1.0
        note(sign_eq, p, 0.0 if np.sign(ratio) == printed_sign else 2.0 * abs(ratio))
    return out
