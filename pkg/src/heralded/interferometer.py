"""Lossless two-mode beam splitter in the photon-number basis.

Creation operators transform as ``a1+ -> t a1+ - r a2+`` and
``a2+ -> r a1+ + t a2+``. Three independent routes are provided:

* ``bs_on_fock_vacuum`` evaluates the closed-form expansion of ``|l>|0>``;
* ``fock_column`` / ``bs_on_fock_single`` / ``apply_bs`` expand the
  transformed creation operators binomially (the production path);
* ``bs_matrix_oracle`` exponentiates the generator on a truncated space.

``validate_printed_forms`` cross-checks them and also evaluates the
reference closed form for ``|l>|1>`` on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import CutoffOverflow, InvalidParameter
from .fock import ORACLE_BUFFER, TwoModeAmplitudes, _Amplitudes

FLAG_TOL = 1e-9


@dataclass(frozen=True)
class BeamSplitter:
    t_bs: float
    r_bs: float

    def __post_init__(self):
        t, r = float(self.t_bs), float(self.r_bs)
        if not (0.0 < t < 1.0 and 0.0 < r < 1.0):
            raise InvalidParameter(
                f"beam splitter needs 0 < t < 1 and 0 < r < 1, got t={t!r}, r={r!r}"
            )
        if abs(t * t + r * r - 1.0) > 1e-12:
            raise InvalidParameter(f"t^2 + r^2 = {t * t + r * r!r}, expected 1")
        object.__setattr__(self, "t_bs", t)
        object.__setattr__(self, "r_bs", r)

    @classmethod
    def from_t(cls, t_bs: float) -> "BeamSplitter":
        t_bs = float(t_bs)
        if not 0.0 < t_bs < 1.0:
            raise InvalidParameter(f"transmittance must lie strictly inside (0, 1), got {t_bs!r}")
        return cls(t_bs, math.sqrt((1.0 - t_bs) * (1.0 + t_bs)))

    @classmethod
    def from_angle(cls, theta: float) -> "BeamSplitter":
        return cls(math.cos(theta), math.sin(theta))

    @property
    def theta(self) -> float:
        return math.atan2(self.r_bs, self.t_bs)


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def bs_on_fock_vacuum(l: int, bs: BeamSplitter) -> TwoModeAmplitudes:
    """``BS|l>|0> = sum_k (-1)^k t^(l-k) r^k sqrt(C(l, k)) |l-k>|k>``."""
    if l < 0:
        raise InvalidParameter("photon number must be >= 0")
    k = np.arange(l + 1)
    mag = np.exp((l - k) * math.log(bs.t_bs) + k * math.log(bs.r_bs) + 0.5 * _log_binom(l, k))
    out = np.zeros((l + 1, l + 1), dtype=complex)
    out[l - k, k] = np.where(k % 2 == 0, 1.0, -1.0) * mag
    return TwoModeAmplitudes(out)


@lru_cache(maxsize=4096)
def _column(n1: int, n2: int, t: float, r: float) -> np.ndarray:
    total = n1 + n2
    k = np.arange(total + 1)
    col = np.zeros(total + 1)
    log_t, log_r = math.log(t), math.log(abs(r))
    r_sign = -1.0 if r < 0 else 1.0
    # 0.5 * log((total-k)! k! / (n1! n2!))
    log_norm = 0.5 * (gammaln(total - k + 1) + gammaln(k + 1) - gammaln(n1 + 1) - gammaln(n2 + 1))
    for i in range(n2 + 1):
        # i photons of mode 2 go to output mode 2, j = k - i photons of mode 1 do
        j = k - i
        ok = (j >= 0) & (j <= n1)
        jj = j[ok]
        r_pow = jj + n2 - i
        log_mag = (
            _log_binom(n1, jj)
            + _log_binom(n2, i)
            + (n1 - jj + i) * log_t
            + r_pow * log_r
            + log_norm[ok]
        )
        sign = np.where(jj % 2 == 0, 1.0, -1.0) * np.where(r_pow % 2 == 0, 1.0, r_sign)
        col[ok] += sign * np.exp(log_mag)
    col.setflags(write=False)
    return col


def fock_column(n1: int, n2: int, bs: BeamSplitter, inverse: bool = False) -> np.ndarray:
    """Amplitudes of ``BS|n1>|n2>`` on ``|n1+n2-k>|k>``, indexed by ``k``.

    Expands ``(t a1+ - r a2+)^n1 (r a1+ + t a2+)^n2 |00> / sqrt(n1! n2!)``.
    ``inverse=True`` applies the adjoint transform (``r -> -r``).
    """
    if n1 < 0 or n2 < 0:
        raise InvalidParameter("photon numbers must be >= 0")
    r = -bs.r_bs if inverse else bs.r_bs
    return _column(int(n1), int(n2), bs.t_bs, r)


def bs_on_fock_single(l: int, bs: BeamSplitter) -> TwoModeAmplitudes:
    """``BS|l>|1>`` from the binomial operator expansion."""
    if l < 0:
        raise InvalidParameter("photon number must be >= 0")
    col = fock_column(l, 1, bs)
    k = np.arange(l + 2)
    out = np.zeros((l + 2, l + 2), dtype=complex)
    out[l + 1 - k, k] = col
    return TwoModeAmplitudes(out)


def apply_bs(state: _Amplitudes, bs: BeamSplitter, modes=(0, 1), inverse: bool = False):
    """Apply the beam splitter to two modes of a two- or three-mode state.

    ``modes[0]`` is the port whose creation operator picks up ``+t``;
    ``modes[1]`` is the port that is later measured in the heralding
    schemes. The state must already be padded so that every populated
    basis component fits after its photons are redistributed.
    """
    m1, m2 = modes
    if m1 == m2 or not (0 <= m1 < state.ndim and 0 <= m2 < state.ndim):
        raise InvalidParameter(f"invalid mode pair {modes!r} for a {state.ndim}-mode state")
    arr = np.moveaxis(state.amps, (m1, m2), (0, 1))
    c1, c2 = arr.shape[0] - 1, arr.shape[1] - 1
    batch = arr.reshape(arr.shape[0], arr.shape[1], -1)
    out = np.zeros_like(batch)
    occupied = np.argwhere(np.any(batch != 0, axis=2))
    limit = min(c1, c2)
    for n1, n2 in occupied:
        total = n1 + n2
        if total > limit:
            raise CutoffOverflow(
                f"component |{n1},{n2}> carries {total} photons but the padded cutoff is {limit}"
            )
        col = fock_column(n1, n2, bs, inverse)
        k = np.arange(total + 1)
        out[total - k, k, :] += col[:, None] * batch[n1, n2, :][None, :]
    out = np.moveaxis(out.reshape(arr.shape), (0, 1), (m1, m2))
    return type(state)(out)


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)


@lru_cache(maxsize=64)
def _oracle(theta: float, cutoff: int) -> np.ndarray:
    a = _ladder(cutoff)
    eye = np.eye(cutoff + 1)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    gen = theta * (a1.T @ a2 - a1 @ a2.T)
    u = scipy.linalg.expm(gen)
    u.setflags(write=False)
    return u


def bs_matrix_oracle(bs: BeamSplitter, cutoff: int) -> np.ndarray:
    """Unitary ``exp(theta (a1+ a2 - a1 a2+))`` on the truncated two-mode space.

    Basis index of ``|n1, n2>`` is ``n1 * (cutoff + 1) + n2``. Only blocks of
    total photon number ``<= cutoff`` reproduce the untruncated operator.
    """
    if cutoff < 2:
        raise InvalidParameter("oracle cutoff must be >= 2")
    return _oracle(bs.theta, int(cutoff))


def oracle_apply(state: TwoModeAmplitudes, bs: BeamSplitter, cutoff: int) -> TwoModeAmplitudes:
    padded = state.padded((cutoff, cutoff))
    u = bs_matrix_oracle(bs, cutoff)
    return TwoModeAmplitudes((u @ padded.amps.reshape(-1)).reshape(cutoff + 1, cutoff + 1))


def printed_single_photon_form(l: int, bs: BeamSplitter) -> TwoModeAmplitudes:
    """Reference closed form for ``BS|l>|1>``, coefficient by coefficient.

    The sum term ``k`` is placed on ``|l-k>|k+1>``, the only label that
    conserves the ``l + 1`` input photons.
    """
    t, r = bs.t_bs, bs.r_bs
    out = np.zeros((l + 2, l + 2), dtype=complex)
    out[l + 1, 0] = math.sqrt(l + 1) * t**l * r
    for k in range(l + 1):
        weight = math.exp(
            0.5 * (math.lgamma(k + 2) + math.lgamma(l + 1) - math.lgamma(l - k + 1)) - math.lgamma(k + 1)
        )
        bracket = t**2 - (l - k) / (k + 1) * r**2
        out[l - k, k + 1] += (-1) ** k * t ** (l - k - 1) * r**k * weight * bracket
    return TwoModeAmplitudes(out)


@dataclass(frozen=True)
class ValidationEntry:
    l: int
    form: str
    max_dev: float
    flagged: bool

    def to_dict(self) -> dict:
        return {"l": self.l, "form": self.form, "max_dev": self.max_dev, "flagged": self.flagged}


@dataclass(frozen=True)
class ValidationReport:
    t_bs: float
    entries: tuple[ValidationEntry, ...] = field(default_factory=tuple)

    @property
    def flagged(self) -> list[ValidationEntry]:
        return [e for e in self.entries if e.flagged]

    @property
    def max_dev(self) -> float:
        return max((e.max_dev for e in self.entries), default=0.0)

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]


def _dev(a: _Amplitudes, b: _Amplitudes) -> float:
    cut = tuple(max(x, y) for x, y in zip(a.cutoffs, b.cutoffs))
    return float(np.max(np.abs(a.padded(cut).amps - b.padded(cut).amps)))


def validate_printed_forms(bs: BeamSplitter, l_max: int, buffer: int = ORACLE_BUFFER) -> ValidationReport:
    """Pairwise maximum amplitude deviations between the three routes for ``l <= l_max``."""
    cutoff = l_max + 1 + buffer
    entries = []
    for l in range(l_max + 1):
        printed5 = bs_on_fock_vacuum(l, bs)
        expanded5 = TwoModeAmplitudes(_placed(l, 0, bs))
        oracle5 = oracle_apply(TwoModeAmplitudes.basis_state(l, 0), bs, cutoff)
        dev5 = max(_dev(printed5, expanded5), _dev(printed5, oracle5))
        entries.append(ValidationEntry(l, "vacuum-input", dev5, dev5 > FLAG_TOL))

        printed6 = printed_single_photon_form(l, bs)
        expanded6 = bs_on_fock_single(l, bs)
        oracle6 = oracle_apply(TwoModeAmplitudes.basis_state(l, 1), bs, cutoff)
        dev6 = max(_dev(printed6, expanded6), _dev(expanded6, oracle6), _dev(printed6, oracle6))
        entries.append(ValidationEntry(l, "single-photon-input", dev6, dev6 > FLAG_TOL))
    return ValidationReport(bs.t_bs, tuple(entries))


def _placed(n1: int, n2: int, bs: BeamSplitter) -> np.ndarray:
    total = n1 + n2
    k = np.arange(total + 1)
    out = np.zeros((total + 1, total + 1), dtype=complex)
    out[total - k, k] = fock_column(n1, n2, bs)
    return out
