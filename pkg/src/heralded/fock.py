"""Pure states in the photon-number basis.

Amplitude containers for one, two and three optical modes, the squeezed
vacuum and delocalized-photon constructors, adaptive truncation, and the
small amount of linear algebra (inner products, fidelity) the rest of the
package needs.

All containers are immutable: the wrapped arrays are copied on construction
and marked read-only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import (
    CutoffOverflow,
    DegenerateDelocalization,
    InvalidParameter,
    NormViolation,
    ZeroNorm,
)

R_SQ_MAX = 3.0
TAIL_EPS = 1e-12
MAX_CUTOFF = 512
ORACLE_BUFFER = 8
MIN_CUTOFF = 4

_NORM_SLACK = 1e-12


def _frozen(amps, ndim: int) -> np.ndarray:
    arr = np.array(amps, dtype=complex)
    if arr.ndim != ndim:
        raise InvalidParameter(f"expected a rank-{ndim} amplitude array, got rank {arr.ndim}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _Amplitudes:
    amps: np.ndarray

    ndim: ClassVar[int] = 1

    def __post_init__(self):
        arr = _frozen(self.amps, self.ndim)
        object.__setattr__(self, "amps", arr)
        sq = self.norm_squared()
        if not np.isfinite(sq) or sq > 1.0 + _NORM_SLACK:
            raise NormViolation(f"squared norm {sq!r} outside [0, 1]")

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(n - 1 for n in self.amps.shape)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ZeroNorm("cannot normalize a zero vector")
        return type(self)(self.amps / nrm)

    def padded(self, cutoffs) -> "_Amplitudes":
        """Zero-pad (never truncate) to the given per-mode cutoffs."""
        cutoffs = tuple(int(c) for c in np.atleast_1d(cutoffs))
        if len(cutoffs) != self.ndim:
            raise InvalidParameter("cutoff count does not match the number of modes")
        if any(c < have for c, have in zip(cutoffs, self.cutoffs)):
            raise InvalidParameter("padding cannot shrink a state")
        out = np.zeros([c + 1 for c in cutoffs], dtype=complex)
        out[tuple(slice(0, n) for n in self.amps.shape)] = self.amps
        return type(self)(out)

    def to_dict(self) -> dict:
        flat = self.amps.reshape(-1)
        return {
            "cutoffs": list(self.cutoffs),
            "amps": [[float(z.real), float(z.imag)] for z in flat],
        }

    def dumps(self) -> str:
        return dump_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict):
        shape = [int(c) + 1 for c in data["cutoffs"]]
        pairs = np.asarray(data["amps"], dtype=float).reshape(-1, 2)
        return cls((pairs[:, 0] + 1j * pairs[:, 1]).reshape(shape))

    @classmethod
    def loads(cls, text: str):
        return cls.from_dict(json.loads(text))


class FockAmplitudes(_Amplitudes):
    """Single-mode amplitude vector over photon numbers ``0..cutoff``."""

    ndim = 1

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @classmethod
    def basis(cls, n: int, cutoff: int | None = None) -> "FockAmplitudes":
        cutoff = n if cutoff is None else cutoff
        vec = np.zeros(cutoff + 1, dtype=complex)
        vec[n] = 1.0
        return cls(vec)


class TwoModeAmplitudes(_Amplitudes):
    """Joint amplitudes ``amps[n1, n2]``."""

    ndim = 2

    @classmethod
    def basis_state(cls, n1: int, n2: int) -> "TwoModeAmplitudes":
        out = np.zeros((n1 + 1, n2 + 1), dtype=complex)
        out[n1, n2] = 1.0
        return cls(out)


class ThreeModeAmplitudes(_Amplitudes):
    """Joint amplitudes ``amps[n1, n2, n3]``."""

    ndim = 3


def dump_json(obj) -> str:
    """Canonical JSON text used by every artifact the package writes.

    Compact separators, keys in insertion order, floats in shortest
    round-trip form, trailing newline.
    """
    return json.dumps(obj, separators=(",", ":"), allow_nan=True) + "\n"


def check_r_sq(r_sq: float, r_max: float = R_SQ_MAX) -> float:
    r_sq = float(r_sq)
    if not math.isfinite(r_sq) or r_sq < 0.0:
        raise InvalidParameter(f"squeezing parameter must be finite and >= 0, got {r_sq!r}")
    if r_sq > r_max:
        raise InvalidParameter(f"squeezing parameter {r_sq!r} exceeds the cap {r_max!r}")
    return r_sq


def _smsv_even(r_sq: float, n_terms: int) -> np.ndarray:
    # b_{2n} for n = 0..n_terms-1 by the ratio recurrence
    ratios = np.empty(n_terms)
    ratios[0] = 1.0 / math.sqrt(math.cosh(r_sq))
    if n_terms > 1:
        n = np.arange(n_terms - 1)
        ratios[1:] = math.tanh(r_sq) * np.sqrt((2 * n + 1) / (2 * n + 2))
    return np.cumprod(ratios)


def smsv_amplitudes(r_sq: float, cutoff: int) -> FockAmplitudes:
    """Squeezed-vacuum amplitudes truncated at ``cutoff`` photons.

    Odd entries are exactly zero; even entries follow
    ``b_{2n+2} = b_{2n} tanh(r) sqrt((2n+1)/(2n+2))`` starting from
    ``b_0 = 1/sqrt(cosh r)``.
    """
    r_sq = check_r_sq(r_sq)
    if cutoff < 0:
        raise InvalidParameter("cutoff must be >= 0")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0::2] = _smsv_even(r_sq, cutoff // 2 + 1)
    return FockAmplitudes(amps)


def choose_cutoff(r_sq: float, tail_eps: float = TAIL_EPS, max_cutoff: int = MAX_CUTOFF) -> int:
    """Smallest even truncation whose discarded squeezed-vacuum mass is below ``tail_eps``.

    Consecutive squared amplitudes shrink by at least ``tanh(r)**2``, so the
    mass beyond ``2n`` is bounded by ``b_{2n}**2 * lam / (1 - lam)``.
    """
    r_sq = check_r_sq(r_sq)
    if not tail_eps > 0:
        raise InvalidParameter("tail_eps must be positive")
    lam = math.tanh(r_sq) ** 2
    if lam == 0.0:
        return MIN_CUTOFF
    n_terms = max_cutoff // 2 + 1
    b2 = _smsv_even(r_sq, n_terms) ** 2
    bound = b2 * lam / (1.0 - lam)
    ok = np.nonzero(bound < tail_eps)[0]
    if ok.size == 0:
        raise CutoffOverflow(
            f"squeezing r={r_sq!r} needs more than {max_cutoff} photons for tail mass < {tail_eps!r}"
        )
    return max(MIN_CUTOFF, 2 * int(ok[0]))


@dataclass(frozen=True)
class DelocalizedPhoton:
    """Single photon shared between two modes: ``a0|01> + a1|10>``."""

    a0: complex
    a1: complex

    @property
    def mags(self) -> tuple[float, float]:
        return abs(self.a0), abs(self.a1)

    @classmethod
    def from_magnitude(cls, a1_mag: float, phase: float = 0.0) -> "DelocalizedPhoton":
        """Real non-negative ``a0`` inferred from normalization, optional phase on ``a1``."""
        a1_mag = float(a1_mag)
        if not 0.0 <= a1_mag <= 1.0:
            raise NormViolation(f"|a1| = {a1_mag!r} is not in [0, 1]")
        a0 = math.sqrt(max(0.0, 1.0 - a1_mag * a1_mag))
        return delocalized_photon(a0, a1_mag * complex(math.cos(phase), math.sin(phase)))


def delocalized_photon(a0: complex, a1: complex, tol: float = 1e-9) -> DelocalizedPhoton:
    a0, a1 = complex(a0), complex(a1)
    total = abs(a0) ** 2 + abs(a1) ** 2
    if not math.isfinite(total) or abs(total - 1.0) > tol:
        raise NormViolation(f"|a0|^2 + |a1|^2 = {total!r}, expected 1")
    if a0 == 0 or a1 == 0:
        raise DegenerateDelocalization(
            "both photon amplitudes must be nonzero (a0 = 0 or a1 = 0 is not delocalized)"
        )
    return DelocalizedPhoton(a0, a1)


def _aligned(a: _Amplitudes, b: _Amplitudes) -> tuple[np.ndarray, np.ndarray]:
    if a.ndim != b.ndim:
        raise InvalidParameter("states live on different numbers of modes")
    cut = tuple(max(x, y) for x, y in zip(a.cutoffs, b.cutoffs))
    return a.padded(cut).amps, b.padded(cut).amps


def inner_product(a: _Amplitudes, b: _Amplitudes) -> complex:
    """``<a|b>``, conjugate-linear in the first argument; the shorter state is zero-padded."""
    x, y = _aligned(a, b)
    return complex(np.vdot(x, y))


def norm(a: _Amplitudes) -> float:
    return a.norm()


def fidelity(a: _Amplitudes, b: _Amplitudes) -> float:
    na, nb = a.norm_squared(), b.norm_squared()
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("fidelity is undefined for a zero vector")
    return min(1.0, abs(inner_product(a, b)) ** 2 / (na * nb))
