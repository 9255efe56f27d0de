"""Parameter-space scans, maximal-entanglement root finding and reference-point checks."""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import closed_summary
from .cascade import b_prime, cascade_negativity_closed, cascade_probability_closed
from .entanglement import max_negativity_residual
from .errors import CutoffOverflow, InvalidParameter, NoRootInBracket, NumericalError
from .fock import TAIL_EPS, DelocalizedPhoton, check_r_sq, choose_cutoff
from .herald import herald_hybrid_numeric
from .interferometer import BeamSplitter

RESIDUAL_TOL = 1e-10
SPOT_FRACTION = 0.01
SPOT_TOL = 1e-9
TABLE_TOL = 1e-3
INTERNAL_TOL = 1e-9

CSV_HEADER = "r_sq,t_bs,a1_mag,p,negativity,probability"

BALANCED = 1.0 / math.sqrt(2.0)

# (row, r_sq, t_bs, |a1|, tabulated P0)
REFERENCE_POINTS = (
    (1, 0.107632, 0.423201, 0.741004, 0.896792),
    (2, 0.380541, 0.326343, 0.726463, 0.88067),
    (3, 0.541383, 0.259528, 0.719131, 0.840088),
    (4, 0.753348, 0.234748, 0.716839, 0.7449845),
    (5, 0.83396, 0.0762081, 0.708133, 0.728679),
    (6, 0.0265654, 0.0220391, BALANCED, 0.999404),
    (7, 0.303502, 0.025593, BALANCED, 0.955334),
    (8, 0.613125, 0.020327, BALANCED, 0.837402),
)

# printed values known to be misprints, keyed by row
REFERENCE_ERRATA = {4: "tabulated P0 transposes digits of the computed 0.74984"}


@functools.lru_cache(maxsize=4096)
def _cutoff(r_sq: float, tail_eps: float) -> int:
    return choose_cutoff(r_sq, tail_eps)


def _summary(p, r_sq, t_bs, photon, tail_eps):
    return closed_summary(p, r_sq, BeamSplitter.from_t(t_bs), photon, _cutoff(r_sq, tail_eps))


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 1:
        raise InvalidParameter("grid needs at least one step")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _check_t_range(t_range):
    lo, hi = t_range
    if not (0.0 < lo <= hi < 1.0):
        raise InvalidParameter(f"t range {t_range!r} must lie strictly inside (0, 1)")


def _check_r_range(r_range):
    lo, hi = r_range
    if lo > hi:
        raise InvalidParameter(f"empty squeezing range {r_range!r}")
    check_r_sq(lo)
    check_r_sq(hi)


@dataclass(frozen=True)
class ScanTable:
    rows: tuple[tuple[float, float, float, int, float, float], ...]
    r_range: tuple[float, float]
    t_range: tuple[float, float]
    steps: tuple[int, int]
    p: int
    a1_mag: float
    spot_checks: int = 0
    spot_max_dev: float = 0.0
    invalid: int = 0

    def column(self, name: str) -> np.ndarray:
        idx = CSV_HEADER.split(",").index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)

    def surface(self, name: str) -> np.ndarray:
        """Column reshaped to ``(r_steps, t_steps)``."""
        return self.column(name).reshape(self.steps)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r, t, a, p, neg, prob in self.rows:
            buf.write(f"{r!r},{t!r},{a!r},{p},{neg!r},{prob!r}\n")
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "r_range": list(self.r_range),
            "t_range": list(self.t_range),
            "steps": list(self.steps),
            "p": self.p,
            "a1_mag": self.a1_mag,
            "rows": len(self.rows),
            "invalid": self.invalid,
            "spot_checks": self.spot_checks,
            "spot_max_dev": self.spot_max_dev,
        }


def scan_grid(
    r_range: tuple[float, float] = (0.0, 1.5),
    t_range: tuple[float, float] = (0.02, 0.98),
    a1_mag: float = BALANCED,
    p: int = 0,
    steps: tuple[int, int] = (50, 50),
    tail_eps: float = TAIL_EPS,
    spot_fraction: float = SPOT_FRACTION,
) -> ScanTable:
    """Negativity and success probability on an ``r_sq`` x ``t_bs`` grid.

    Rows are ordered r-major. Cells that cannot be evaluated (cutoff budget
    exhausted) carry NaN and are counted in ``invalid``. Every
    ``1/spot_fraction``-th valid cell is recomputed through the numeric
    pipeline; disagreement beyond ``SPOT_TOL`` raises ``NumericalError``.
    """
    if p < 0:
        raise InvalidParameter("outcome must be >= 0")
    _check_r_range(r_range)
    _check_t_range(t_range)
    photon = DelocalizedPhoton.from_magnitude(a1_mag)
    rs, ts = _grid(*r_range, steps[0]), _grid(*t_range, steps[1])
    stride = max(1, round(1.0 / spot_fraction)) if spot_fraction > 0 else 0
    rows, invalid, checks, worst = [], 0, 0, 0.0
    for i, r in enumerate(rs):
        r = float(r)
        for j, t in enumerate(ts):
            t = float(t)
            try:
                s = _summary(p, r, t, photon, tail_eps)
                neg, prob = float(s.negativity), float(s.probability)
            except CutoffOverflow:
                rows.append((r, t, float(a1_mag), p, math.nan, math.nan))
                invalid += 1
                continue
            rows.append((r, t, float(a1_mag), p, neg, prob))
            if stride and (i * len(ts) + j) % stride == 0:
                rec = herald_hybrid_numeric(r, BeamSplitter.from_t(t), photon, p, tail_eps, _cutoff(r, tail_eps))
                dev = max(abs(rec.negativity - neg), abs(rec.probability - prob))
                if dev > SPOT_TOL:
                    raise NumericalError(f"spot check at r_sq={r!r}, t={t!r} deviates by {dev:.3e}")
                checks += 1
                worst = max(worst, dev)
    return ScanTable(
        tuple(rows), tuple(map(float, r_range)), tuple(map(float, t_range)),
        (len(rs), len(ts)), p, float(a1_mag), checks, worst, invalid,
    )


@dataclass(frozen=True)
class OperatingPoint:
    r_sq: float
    t_bs: float
    a1_mag: float
    p: int
    negativity: float
    probability: float
    residual: float

    def to_dict(self) -> dict:
        return {
            "r_sq": self.r_sq,
            "t_bs": self.t_bs,
            "a1_mag": self.a1_mag,
            "p": self.p,
            "negativity": self.negativity,
            "probability": self.probability,
            "residual": self.residual,
        }


def _bisect(f, lo: float, hi: float, f_lo: float, tol: float, max_iter: int = 200) -> tuple[float, float]:
    # plain bisection: stop on residual, not on bracket width
    mid, f_mid = lo, f_lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < tol or hi - lo < 1e-16:
            break
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid, f_mid


def _brackets(values: np.ndarray) -> list[int]:
    s = np.sign(values)
    return [i for i in range(len(values) - 1) if np.isfinite(values[i]) and np.isfinite(values[i + 1])
            and s[i] != 0 and s[i] != s[i + 1]]


def solve_max_negativity(
    a1_mag: float,
    p: int = 0,
    r_bracket: tuple[float, float] = (0.0, 1.5),
    t_bracket: tuple[float, float] = (0.02, 0.98),
    steps: tuple[int, int] = (60, 97),
    tol: float = RESIDUAL_TOL,
    tail_eps: float = TAIL_EPS,
) -> list[OperatingPoint]:
    """Locus of ``|a0| = |a1| B_p(r_sq, t_bs)``.

    For each ``t_bs`` on the grid the residual is sampled in ``r_sq``; every
    sign change is bisected to ``|residual| < tol``. Where the locus is too
    narrow in ``t_bs`` for any column to straddle it, grid rows are bisected
    in ``t_bs`` instead. Points come back sorted by ``(t_bs, r_sq)``.

    At ``p = 0`` the factor satisfies ``B_0 < 1`` everywhere, so no root exists
    for ``|a1| <= 1/sqrt(2)``; ``NoRootInBracket`` then reports the largest
    negativity seen on the grid.
    """
    if p < 0:
        raise InvalidParameter("outcome must be >= 0")
    _check_r_range(r_bracket)
    _check_t_range(t_bracket)
    photon = DelocalizedPhoton.from_magnitude(a1_mag)

    def residual(r, t):
        try:
            b = _summary(p, r, t, photon, tail_eps).B_p
        except CutoffOverflow:
            return math.nan
        return max_negativity_residual(photon.a0, photon.a1, b)

    rs, ts = _grid(*r_bracket, steps[0]), _grid(*t_bracket, steps[1])
    vals = np.array([[residual(float(r), float(t)) for t in ts] for r in rs])

    def point(r, t, res):
        s = _summary(p, r, t, photon, tail_eps)
        return OperatingPoint(r, t, float(a1_mag), p, s.negativity, s.probability, float(res))

    points, seen = [], set()
    for j, t in enumerate(ts):
        t = float(t)
        for i in _brackets(vals[:, j]):
            seen.add(j)
            root, res = _bisect(lambda r: residual(r, t), float(rs[i]), float(rs[i + 1]), vals[i, j], tol)
            points.append(point(root, t, res))
    # thin loci can slip between t columns: bisect along t where no column caught them
    for i, r in enumerate(rs):
        r = float(r)
        for j in _brackets(vals[i, :]):
            if j in seen or j + 1 in seen:
                continue
            root, res = _bisect(lambda t: residual(r, t), float(ts[j]), float(ts[j + 1]), vals[i, j], tol)
            points.append(point(r, root, res))
    if not points:
        fin = np.where(np.isfinite(vals), np.abs(vals), np.inf)
        i, j = np.unravel_index(int(np.argmin(fin)), fin.shape)
        where = ""
        if np.isfinite(fin[i, j]):
            neg = _summary(p, float(rs[i]), float(ts[j]), photon, tail_eps).negativity
            where = f" (best negativity {neg:.10f} at r_sq={float(rs[i])!r}, t={float(ts[j])!r})"
        hint = ""
        if p == 0 and photon.mags[1] <= photon.mags[0]:
            hint = "; B_0 < 1 everywhere, so the condition needs |a1| > |a0|"
        raise NoRootInBracket(f"|a0| - |a1| B_{p} has no sign change in the bracket{where}{hint}")
    points.sort(key=lambda pt: (pt.t_bs, pt.r_sq))
    return points


def solve_cascade_balance(
    p: int,
    r_sq1: float,
    bs1: BeamSplitter,
    photon: DelocalizedPhoton,
    bs2: BeamSplitter,
    r_bracket: tuple[float, float] = (0.0, 1.5),
    steps: int = 60,
    tol: float = RESIDUAL_TOL,
    tail_eps: float = TAIL_EPS,
) -> list[OperatingPoint]:
    """Second-stage squeezings where the cascaded state is maximally entangled.

    Solves ``|a0| = |a1| B'_p`` in ``r_sq2``; the returned points carry the
    second-stage ``r_sq`` and ``t_bs``.
    """
    _check_r_range(r_bracket)
    c1 = _cutoff(check_r_sq(r_sq1), tail_eps)

    def residual(r2):
        try:
            bp = b_prime(p, r_sq1, bs1, r2, bs2, photon, c1, _cutoff(r2, tail_eps))
        except (CutoffOverflow, InvalidParameter):
            return math.nan
        return max_negativity_residual(photon.a0, photon.a1, bp)

    rs = _grid(*r_bracket, steps)
    vals = np.array([residual(float(r)) for r in rs])
    out = []
    for i in _brackets(vals):
        root, res = _bisect(residual, float(rs[i]), float(rs[i + 1]), vals[i], tol)
        kw = {"cutoff1": c1, "cutoff2": _cutoff(root, tail_eps)}
        neg = cascade_negativity_closed(p, r_sq1, bs1, photon, root, bs2, **kw)
        prob = cascade_probability_closed(p, r_sq1, bs1, photon, root, bs2, tail_eps, **kw)
        out.append(OperatingPoint(root, bs2.t_bs, abs(photon.a1), p, neg, prob, float(res)))
    if not out:
        raise NoRootInBracket(f"|a0| - |a1| B'_{p} has no sign change for r_sq2 in {r_bracket!r}")
    return out


@dataclass(frozen=True)
class TableRow:
    row: int
    r_sq: float
    t_bs: float
    a1_mag: float
    printed_p0: float
    B0: float
    negativity: float
    p0: float
    numeric_negativity: float
    numeric_p0: float
    negativity_dev: float
    p0_dev: float
    internal_dev: float
    flagged: bool
    erratum: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ReferenceReport:
    rows: tuple[TableRow, ...] = field(default_factory=tuple)

    @property
    def flagged(self) -> list[TableRow]:
        return [r for r in self.rows if r.flagged]

    @property
    def undocumented(self) -> list[TableRow]:
        return [r for r in self.flagged if r.erratum is None]

    @property
    def ok(self) -> bool:
        return not self.undocumented and all(r.internal_dev <= INTERNAL_TOL for r in self.rows)

    def to_list(self) -> list[dict]:
        return [r.to_dict() for r in self.rows]


def verify_reference_points(tol: float = TABLE_TOL, tail_eps: float = TAIL_EPS) -> ReferenceReport:
    """Recompute every tabulated operating point through both evaluation paths."""
    out = []
    for row, r, t, a1, printed in REFERENCE_POINTS:
        photon = DelocalizedPhoton.from_magnitude(a1)
        bs = BeamSplitter.from_t(t)
        cutoff = _cutoff(r, tail_eps)
        s = closed_summary(0, r, bs, photon, cutoff)
        rec = herald_hybrid_numeric(r, bs, photon, 0, tail_eps, cutoff)
        neg_dev = abs(1.0 - s.negativity)
        p0_dev = abs(s.probability - printed)
        internal = max(abs(s.negativity - rec.negativity), abs(s.probability - rec.probability))
        flagged = neg_dev > tol or p0_dev > tol
        out.append(TableRow(
            row, r, t, a1, printed, s.B_p, s.negativity, s.probability,
            rec.negativity, rec.probability, neg_dev, p0_dev, internal, flagged,
            REFERENCE_ERRATA.get(row) if flagged else None,
        ))
    return ReferenceReport(tuple(out))
