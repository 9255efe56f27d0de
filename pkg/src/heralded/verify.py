"""Combined self-check: beam-splitter forms, reference points, normalization, errata."""

from __future__ import annotations

import math

from .analytic import errata_report, success_probability_closed
from .cascade import cascade_errata
from .fock import TAIL_EPS, DelocalizedPhoton, choose_cutoff
from .herald import herald_distribution, herald_hybrid_numeric
from .interferometer import BeamSplitter, validate_printed_forms
from .search import BALANCED, verify_reference_points

BS_SWEEP = (0.05, 0.2, 0.35, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)
L_MAX = 12

# (r_sq, t_bs, |a1|)
NORMALIZATION_POINTS = (
    (0.0, 0.5, 0.6),
    (0.1, 0.3, BALANCED),
    (0.4, 0.6, 0.8),
    (0.8, 0.7, BALANCED),
    (1.2, 0.9, 0.3),
)
NORM_TOL = 1e-8

ERRATA_POINTS = ((0.5, 0.6, 0.6), (0.9, 0.35, BALANCED))

# stage-1 (r_sq, t_bs), stage-2 (r_sq, t_bs), |a1|
CASCADE_POINTS = (
    ((0.5, 0.6), (0.5, 0.6), BALANCED),
    ((0.5, 0.6), (0.4, 0.7), 0.6),
)

# misprints that are understood and documented; anything else fails the check
DOCUMENTED = {
    "phi-odd": "odd-outcome Phi series index must be b_2(k+m)",
    "weight-odd": "follows from the phi-odd index error",
    "cascade-bprime-odd": "odd-outcome B' needs L_2m+1, not L_2m",
    "cascade-vacuum-weights": "unit weights hold only when both stages share B_0",
    "reference-point-4": "tabulated P0 transposes two digits",
}


def _documented(entry: dict) -> bool:
    form = entry["form"]
    if form == "cascade-vacuum-weights":
        prm = entry["params"]
        return (prm["r_sq1"], prm["t_bs1"]) != (prm["r_sq2"], prm["t_bs2"])
    return form in DOCUMENTED


def normalization_sweep(tail_eps: float = TAIL_EPS) -> list[dict]:
    out = []
    for r_sq, t, a1 in NORMALIZATION_POINTS:
        bs, photon = BeamSplitter.from_t(t), DelocalizedPhoton.from_magnitude(a1)
        cutoff = choose_cutoff(r_sq, tail_eps)
        numeric = math.fsum(rec.probability for rec in herald_distribution(r_sq, bs, photon, None, tail_eps, cutoff))
        closed = math.fsum(success_probability_closed(p, r_sq, bs, photon, cutoff) for p in range(cutoff + 2))
        dev = max(abs(1.0 - numeric), abs(1.0 - closed))
        out.append({
            "r_sq": r_sq, "t_bs": t, "a1_mag": a1, "cutoff": cutoff,
            "numeric_sum": numeric, "closed_sum": closed, "deviation": dev,
            "flagged": dev > max(NORM_TOL, 10 * tail_eps),
        })
    return out


def collect_errata(tail_eps: float = TAIL_EPS) -> list[dict]:
    out = []
    for r_sq, t, a1 in ERRATA_POINTS:
        out += errata_report(r_sq, BeamSplitter.from_t(t), DelocalizedPhoton.from_magnitude(a1), tail_eps=tail_eps)
    for (r1, t1), (r2, t2), a1 in CASCADE_POINTS:
        photon = DelocalizedPhoton.from_magnitude(a1)
        bs1, bs2 = BeamSplitter.from_t(t1), BeamSplitter.from_t(t2)
        stage1 = herald_hybrid_numeric(r1, bs1, photon, 0, tail_eps)
        out += cascade_errata(stage1, r1, bs1, photon, r2, bs2, tail_eps=tail_eps)
    for e in out:
        e["documented"] = _documented(e)
    return out


def run_verification(tail_eps: float = TAIL_EPS) -> dict:
    """Every check in one deterministic report; ``ok`` is the overall verdict."""
    forms = [validate_printed_forms(BeamSplitter.from_t(t), L_MAX) for t in BS_SWEEP]
    table = verify_reference_points(tail_eps=tail_eps)
    norm = normalization_sweep(tail_eps)
    errata = collect_errata(tail_eps)
    for row in table.flagged:
        errata.append({
            "form": f"reference-point-{row.row}", "p": 0,
            "params": {"r_sq": row.r_sq, "t_bs": row.t_bs, "a1_mag": row.a1_mag},
            "deviation": max(row.p0_dev, row.negativity_dev),
            "documented": row.erratum is not None and _documented({"form": f"reference-point-{row.row}"}),
        })
    failures = (
        [f"printed-forms t={r.t_bs!r} l={e.l} {e.form}" for r in forms for e in r.flagged]
        + [f"reference point {r.row} internal agreement {r.internal_dev:.3e}" for r in table.rows if r.internal_dev > 1e-9]
        + [f"normalization r_sq={n['r_sq']!r} t={n['t_bs']!r}" for n in norm if n["flagged"]]
        + [f"{e['form']} p={e['p']}" for e in errata if not e["documented"]]
    )
    return {
        "printed_forms": [{"t_bs": r.t_bs, "max_dev": r.max_dev, "entries": r.to_list()} for r in forms],
        "reference_points": table.to_list(),
        "normalization": norm,
        "errata": errata,
        "failures": failures,
        "ok": not failures,
    }
