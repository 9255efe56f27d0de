import math

import numpy as np
import pytest

from heralded.analytic import phi_closed, psi_closed
from heralded.cascade import (
    b_prime,
    cascade_closed,
    cascade_distribution,
    cascade_errata,
    cascade_fidelity,
    cascade_negativity_closed,
    cascade_numeric,
    cascade_probability_closed,
    factor_cv_state,
)
from heralded.entanglement import schmidt_negativity
from heralded.errors import BranchFactorizationFailure, InvalidParameter
from heralded.fock import DelocalizedPhoton, choose_cutoff, fidelity
from heralded.herald import herald_hybrid_numeric
from heralded.interferometer import BeamSplitter
from heralded.search import BALANCED, solve_cascade_balance

R1, T1, R2, T2 = 0.5, 0.6, 0.4, 0.7


@pytest.fixture(scope="module")
def setup():
    photon = DelocalizedPhoton.from_magnitude(0.6)
    bs1, bs2 = BeamSplitter.from_t(T1), BeamSplitter.from_t(T2)
    stage1 = herald_hybrid_numeric(R1, bs1, photon, 0)
    return photon, bs1, bs2, stage1


@pytest.mark.parametrize("p", range(5))
def test_closed_matches_three_mode_pipeline(setup, p):
    photon, bs1, bs2, stage1 = setup
    num, prob = cascade_numeric(stage1, R2, bs2, p)
    closed = cascade_closed(p, R1, bs1, photon, R2, bs2)
    assert cascade_fidelity(num, closed) >= 1 - 1e-9
    assert prob == pytest.approx(cascade_probability_closed(p, R1, bs1, photon, R2, bs2), abs=1e-12)
    neg = cascade_negativity_closed(p, R1, bs1, photon, R2, bs2)
    assert abs(schmidt_negativity(num).value - neg) < 1e-10
    assert neg > 0


@pytest.mark.parametrize("p", range(5))
def test_mode1_branches_are_stage1_states(setup, p):
    photon, bs1, bs2, stage1 = setup
    num, _ = cascade_numeric(stage1, R2, bs2, p)
    assert fidelity(num.branch1[0], stage1.state.psi) >= 1 - 1e-10
    assert fidelity(num.branch2[0], stage1.state.phi) >= 1 - 1e-10
    # mode-2 factors are the second-stage branches, swapped
    psi2, _ = psi_closed(p, R2, bs2, choose_cutoff(R2))
    phi2, _ = phi_closed(p, R2, bs2, choose_cutoff(R2))
    assert fidelity(num.branch1[1], phi2) >= 1 - 1e-10
    assert fidelity(num.branch2[1], psi2) >= 1 - 1e-10


def test_probabilities_complete(setup):
    _, _, bs2, stage1 = setup
    assert abs(math.fsum(cascade_distribution(stage1, R2, bs2)) - 1) < 1e-8


def test_equal_stages_balanced_vacuum_is_maximal():
    photon = DelocalizedPhoton.from_magnitude(BALANCED)
    bs = BeamSplitter.from_t(T1)
    assert b_prime(0, R1, bs, R1, bs, photon) == 1.0
    stage1 = herald_hybrid_numeric(R1, bs, photon, 0)
    num, _ = cascade_numeric(stage1, R1, bs, 0)
    assert abs(schmidt_negativity(num).value - 1) < 1e-6


def test_solved_balance_point():
    photon = DelocalizedPhoton.from_magnitude(BALANCED)
    bs1, bs2 = BeamSplitter.from_t(0.6), BeamSplitter.from_t(0.65)
    pts = solve_cascade_balance(0, 0.5, bs1, photon, bs2)
    assert pts
    stage1 = herald_hybrid_numeric(0.5, bs1, photon, 0)
    for pt in pts:
        num, _ = cascade_numeric(stage1, pt.r_sq, bs2, 0)
        assert abs(schmidt_negativity(num).value - 1) < 1e-6


def test_errata_for_unequal_stages(setup):
    photon, bs1, bs2, stage1 = setup
    forms = {(e["form"], e["p"]) for e in cascade_errata(stage1, R1, bs1, photon, R2, bs2)}
    assert ("cascade-vacuum-weights", 0) in forms
    assert ("cascade-bprime-odd", 1) in forms
    bs = BeamSplitter.from_t(T1)
    same = cascade_errata(herald_hybrid_numeric(R1, bs, photon, 0), R1, bs, photon, R1, bs)
    assert all(e["form"] != "cascade-vacuum-weights" for e in same)


def test_rank_three_rejected():
    with pytest.raises(BranchFactorizationFailure):
        factor_cv_state(np.eye(3) / math.sqrt(3), 0)


def test_requires_vacuum_outcome_stage(setup):
    photon, bs1, bs2, _ = setup
    with pytest.raises(InvalidParameter):
        cascade_numeric(herald_hybrid_numeric(R1, bs1, photon, 1), R2, bs2, 0)
