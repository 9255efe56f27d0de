import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import unitary_group

from heralded.entanglement import max_negativity_residual, negativity_closed, schmidt_negativity
from heralded.errors import NotNormalized


def two_branch(a0, a1, b, dim=6, seed=0):
    # a0|u>|1> + a1 b |v>|0> with orthonormal u, v, normalized
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2)))
    m = np.zeros((dim, 2), dtype=complex)
    m[:, 1] = a0 * q[:, 0]
    m[:, 0] = a1 * b * q[:, 1]
    return m / np.linalg.norm(m)


def test_bell_and_product():
    bell = np.array([[1, 0], [0, 1]]) / math.sqrt(2)
    assert schmidt_negativity(bell).value == pytest.approx(1.0, abs=1e-15)
    prod = np.outer([0.6, 0.8], [1, 0])
    res = schmidt_negativity(prod)
    assert res.value == pytest.approx(0.0, abs=1e-15) and res.rank == 1


@given(st.floats(0.05, 0.95), st.floats(0.01, 20.0))
def test_closed_matches_schmidt(a1, b):
    a0 = math.sqrt(1 - a1 * a1)
    assert abs(negativity_closed(a0, a1, b) - schmidt_negativity(two_branch(a0, a1, b)).value) < 1e-10


@given(st.floats(0.05, 0.95), st.floats(0.01, 20.0))
def test_swap_symmetry(a1, b):
    a0 = math.sqrt(1 - a1 * a1)
    assert negativity_closed(a0, a1, b) == pytest.approx(negativity_closed(a1, a0, 1 / b), abs=1e-14)


def test_maximum_on_residual_zero():
    a0, a1 = 0.8, 0.6
    b = a0 / a1
    assert max_negativity_residual(a0, a1, b) == pytest.approx(0.0, abs=1e-15)
    assert negativity_closed(a0, a1, b) == pytest.approx(1.0)
    assert negativity_closed(a0, a1, 0.5 * b) < 1


def test_local_unitary_invariance():
    m = two_branch(0.7, math.sqrt(0.51), 0.9, dim=5, seed=3)
    u = unitary_group.rvs(5, random_state=7)
    v = unitary_group.rvs(2, random_state=8)
    assert schmidt_negativity(u @ m @ v.T).value == pytest.approx(schmidt_negativity(m).value, abs=1e-12)


def test_unnormalized_rejected():
    with pytest.raises(NotNormalized):
        schmidt_negativity(np.eye(2))
    with pytest.raises(NotNormalized):
        schmidt_negativity(np.ones(3))


def test_zero_weights():
    assert negativity_closed(0.0, 0.0, 1.0) == 0.0
    assert negativity_closed(0.8, 0.6, 0.0) == 0.0
