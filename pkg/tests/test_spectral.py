import numpy as np
import pytest

from consensus_kit import errors
from consensus_kit.gantmacher import gantmacher_form, match_spectra
from consensus_kit.spectral import (
    build_projection,
    fixed_space_multiplicity,
    helmert_rows,
    jsr_bounds,
    projection_matrix,
    spectral_radius,
    transform_block,
    transform_full,
)
from conftest import random_stochastic
from oracles import all_products


def test_two_entry_projection():
    assert np.allclose(build_projection(2).rows, [[1 / np.sqrt(2), -1 / np.sqrt(2)]], atol=1e-16)


@pytest.mark.parametrize("nk", range(2, 11))
def test_projection_orthonormal_and_kills_ones(nk):
    p = build_projection(nk).rows
    assert np.allclose(p @ p.T, np.eye(nk - 1), atol=1e-14)
    assert np.allclose(p @ np.ones(nk), 0, atol=1e-14)


def test_size_one_block_rejected():
    with pytest.raises(errors.BlockTooSmall):
        build_projection(1)
    assert helmert_rows(1).shape == (0, 1)


def test_two_by_two_closed_form():
    got = transform_block([[0.8, 0.2], [0.3, 0.7]])
    assert got.shape == (1, 1)
    assert abs(got[0, 0] - 0.5) < 1e-14


def test_consensus_block_transforms_to_zero():
    assert abs(transform_block([[0.5, 0.5], [0.5, 0.5]])[0, 0]) < 1e-15


def test_transform_removes_unit_eigenvalue(rng):
    for _ in range(50):
        a = random_stochastic(rng, 4)
        t = transform_block(a)
        assert match_spectra(np.append(np.linalg.eigvals(t), 1.0), np.linalg.eigvals(a)) < 1e-8


def test_transform_full_single_class_equals_block(rng):
    a = random_stochastic(rng, 4)
    assert np.allclose(transform_full(a, gantmacher_form(a)), transform_block(a))


def test_transform_full_direct_sum():
    a = np.zeros((4, 4))
    a[:2, :2] = [[0.8, 0.2], [0.3, 0.7]]
    a[2:, 2:] = [[0.6, 0.4], [0.1, 0.9]]
    t = transform_full(a, gantmacher_form(a))
    assert np.allclose(t, np.diag([0.5, 0.5]), atol=1e-14)


def test_transform_full_against_explicit_projection():
    a = np.array([[0.7, 0.3, 0.0], [0.4, 0.6, 0.0], [0.2, 0.3, 0.5]])
    form = gantmacher_form(a)
    p = projection_matrix(form)
    explicit = p @ form.permute(a) @ p.T
    assert np.allclose(transform_full(a, form), explicit, atol=1e-15)


def test_transform_full_rejects_wrong_size():
    form = gantmacher_form(np.eye(2))
    with pytest.raises(errors.FormMismatch):
        transform_full(np.eye(3), form)


def test_spectral_radius_examples():
    assert spectral_radius([[0.8, 0.2], [0.3, 0.7]]) == pytest.approx(1.0)
    assert spectral_radius(transform_block([[0.8, 0.2], [0.3, 0.7]])) == pytest.approx(0.5)
    assert spectral_radius([[0.3, 0.2], [0.1, 0.1]]) < 1


def test_fixed_space_multiplicity():
    assert fixed_space_multiplicity(np.eye(3)) == 3
    assert fixed_space_multiplicity(np.full((3, 3), 1 / 3)) == 1
    a = np.zeros((5, 5))
    a[:2, :2] = [[0.8, 0.2], [0.3, 0.7]]
    a[2:4, 2:4] = [[0.6, 0.4], [0.1, 0.9]]
    a[4] = [0.1, 0.2, 0.3, 0.1, 0.3]
    assert fixed_space_multiplicity(a) == 2


def test_scalar_set():
    b = jsr_bounds([np.array([[0.5]]), np.array([[0.3]])], 1)
    assert b.lower == pytest.approx(0.5) and b.upper == pytest.approx(0.5)


def test_stochastic_set_is_one(rng):
    mats = [random_stochastic(rng, 3) for _ in range(3)]
    b = jsr_bounds(mats, 4)
    assert all(abs(u - 1) < 1e-12 for u in b.upper_by_length)
    assert all(abs(v - 1) < 1e-12 for v in b.lower_by_length)


def test_bounds_match_enumeration_oracle(rng):
    mats = [rng.random((2, 2)) * 0.7 for _ in range(3)]
    b = jsr_bounds(mats, 3)
    up, lo = np.inf, 0.0
    for k in range(1, 4):
        prods = [p for _, p in all_products(mats, k)]
        up = min(up, max(np.abs(p).sum(axis=1).max() for p in prods) ** (1 / k))
        lo = max(lo, max(np.abs(np.linalg.eigvals(p)).max() for p in prods) ** (1 / k))
        assert b.upper_by_length[k - 1] == pytest.approx(up, rel=1e-12)
        assert b.lower_by_length[k - 1] == pytest.approx(lo, rel=1e-12)
    assert b.lower <= b.upper


def test_witness_realises_lower_bound(rng):
    mats = [rng.random((3, 3)) * 0.5 for _ in range(2)]
    b = jsr_bounds(mats, 4)
    p = np.eye(3)
    for s in b.witness:
        p = mats[s] @ p
    assert spectral_radius(p) ** (1 / len(b.witness)) == pytest.approx(b.lower, rel=1e-10)


def test_budget_exhausted():
    with pytest.raises(errors.BudgetExhausted):
        jsr_bounds([np.eye(2)] * 10, 3, budget=5)


def test_budget_truncates_longer_lengths():
    # 3 + 9 products fit in 30, adding the 27 of length 3 does not
    b = jsr_bounds([np.eye(2)] * 3, 6, budget=30)
    assert b.truncated and b.max_length == 2
