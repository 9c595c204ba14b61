import numpy as np
import pytest

from consensus_kit import errors
from consensus_kit.gantmacher import (
    communicating_classes,
    diagonal_blocks,
    extract_block,
    gantmacher_form,
    spectrum_union_check,
)
from consensus_kit.stochastic import ZeroPattern, pattern_of
from conftest import random_stochastic
from oracles import classes_warshall

CHAIN = [[1, 0, 0], [0.5, 0.5, 0], [0, 0.5, 0.5]]


def test_identity_gives_singletons():
    form = gantmacher_form(np.eye(4))
    assert form.p == form.g == 4
    assert all(len(c) == 1 for c in form.partition.classes)


def test_positive_matrix_single_class():
    form = gantmacher_form(np.full((3, 3), 1 / 3))
    assert form.p == form.g == 1


def test_chain_example():
    form = gantmacher_form(CHAIN)
    assert form.g == 1 and form.p == 3
    assert form.partition.classes[0] == (0,)
    assert form.partition.essential == (True, False, False)
    assert form.permutation == (0, 1, 2)


def test_essential_classes_move_first():
    form = gantmacher_form([[0.5, 0, 0.5], [0, 1, 0], [0, 0, 1]])
    assert form.permutation[-1] == 0
    assert set(form.permutation[:2]) == {1, 2}
    assert form.g == 2


def test_block_read_off():
    form = gantmacher_form(CHAIN)
    assert extract_block(CHAIN, form, 1, 0).tolist() == [[0.5]]
    assert extract_block(CHAIN, form, 2, 0).tolist() == [[0.0]]


def test_block_above_diagonal_rejected():
    form = gantmacher_form(CHAIN)
    with pytest.raises(errors.BlockAboveDiagonal):
        extract_block(CHAIN, form, 0, 1)


def test_missing_diagonal():
    with pytest.raises(errors.MissingPositiveDiagonal):
        gantmacher_form([[0, 1], [0.5, 0.5]])


def test_triangular_spectrum():
    a = [[1, 0], [0.5, 0.5]]
    form = gantmacher_form(a)
    assert spectrum_union_check(a, form)
    eig = sorted(np.concatenate([np.linalg.eigvals(b) for b in diagonal_blocks(a, form)]).real)
    assert eig == pytest.approx([0.5, 1.0])


def test_classes_match_warshall_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(1, 10))
        mask = rng.random((n, n)) < 0.2
        np.fill_diagonal(mask, True)
        pat = ZeroPattern(mask)
        expected = classes_warshall(mask)
        assert communicating_classes(pat) == sorted((c for c, _ in expected), key=lambda c: c[0])
        form = gantmacher_form(mask.astype(float))
        flags = dict(zip(form.partition.classes, form.partition.essential))
        assert flags == dict(expected)


def test_permuted_matrix_block_lower_triangular(rng):
    for _ in range(200):
        n = int(rng.integers(2, 10))
        a = random_stochastic(rng, n, density=0.25, positive_diagonal=True)
        form = gantmacher_form(a)
        grid = form.block_pattern()
        for k in range(form.p):
            assert grid[k][k] != "zero"
            for l in range(k + 1, form.p):
                assert grid[k][l] == "zero"
        # essential classes first, with nothing outside their own block
        for k in range(form.g):
            assert all(grid[k][l] == "zero" for l in range(form.p) if l != k)


def test_random_block_triangular_spectrum(rng):
    a = np.zeros((4, 4))
    a[:2, :2] = random_stochastic(rng, 2)
    a[2:, :] = rng.random((2, 4))
    a[2:, :] /= a[2:].sum(axis=1, keepdims=True)
    form = gantmacher_form(a)
    assert spectrum_union_check(a, form, tol=1e-8)


def test_to_dict_keys():
    d = gantmacher_form(CHAIN).to_dict()
    assert list(d) == ["classes", "essential", "g", "p", "permutation", "block_pattern"]


def test_pattern_input_equivalent():
    a = np.array(CHAIN)
    assert gantmacher_form(a).permutation == gantmacher_form(pattern_of(a).mask.astype(float)).permutation
