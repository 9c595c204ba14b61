import dataclasses

import numpy as np
import pytest

from consensus_kit import errors
from consensus_kit.schedule import (
    blocks_uniform,
    detect_schedule,
    is_closed,
    verify_schedule,
    window_accumulations,
    window_pattern,
)
from consensus_kit.sources import ArraySequence, constant_sequence
from consensus_kit.stochastic import ZeroPattern, backward_accumulate, forward_accumulate
from conftest import random_stochastic
from oracles import closure_warshall


def test_constant_positive_consecutive_times():
    seq = constant_sequence(np.full((3, 3), 1 / 3), 40)
    s = detect_schedule(seq)
    assert s.stabilized
    assert np.all(np.diff(s.times) == 1)
    assert s.common_pattern.mask.all()


def test_constant_sequence_matches_closure(rng):
    for _ in range(40):
        n = int(rng.integers(2, 7))
        a = random_stochastic(rng, n, density=0.2, positive_diagonal=True)
        s = detect_schedule(constant_sequence(a, 200))
        assert s.stabilized
        assert np.array_equal(s.common_pattern.mask, closure_warshall(a > 0))
        assert max(np.diff(s.times)) <= max(1, n - 1)


def test_alternating_pair_windows_of_two():
    # one factor points up the chain, the other down; their products fill in
    a = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]
    b = [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]
    seq = ArraySequence([a, b] * 60)
    s = detect_schedule(seq)
    assert s.stabilized
    assert s.common_pattern.mask.all()
    ok, bad = verify_schedule(seq, s)
    assert ok and bad is None


def test_self_consistency_and_perturbation():
    a = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]
    b = [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]
    seq = ArraySequence([a, b] * 60)
    s = detect_schedule(seq)
    assert verify_schedule(seq, s)[0]
    times = list(s.times)
    times.insert(2, times[1] + 1)
    bad = dataclasses.replace(s, times=tuple(times))
    ok, idx = verify_schedule(seq, bad)
    assert not ok and idx == 1


def test_consensus_sequence_any_times():
    k = np.array([[0.3, 0.7], [0.3, 0.7]])
    s = detect_schedule(constant_sequence(k, 10))
    custom = dataclasses.replace(s, times=(0, 3, 4, 9))
    assert verify_schedule(constant_sequence(k, 10), custom)[0]


def test_window_accumulations_cross_check(rng):
    mats = [random_stochastic(rng, 3, density=0.4, positive_diagonal=True) for _ in range(120)]
    seq = ArraySequence(mats)
    s = detect_schedule(seq)
    for (lo, hi), w in zip(s.windows, window_accumulations(seq, s)):
        assert np.allclose(w.entries, backward_accumulate(seq, lo, hi).entries)


def test_consecutive_times_give_raw_factors():
    a = np.array([[0.8, 0.2], [0.3, 0.7]])
    seq = constant_sequence(a, 10)
    s = detect_schedule(seq)
    for w in window_accumulations(seq, s):
        assert np.allclose(w.entries, a)


def test_forward_direction():
    a = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]
    seq = constant_sequence(a, 50)
    s = detect_schedule(seq, direction="forward")
    assert s.direction == "forward"
    w = window_accumulations(seq, s)[0]
    lo, hi = s.windows[0]
    assert np.allclose(w.entries, forward_accumulate(seq, lo, hi).entries)
    assert window_pattern(seq, lo, hi, direction="forward") == s.common_pattern


def test_short_horizon_warns():
    seq = constant_sequence(np.eye(2), 3)
    s = detect_schedule(seq)
    assert not s.stabilized
    assert any("HorizonTooSmall" in w for w in s.warnings)


def test_missing_diagonal_rejected():
    with pytest.raises(errors.MissingPositiveDiagonal):
        detect_schedule(constant_sequence([[0, 1], [1, 0]], 10))


def test_bad_direction():
    with pytest.raises(ValueError):
        detect_schedule(constant_sequence(np.eye(2), 10), direction="sideways")


def test_closed_pattern_blocks_uniform(rng):
    for _ in range(50):
        n = int(rng.integers(2, 8))
        mask = rng.random((n, n)) < 0.2
        np.fill_diagonal(mask, True)
        closed = ZeroPattern(closure_warshall(mask))
        assert is_closed(closed)
        assert blocks_uniform(closed)


def test_to_dict_has_pattern_and_form():
    s = detect_schedule(constant_sequence(np.full((2, 2), 0.5), 10))
    d = s.to_dict()
    assert d["pattern"] == [[1, 1], [1, 1]]
    assert d["gantmacher"]["g"] == 1


def _sparse_pair_sequence(seed, steps=4000):
    rng = np.random.default_rng(seed)
    mask = rng.random((steps, 2, 2)) < 0.2
    mask[:, [0, 1], [0, 1]] = True
    w = rng.random((steps, 2, 2)) * mask
    return ArraySequence(w / w.sum(axis=2, keepdims=True))


def test_short_span_is_raised_when_windows_gain_entries():
    # with n = 2 the default span of 4 often ends a window before it is full
    seq = _sparse_pair_sequence(30)
    fixed = detect_schedule(seq, adaptive=False)
    assert any("gained entries" in w for w in fixed.warnings)
    s = detect_schedule(seq)
    assert s.confirm > fixed.confirm
    assert any("confirmation span raised" in w for w in s.warnings)
    assert s.stabilized and s.n_windows >= 5 and s.common_pattern.mask.all()
    assert verify_schedule(seq, s)[0]
