import math

import numpy as np
import pytest
from scipy.special import zeta

from consensus_kit import errors
from consensus_kit.growth import (
    INV_E,
    GeneratorSpec,
    check_delta_threshold,
    designed_pattern,
    gap_length,
    gap_lengths,
    generate_sequence,
    growth_experiment,
    series_partial_sums,
)
from consensus_kit.stochastic import pos_min
from oracles import classes_warshall


def test_gap_lengths_follow_formula():
    assert gap_lengths(7, "log", 1.0).tolist() == [math.ceil(math.log(i + 2)) for i in range(7)]
    assert gap_lengths(7, "log", 1.0).tolist() == [1, 2, 2, 2, 2, 2, 3]
    assert gap_lengths(4, "bounded", 3).tolist() == [3, 3, 3, 3]


def test_loglog_gap_at_one_million():
    assert gap_length(10**6, "loglog", 1.0) == 3
    assert gap_lengths(10**6 + 1, "loglog", 1.0)[-1] == 3


def test_gap_scalar_and_vector_agree():
    for mode in ("bounded", "log", "loglog"):
        vec = gap_lengths(500, mode, 1.7)
        assert vec.tolist() == [gap_length(i, mode, 1.7) for i in range(500)]


def test_unknown_gap_mode():
    with pytest.raises(errors.ParameterOutOfRange):
        gap_length(0, "cubic", 1.0)


def test_bounded_positive_factors_respect_floor():
    seq = generate_sequence(GeneratorSpec(n=4, steps=50, delta=0.1, gap_param=1))
    for t in range(50):
        a = seq.factor(t).entries
        assert (a > 0).all() and pos_min(a) >= 0.1 - 1e-15
        assert np.allclose(a.sum(axis=1), 1.0)


def test_fillers_are_identity():
    seq = generate_sequence(GeneratorSpec(n=3, steps=30, delta=0.2, gap_param=3))
    assert seq.positions.tolist() == list(range(2, 30, 3))
    assert np.array_equal(seq.factor(0).entries, np.eye(3))


def test_generator_is_deterministic():
    spec = GeneratorSpec(n=3, steps=100, delta=0.1, gap_mode="log", seed=7)
    assert np.array_equal(generate_sequence(spec).stack(0, 100), generate_sequence(spec).stack(0, 100))


def test_spec_round_trip():
    pat = tuple(map(tuple, designed_pattern(5, 2, seed=1)))
    spec = GeneratorSpec(n=5, steps=10, delta=0.1, pattern=pat, activation="random")
    assert GeneratorSpec.from_dict(spec.to_dict()) == spec


def test_infeasible_delta():
    with pytest.raises(errors.InvalidDelta):
        GeneratorSpec(n=4, steps=10, delta=0.3)


def test_designed_pattern_classes():
    for g in (1, 2, 3):
        mask = designed_pattern(7, g, seed=g)
        ess = [c for c, e in classes_warshall(mask) if e]
        assert len(ess) == g


def test_random_activation_keeps_pattern_subset():
    pat = designed_pattern(6, 2, seed=3)
    spec = GeneratorSpec(n=6, steps=40, delta=0.1, pattern=tuple(map(tuple, pat)),
                         activation="random", edge_prob=0.3)
    stack = generate_sequence(spec).stack(0, 40)
    assert not np.any((stack > 0) & ~pat)


def test_log_threshold_examples():
    assert series_partial_sums("log", 0.35, 1.0, 10**5).verdict == "converging-trend"
    assert series_partial_sums("log", 0.40, 1.0, 10**5).verdict == "diverging-trend"


def test_log_tail_estimate_against_zeta():
    rep = series_partial_sums("log", 0.35, 1.0, 10**6)
    assert rep.tail_estimate == pytest.approx(zeta(-math.log(0.35)), rel=1e-4)


@pytest.mark.parametrize("delta", [0.05, 0.5, 0.9])
def test_loglog_always_diverges(delta):
    rep = series_partial_sums("loglog", delta, 1.0, 10**5)
    assert rep.verdict == "diverging-trend"
    assert all(g > b for g, b in zip(rep.gains, rep.gain_lower_bounds))


def test_series_samples_increase():
    rep = series_partial_sums("log", 0.3, 1.0, 1000)
    sums = [s for _, _, s in rep.samples]
    assert all(b > a for a, b in zip(sums, sums[1:]))


@pytest.mark.parametrize("bad", [dict(delta=0), dict(delta=1.0), dict(a=-1), dict(terms=3)])
def test_series_parameter_checks(bad):
    args = dict(mode="log", delta=0.3, a=1.0, terms=100)
    args.update(bad)
    with pytest.raises(errors.ParameterOutOfRange):
        series_partial_sums(**args)


@pytest.mark.parametrize("delta,count", [(0.34, 2), (0.25, 4), (0.5, 2), (0.1, 10)])
def test_max_positive_entries(delta, count):
    assert check_delta_threshold(delta)["max_positive_per_row"] == count


def test_inverse_e():
    assert abs(check_delta_threshold()["inv_e"] - math.exp(-1)) < 1e-15
    assert INV_E == math.exp(-1)


def test_bounded_experiment_converges():
    spec = GeneratorSpec(n=3, steps=3000, delta=0.1, gap_param=3)
    out = growth_experiment(spec)
    assert out["converged"] and out["delta_floor_ok"]
    # every window holds one active factor, so its positive minimum is at least delta
    assert out["measured_delta_sum"] >= 0.1 * out["windows_examined"]


def test_log_mode_below_threshold_flags_hypothesis():
    out = growth_experiment(GeneratorSpec(n=2, steps=2000, delta=0.2, gap_mode="log"))
    assert out["hypothesis_fails"]


def test_loglog_experiment_converges_slowly():
    spec = GeneratorSpec(n=3, steps=20000, delta=0.1, gap_mode="loglog")
    out = growth_experiment(spec, eps_c=1e-6)
    assert out["converged"] and out["max_spread"] <= 1e-6
