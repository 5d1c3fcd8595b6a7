import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from majlab.dynamics import StateVector
from majlab.graph import sample_gnp
from majlab.init_config import (
    InitialLaw,
    check_events,
    compute_stats,
    n_star_v_rate,
    sample_initial,
    stats_from_counts,
)
from majlab.verifiers import CALIBRATED_DELTA

UNIFORM3 = InitialLaw(("1/3", "1/3", "1/3"))


@pytest.mark.parametrize("probs", [(1, 0, 0), (0.5, 0.6), (-0.1, 1.1), ()])
def test_invalid_laws(probs):
    with pytest.raises(ValueError):
        InitialLaw(probs)


def test_float_sum_tolerance():
    InitialLaw((0.1, 0.2, 0.7))
    with pytest.raises(ValueError):
        InitialLaw((0.1, 0.2, 0.7 + 1e-9))


def test_exact_leaders():
    assert UNIFORM3.leaders == (1, 2, 3)
    assert InitialLaw((0.4, 0.35, 0.25)).leaders == (1,)
    assert InitialLaw(("2/5", "2/5", "1/5")).leaders == (1, 2)
    assert InitialLaw.uniform(4).probs == (Fraction(1, 4),) * 4


def test_sample_conserves_n():
    s = sample_initial(6, InitialLaw((0.5, 0.5)), 3)
    assert s.counts().sum() == 6
    assert s.round == 0


def test_sample_deterministic():
    a = sample_initial(1000, UNIFORM3, 17)
    b = sample_initial(1000, UNIFORM3, 17)
    assert a == b


def test_sample_counts_concentrate():
    n = 100_000
    sd = math.sqrt(n * (1 / 3) * (2 / 3))
    ok = 0
    for seed in range(1000):
        c = sample_initial(n, UNIFORM3, seed).counts()
        ok += bool(np.all(np.abs(c - n / 3) <= 4 * sd))
    assert ok >= 990


def test_sample_proportions_non_uniform():
    law = InitialLaw((0.4, 0.35, 0.25))
    c = sample_initial(200_000, law, 1).counts() / 200_000
    assert np.allclose(c, [0.4, 0.35, 0.25], atol=4 * math.sqrt(0.25 / 200_000))


def test_singleton_leader_stats():
    st_ = stats_from_counts((40, 35, 25), InitialLaw((0.4, 0.35, 0.25)))
    assert st_.leaders == (1,)
    assert st_.k0 == 1
    assert st_.n_star == 40
    assert st_.c == (0.0,)


def test_two_state_centering():
    st_ = stats_from_counts((7, 3), InitialLaw(("1/2", "1/2")))
    assert st_.n_star == 10
    assert st_.c == pytest.approx((2 / math.sqrt(10), -2 / math.sqrt(10)), abs=1e-12)
    assert st_.c[0] == pytest.approx(0.6325, abs=1e-4)


def test_compute_stats_requires_round_zero():
    s = StateVector(np.array([1, 2, 1]), 2, round=1)
    with pytest.raises(ValueError):
        compute_stats(s, InitialLaw((0.5, 0.5)))


@settings(max_examples=60)
@given(st.lists(st.integers(0, 10_000), min_size=2, max_size=6))
def test_c_sums_to_zero_and_orders_like_counts(counts):
    k = len(counts)
    law = InitialLaw.uniform(k)
    s = stats_from_counts(counts, law)
    assert sum(s.counts) == sum(counts)
    assert abs(sum(s.c)) <= 1e-9
    by_c = s.leaders_by_c()
    by_n = sorted(s.leaders, key=lambda i: (-counts[i - 1], i))
    assert by_c == by_n


def test_e0_at_exact_expectation():
    n = 10_000
    law = InitialLaw(("1/4", "1/4", "1/2"))
    st_ = stats_from_counts((2500, 2500, 5000), law)
    ev = check_events(st_, n, law, 0.1)
    assert ev.e0 and ev.p0


def test_e0_false_far_from_expectation():
    n = 10_000
    st_ = stats_from_counts((5000, 2500, 2500), UNIFORM3)
    assert not check_events(st_, n, UNIFORM3, 0.1).e0


def test_small_gap_fails_event():
    # n* = 10^6, counts chosen so c = (0.01, -0.01)
    law = InitialLaw(("1/2", "1/2"))
    st_ = stats_from_counts((500_010, 499_990), law)
    assert st_.c == pytest.approx((0.01, -0.01))
    ev = check_events(st_, 1_000_000, law, 0.1)
    assert not ev.e_delta_n
    assert not ev.event_1 and not ev.event_2


def test_events_require_positive_delta():
    st_ = stats_from_counts((5, 5), InitialLaw((0.5, 0.5)))
    with pytest.raises(ValueError):
        check_events(st_, 10, InitialLaw((0.5, 0.5)), 0.0)


def test_check_events_idempotent():
    st_ = stats_from_counts((33_500, 33_100, 33_400), UNIFORM3)
    a = check_events(st_, 100_000, UNIFORM3, CALIBRATED_DELTA)
    assert a == check_events(st_, 100_000, UNIFORM3, CALIBRATED_DELTA)


def test_anti_concentration_at_calibrated_delta():
    n = 100_000
    hits = sum(
        check_events(compute_stats(sample_initial(n, UNIFORM3, s), UNIFORM3), n, UNIFORM3, CALIBRATED_DELTA).e_delta_n
        for s in range(1000)
    )
    assert hits / 1000 >= 0.9


def test_n_star_v_rate_near_one():
    g = sample_gnp(3000, 0.3, 4)
    s0 = sample_initial(3000, UNIFORM3, 5)
    assert n_star_v_rate(g, s0, UNIFORM3, 0.3) == 1.0
    law = InitialLaw(("2/5", "2/5", "1/5"))
    s1 = sample_initial(3000, law, 6)
    assert n_star_v_rate(g, s1, law, 0.3) >= 0.99
