import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samplesched.instance import Permutation
from samplesched.numerics import rng_stream
from samplesched.policies import (Policy, realized_cost, realized_costs, rnd_orders, rnd_schedule,
                                  sam_orders, sam_precedes, sam_schedule, wspt_schedule)


def test_sam_orders_by_sampled_ratio():
    assert sam_schedule([1, 1], [2.0, 1.0]) == Permutation((2, 1))
    assert sam_schedule([1, 1], [1.0, 2.0]) == Permutation((1, 2))


def test_sam_zero_sample_runs_first():
    perm = sam_schedule([1.0] * 5, [1e-6] * 4 + [0.0])
    assert perm.order[0] == 5


def test_sam_weighted_translation():
    assert sam_schedule([1, 2], [1.0, 2.001]) == Permutation((1, 2))
    assert sam_schedule([1, 2], [1.0, 1e4 + 1.001]) == Permutation((1, 2))
    assert sam_schedule([1, 2], [1e4, 2.001]) == Permutation((2, 1))


def test_sam_tie_rule():
    # tied infinities: heavier first
    assert sam_schedule([1, 3], [0.0, 0.0]) == Permutation((2, 1))
    # equal ratios: heavier first, then lower id
    assert sam_schedule([1, 2], [1.0, 2.0]) == Permutation((2, 1))
    assert sam_schedule([2, 2, 1], [2.0, 2.0, 1.0]) == Permutation((1, 2, 3))


def test_sam_precedes_matches_schedule():
    rng = np.random.default_rng(999)
    for _ in range(200):
        w = rng.choice([1.0, 2.0, 3.0], 2)
        p = rng.choice([0.0, 1.0, 2.0, 3.0], 2)
        first = sam_schedule(w, p).order[0]
        assert sam_precedes(w[0], p[0], 1, w[1], p[1], 2) == (first == 1)


def test_rnd_single_job():
    assert rnd_schedule(1, rng_stream(0, 0)) == Permutation((1,))
    with pytest.raises(ValueError):
        rnd_schedule(0, rng_stream(0, 0))


def test_rnd_replays():
    assert rnd_schedule(6, rng_stream(11, 2)) == rnd_schedule(6, rng_stream(11, 2))


def test_rnd_uniform():
    N = 600_000
    orders = rnd_orders(3, N, rng_stream(5, 0))
    codes = orders[:, 0] * 9 + orders[:, 1] * 3 + orders[:, 2]
    counts = {c: np.sum(codes == c) for c in np.unique(codes)}
    assert len(counts) == 6
    p = 1 / 6
    stderr = math.sqrt(p * (1 - p) / N)
    for c, k in counts.items():
        assert abs(k / N - p) <= 4 * stderr, c


def test_wspt():
    assert wspt_schedule([1, 1], [3.0, 1.0]) == Permutation((2, 1))
    assert wspt_schedule([1, 5], [2.0, 0.0]).order[0] == 2


def test_wspt_is_optimal():
    rng = np.random.default_rng(999)
    for n in (2, 4, 6):
        w = rng.uniform(0.1, 10, n)
        p = rng.uniform(0.0, 10, n)
        best = min(realized_cost(w, p, Permutation(perm))
                   for perm in itertools.permutations(range(1, n + 1)))
        assert math.isclose(realized_cost(w, p, wspt_schedule(w, p)), best, rel_tol=1e-12)


def test_realized_cost():
    assert realized_cost([1, 1], [1.0, 2.0], Permutation((1, 2))) == 4.0
    assert realized_cost([1, 1], [1.0, 2.0], Permutation((2, 1))) == 5.0
    assert realized_cost([3.0], [2.5], Permutation((1,))) == 7.5
    with pytest.raises(ValueError):
        realized_cost([1, 1], [1.0], Permutation((1, 2)))


def test_batch_forms_agree_with_single():
    rng = np.random.default_rng(999)
    w = rng.uniform(0.1, 10, 5)
    samples = rng.exponential(size=(50, 5))
    orders = sam_orders(w, samples)
    costs = realized_costs(w, samples, orders)
    for row in range(50):
        perm = sam_schedule(w, samples[row])
        assert list(perm.indices) == list(orders[row])
        assert math.isclose(costs[row], realized_cost(w, samples[row], perm), rel_tol=1e-12)


def test_policy_parse():
    assert Policy.parse('SAM') is Policy.SAM
    assert Policy.parse(Policy.RND) is Policy.RND
    assert str(Policy.WSEPT) == 'wsept'
    with pytest.raises(ValueError):
        Policy.parse('lpt')


@settings(deadline=None, max_examples=50)
@given(samples=st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 100.0)), min_size=1, max_size=8),
       weights=st.lists(st.floats(0.1, 10.0), min_size=8, max_size=8),
       k=st.integers(-10, 10))
def test_sam_scale_invariant(samples, weights, k):
    w = weights[:len(samples)]
    c = 2.0 ** k
    assert sam_schedule(w, samples) == sam_schedule(w, [c * s for s in samples])
