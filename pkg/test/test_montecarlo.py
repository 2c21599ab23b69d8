import math

import numpy as np
import pytest

from samplesched.distributions import Deterministic, Exponential, FiniteDiscrete, UniformInterval
from samplesched.errors import NotDiscrete, TooLarge
from samplesched.instance import Instance, Job, h_cost, l_cost
from samplesched.montecarlo import (BLOCK_SIZE, Estimate, enumerate_rog, estimate_cost,
                                    estimate_regret, estimate_rog, exact_discrete_cost,
                                    exact_discrete_opt, exact_discrete_regret)
from samplesched.pairwise import cost_from_pairwise, pairwise_matrix
from samplesched.policies import Policy
from test.test_pairwise import random_discrete_instance


def two_exponentials():
    return Instance((Job(1.0, Exponential(2.0)), Job(1.0, Exponential(1.0))))


def small_discrete():
    return Instance((Job(1.0, FiniteDiscrete(((1.0, 0.5), (3.0, 0.5)))),
                     Job(2.0, FiniteDiscrete(((0.0, 0.25), (2.0, 0.5), (5.0, 0.25)))),
                     Job(1.5, Deterministic(1.5))))


def within(est : Estimate, exact : float, width : float = 4.0) -> bool:
    return abs(est.mean - exact) <= width * est.stderr + 1e-12 * abs(exact)


def test_wsept_on_deterministic_instance():
    inst = Instance((Job(1.0, Deterministic(2.0)), Job(3.0, Deterministic(1.0)), Job(2.0, Deterministic(4.0))))
    est = estimate_cost(inst, Policy.WSEPT, 1000, seed=1)
    assert math.isclose(est.mean, l_cost(inst), rel_tol=1e-15)
    assert est.stderr == 0.0
    assert est.n_trials == 1000 and est.seed == 1


def test_sam_two_exponentials():
    est = estimate_cost(two_exponentials(), Policy.SAM, 1_000_000, seed=2024)
    assert within(est, 2 + 0.5 / 3)


def test_rnd_is_midpoint():
    inst = Instance((Job(1.0, Exponential(2.0)), Job(3.0, UniformInterval(0.0, 2.0)), Job(0.5, Deterministic(1.5))))
    est = estimate_cost(inst, Policy.RND, 1_000_000, seed=7)
    assert within(est, (l_cost(inst) + h_cost(inst)) / 2)


def test_wspt_regret_is_zero():
    est = estimate_regret(two_exponentials(), Policy.WSPT, 10_000, seed=3)
    assert est.mean == 0.0 and est.stderr == 0.0


def test_rnd_regret_matches_enumeration():
    est = estimate_regret(small_discrete(), Policy.RND, 50_000, seed=4)
    assert est.mean > 0
    assert within(est, exact_discrete_regret(small_discrete(), Policy.RND))


def test_reproducible_and_worker_independent():
    inst = small_discrete()
    n = BLOCK_SIZE * 2 + 123
    a = estimate_cost(inst, Policy.SAM, n, seed=99)
    b = estimate_cost(inst, Policy.SAM, n, seed=99)
    c = estimate_cost(inst, Policy.SAM, n, seed=99, workers=3)
    assert a == b == c
    assert estimate_cost(inst, Policy.SAM, n, seed=100) != a


def test_estimate_matches_enumeration():
    inst = small_discrete()
    for policy in (Policy.SAM, Policy.RND, Policy.WSEPT, Policy.WSPT):
        est = estimate_cost(inst, policy, 200_000, seed=5)
        assert within(est, exact_discrete_cost(inst, policy)), policy
    est = estimate_regret(inst, Policy.SAM, 200_000, seed=6)
    assert within(est, exact_discrete_regret(inst, Policy.SAM))


def test_estimate_rog():
    inst = two_exponentials()
    est = estimate_rog(inst, Policy.SAM, 500_000, seed=8)
    assert within(est, 1 / 3)
    assert math.isclose(est.stderr * (h_cost(inst) - l_cost(inst)),
                        estimate_cost(inst, Policy.SAM, 500_000, seed=8).stderr)


def test_exact_rnd_and_wsept():
    rng = np.random.default_rng(999)
    for _ in range(10):
        inst = random_discrete_instance(rng, max_jobs=6)
        l, h = l_cost(inst), h_cost(inst)
        assert math.isclose(exact_discrete_cost(inst, Policy.RND), (l + h) / 2, rel_tol=1e-9)
        assert exact_discrete_cost(inst, Policy.WSEPT) == l
        if h - l > 1e-6 * l:
            assert math.isclose(enumerate_rog(inst, Policy.RND), 0.5, abs_tol=1e-9)
            assert enumerate_rog(inst, Policy.WSEPT) == 0.0


def test_opt_is_a_lower_bound():
    rng = np.random.default_rng(999)
    for _ in range(10):
        inst = random_discrete_instance(rng)
        opt = exact_discrete_opt(inst)
        assert opt <= l_cost(inst) * (1 + 1e-12)
        assert exact_discrete_regret(inst, Policy.SAM) >= -1e-9
        assert exact_discrete_cost(inst, Policy.WSPT) == opt


def test_pairwise_agrees_with_enumeration():
    inst = small_discrete()
    assert math.isclose(cost_from_pairwise(inst, pairwise_matrix(inst, Policy.SAM)),
                        exact_discrete_cost(inst, Policy.SAM), rel_tol=1e-9)


def test_enumeration_limits():
    with pytest.raises(NotDiscrete):
        exact_discrete_cost(two_exponentials(), Policy.SAM)
    six = FiniteDiscrete(tuple((float(v), 1 / 6) for v in range(1, 7)))
    big = Instance(tuple(Job(1.0, six) for _ in range(8)))
    with pytest.raises(TooLarge):
        exact_discrete_cost(big, Policy.SAM)
    many = Instance(tuple(Job(1.0, Deterministic(1.0 + j)) for j in range(9)))
    with pytest.raises(TooLarge):
        exact_discrete_cost(many, Policy.RND)


def test_bad_trial_count():
    with pytest.raises(ValueError):
        estimate_cost(two_exponentials(), Policy.SAM, 0, seed=1)


def test_agreement_across_seeds():
    inst = small_discrete()
    exact = exact_discrete_cost(inst, Policy.SAM)
    estimates = [estimate_cost(inst, Policy.SAM, 20_000, seed=seed) for seed in range(100)]
    assert sum(within(est, exact, 4.0) for est in estimates) >= 95
    # ~95 expected at 2 stderr
    assert sum(within(est, exact, 2.0) for est in estimates) >= 85
