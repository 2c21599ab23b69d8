"""
Simulation estimators for expected cost, regret and rog, and exact
enumeration oracles for instances whose laws are all atomic.

Trials are grouped into blocks of BLOCK_SIZE. Block b draws samples,
realizations and shuffles from the three substreams rng_stream(seed, 3b),
rng_stream(seed, 3b+1), rng_stream(seed, 3b+2), so samples and realizations
are independent, and a run split across workers draws exactly the numbers a
serial run draws.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from samplesched.errors import NotDiscrete, TooLarge
from samplesched.instance import (MAX_ENUMERATED_JOBS, Instance, all_permutation_costs,
                                  h_cost, l_cost, weighted_completion)
from samplesched.numerics import mean_stderr, rng_stream
from samplesched.pairwise import relative_gap
from samplesched.policies import (Policy, realized_costs, rnd_orders, sam_orders,
                                  wsept_orders, wspt_orders)

log = logging.getLogger(__name__)

BLOCK_SIZE = 1 << 16
MAX_ATOM_COMBINATIONS = 10 ** 6


@dataclass(frozen=True)
class Estimate:
    mean : float
    stderr : float
    n_trials : int
    seed : int

    def __str__(self):
        return f'{self.mean:.6g} ± {self.stderr:.2g} (N={self.n_trials}, seed={self.seed})'


# --------------------------------------------------------------- simulation

def _draw(inst : Instance, rng : np.random.Generator, size : int) -> np.ndarray:
    "(size x n) matrix, column j drawn from job j's law"
    return np.column_stack([np.asarray(job.dist.sample(rng, size), dtype=float) for job in inst.jobs])


def _block_costs(inst : Instance, policy : Policy, seed : int, block : int, size : int,
                 regret : bool) -> np.ndarray:
    w = inst.weights
    realization = _draw(inst, rng_stream(seed, 3 * block + 1), size)
    if policy is Policy.SAM:
        orders = sam_orders(w, _draw(inst, rng_stream(seed, 3 * block), size))
    elif policy is Policy.RND:
        orders = rnd_orders(inst.n, size, rng_stream(seed, 3 * block + 2))
    elif policy is Policy.WSEPT:
        orders = wsept_orders(inst, size)
    else:
        orders = wspt_orders(w, realization)
    costs = realized_costs(w, realization, orders)
    if regret:
        costs = costs - realized_costs(w, realization, wspt_orders(w, realization))
    return costs


def _simulate(inst : Instance, policy, n_trials : int, seed : int, regret : bool, workers : int) -> Estimate:
    policy = Policy.parse(policy)
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    sizes = [min(BLOCK_SIZE, n_trials - start) for start in range(0, n_trials, BLOCK_SIZE)]
    run = lambda b: _block_costs(inst, policy, seed, b, sizes[b], regret)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(b) for b in range(len(sizes))]
    mean, stderr = mean_stderr(np.concatenate(blocks))
    log.debug("%s %s over %d trials: %.6g ± %.3g", policy, 'regret' if regret else 'cost',
              n_trials, mean, stderr)
    return Estimate(mean, stderr, n_trials, seed)


def estimate_cost(inst : Instance, policy, n_trials : int, seed : int, workers : int = 1) -> Estimate:
    """
    Mean realized total weighted completion time: per trial, SAM draws one
    sample vector to fix its order, then an independent realization is drawn
    and the order is charged against it.
    """
    return _simulate(inst, policy, n_trials, seed, regret=False, workers=workers)


def estimate_regret(inst : Instance, policy, n_trials : int, seed : int, workers : int = 1) -> Estimate:
    "Paired estimator: each trial subtracts the WSPT cost of the same realization"
    return _simulate(inst, policy, n_trials, seed, regret=True, workers=workers)


def estimate_rog(inst : Instance, policy, n_trials : int, seed : int, workers : int = 1) -> Estimate:
    l, h = l_cost(inst), h_cost(inst)
    est = estimate_cost(inst, policy, n_trials, seed, workers)
    return Estimate(relative_gap(est.mean, l, h), est.stderr / (h - l), n_trials, seed)


# ---------------------------------------------------------------- enumeration

def _atom_grid(inst : Instance):
    """
    Every combination of one atom per job: (values, probs) with values of shape
    (combinations, n). Independence makes the probability a product.
    """
    if not inst.is_atomic():
        raise NotDiscrete("exact enumeration needs Deterministic or FiniteDiscrete laws only")
    per_job = [job.dist.atoms() for job in inst.jobs]
    count = math.prod(len(a) for a in per_job)
    if count > MAX_ATOM_COMBINATIONS:
        raise TooLarge(f"{count} atom combinations exceed the budget of {MAX_ATOM_COMBINATIONS}")
    log.debug("enumerating %d atom combinations", count)
    combos = list(itertools.product(*per_job))
    values = np.array([[v for v, _ in combo] for combo in combos], dtype=float)
    probs = np.array([math.prod(p for _, p in combo) for combo in combos], dtype=float)
    return values, probs


def exact_discrete_cost(inst : Instance, policy) -> float:
    """
    Exact expected cost of a policy on an atomic instance. For SAM the sample
    vector is enumerated and, given its order, the expectation over
    realizations is the position sum of means. RND averages the expected cost
    of all n! sequences; WSEPT is L; WSPT is the expected per-realization
    optimum.
    """
    policy = Policy.parse(policy)
    if not inst.is_atomic():
        raise NotDiscrete("exact enumeration needs Deterministic or FiniteDiscrete laws only")
    if policy is Policy.SAM:
        samples, probs = _atom_grid(inst)
        orders = sam_orders(inst.weights, samples)
        costs = weighted_completion(inst.weights[orders], inst.means[orders])
        return math.fsum(probs * costs)
    if policy is Policy.RND:
        if inst.n > MAX_ENUMERATED_JOBS:
            raise TooLarge(f"RND enumeration over {inst.n}! sequences (max n={MAX_ENUMERATED_JOBS})")
        costs = all_permutation_costs(inst)
        return math.fsum(costs) / len(costs)
    if policy is Policy.WSEPT:
        return l_cost(inst)
    return exact_discrete_opt(inst)


def exact_discrete_opt(inst : Instance) -> float:
    "E[OPT(p)]: WSPT cost of every realization vector, weighted by its probability"
    realizations, probs = _atom_grid(inst)
    costs = realized_costs(inst.weights, realizations, wspt_orders(inst.weights, realizations))
    return math.fsum(probs * costs)


def exact_discrete_regret(inst : Instance, policy) -> float:
    return exact_discrete_cost(inst, policy) - exact_discrete_opt(inst)


def enumerate_rog(inst : Instance, policy) -> float:
    return relative_gap(exact_discrete_cost(inst, policy), l_cost(inst), h_cost(inst))
