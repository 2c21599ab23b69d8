"""
Realization-level scheduling: SAM orders jobs by weight over one sampled
processing time, RND shuffles uniformly, WSPT orders by weight over realized
processing time (the per-realization optimum), WSEPT by weight over expected
processing time.

Every ordering has a batch form over a (trials x n) array returning 0-based
job indices per row; the single-schedule operations are thin wrappers so that
simulation, enumeration and the pairwise engine share one tie rule:
ratio descending, then weight descending, then job id ascending.
"""
from enum import Enum
from typing import Sequence

import numpy as np

from samplesched.instance import Instance, Permutation, weighted_completion, wsept_order

# one entry per job: p'_j (sampled) or p_j (realized); all >= 0
SampleVector = np.ndarray
RealizationVector = np.ndarray


class Policy(Enum):
    SAM = 'sam'
    RND = 'rnd'
    WSEPT = 'wsept'
    WSPT = 'wspt'  # clairvoyant oracle, sees the realization

    @staticmethod
    def parse(name) -> 'Policy':
        if isinstance(name, Policy):
            return name
        try:
            return Policy(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown policy {name!r}; expected one of "
                             f"{', '.join(p.value for p in Policy)}") from None

    def __str__(self):
        return self.value


def sam_ratio(weights, times):
    "w / p, with p == 0 giving +inf"
    weights = np.asarray(weights, dtype=float)
    times = np.asarray(times, dtype=float)
    with np.errstate(divide='ignore'):
        return np.where(times > 0, weights / np.where(times > 0, times, 1.0), np.inf)


def smith_orders(weights : np.ndarray, times : np.ndarray) -> np.ndarray:
    """
    Row-wise order by w/p non-increasing under the shared tie rule. times has
    shape (trials, n) or (n,); the result has the same shape and holds 0-based
    job indices, first job first.
    """
    weights = np.asarray(weights, dtype=float)
    times = np.asarray(times, dtype=float)
    ratio = sam_ratio(weights, times)
    shape = ratio.shape
    ids = np.broadcast_to(np.arange(shape[-1]), shape)
    neg_w = np.broadcast_to(-weights, shape)
    return np.lexsort((ids, neg_w, -ratio), axis=-1)


def sam_orders(weights : np.ndarray, samples : np.ndarray) -> np.ndarray:
    return smith_orders(weights, samples)


def wspt_orders(weights : np.ndarray, realizations : np.ndarray) -> np.ndarray:
    return smith_orders(weights, realizations)


def rnd_orders(n : int, trials : int, rng : np.random.Generator) -> np.ndarray:
    "trials independent uniform permutations of range(n)"
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)


def wsept_orders(inst : Instance, trials : int) -> np.ndarray:
    return np.tile(wsept_order(inst).indices, (trials, 1))


def realized_costs(weights : np.ndarray, realizations : np.ndarray, orders : np.ndarray) -> np.ndarray:
    "Total weighted completion time of each row's order under that row's realization"
    weights = np.asarray(weights, dtype=float)
    realizations = np.asarray(realizations, dtype=float)
    return weighted_completion(weights[orders], np.take_along_axis(realizations, orders, axis=-1))


def sam_precedes(wj : float, pj : float, j : int, wk : float, pk : float, k : int) -> bool:
    """
    Does SAM put job j ahead of job k given samples pj, pk? Same comparisons,
    in the same float arithmetic, as the lexsort in smith_orders.
    """
    rj, rk = float(sam_ratio(wj, pj)), float(sam_ratio(wk, pk))
    if rj != rk:
        return rj > rk
    if wj != wk:
        return wj > wk
    return j < k


# ---------------------------------------------------------- single schedules

def sam_schedule(weights : Sequence[float], samples : SampleVector) -> Permutation:
    return Permutation.from_indices(smith_orders(weights, np.asarray(samples, dtype=float)))


def rnd_schedule(n : int, rng : np.random.Generator) -> Permutation:
    return Permutation.from_indices(rnd_orders(n, 1, rng)[0])


def wspt_schedule(weights : Sequence[float], realization : RealizationVector) -> Permutation:
    return Permutation.from_indices(smith_orders(weights, np.asarray(realization, dtype=float)))


def realized_cost(weights : Sequence[float], realization : RealizationVector, perm : Permutation) -> float:
    if len(perm) != len(realization) or len(weights) != len(realization):
        raise ValueError("weights, realization and permutation must have the same length")
    idx = perm.indices
    return float(weighted_completion(np.asarray(weights, dtype=float)[idx],
                                     np.asarray(realization, dtype=float)[idx]))
