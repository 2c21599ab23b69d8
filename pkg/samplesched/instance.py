"""
Weighted job collections and the quantities that only depend on expected
processing times: WSEPT priorities, expected cost of a fixed sequence, the
extremal costs L (WSEPT order) and H (reverse WSEPT order) and the pairwise
inversion costs delta.

Job ids are 1-based everywhere in this API; arrays inside are 0-based.
"""
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from samplesched import distributions
from samplesched.distributions import Distribution
from samplesched.errors import OrderViolation, ParseError

MAX_ENUMERATED_JOBS = 8
PRIORITY_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Job:
    weight : float
    dist : Distribution

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"job weight must be finite and > 0, got {self.weight}")
        m = self.dist.mean()
        if not (math.isfinite(m) and m > 0):
            raise ValueError(f"job mean processing time must be finite and > 0, got {m}")

    @property
    def priority(self) -> float:
        return self.weight / self.dist.mean()

    def __str__(self):
        return f'Job(w={self.weight:.4g}, {self.dist})'


@dataclass(frozen=True)
class Instance:
    jobs : Tuple[Job, ...]

    def __post_init__(self):
        object.__setattr__(self, 'jobs', tuple(self.jobs))
        if len(self.jobs) < 1:
            raise ValueError("an instance needs at least one job")

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def weights(self) -> np.ndarray:
        return np.array([job.weight for job in self.jobs], dtype=float)

    @property
    def means(self) -> np.ndarray:
        return np.array([job.dist.mean() for job in self.jobs], dtype=float)

    @property
    def priorities(self) -> np.ndarray:
        return np.array([job.priority for job in self.jobs], dtype=float)

    def job(self, j : int) -> Job:
        if not 1 <= j <= self.n:
            raise IndexError(f"job id {j} outside 1..{self.n}")
        return self.jobs[j - 1]

    def is_atomic(self) -> bool:
        return all(job.dist.is_atomic() for job in self.jobs)

    def __str__(self):
        return 'Instance(' + ', '.join(str(job) for job in self.jobs) + ')'


@dataclass(frozen=True)
class Permutation:
    order : Tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(j) for j in self.order)
        object.__setattr__(self, 'order', order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise ValueError(f"{order} is not a permutation of 1..{len(order)}")

    @staticmethod
    def from_indices(idx : Iterable[int]) -> 'Permutation':
        "Build from 0-based positions"
        return Permutation(tuple(int(i) + 1 for i in idx))

    @property
    def indices(self) -> np.ndarray:
        return np.array(self.order, dtype=int) - 1

    def reversed(self) -> 'Permutation':
        return Permutation(self.order[::-1])

    def __len__(self):
        return len(self.order)

    def __str__(self):
        return '(' + ','.join(str(j) for j in self.order) + ')'


def weighted_completion(weights : np.ndarray, times : np.ndarray) -> np.ndarray:
    """
    Sum_t w[t] * (times[0] + ... + times[t]) along the last axis, for weights
    and times already laid out in sequence order. Shared by the expected
    (means) and realized (sampled times) cost so both round identically.
    """
    return np.sum(weights * np.cumsum(times, axis=-1), axis=-1)


def priority(inst : Instance, j : int) -> float:
    return inst.job(j).priority


def priorities_tie(a : float, b : float) -> bool:
    "Priorities within relative PRIORITY_TIE_TOL are one priority; w/E rounds"
    return math.isclose(a, b, rel_tol=PRIORITY_TIE_TOL)


def wsept_order(inst : Instance) -> Permutation:
    "Priority non-increasing; ties by ascending job id"
    pri = inst.priorities
    idx = np.lexsort((np.arange(inst.n), -pri))
    return Permutation.from_indices(idx)


def expected_cost_of_permutation(inst : Instance, perm : Permutation) -> float:
    if len(perm) != inst.n:
        raise ValueError(f"permutation of {len(perm)} jobs for an instance of {inst.n}")
    idx = perm.indices
    return float(weighted_completion(inst.weights[idx], inst.means[idx]))


def l_cost(inst : Instance) -> float:
    return expected_cost_of_permutation(inst, wsept_order(inst))


def h_cost(inst : Instance) -> float:
    return expected_cost_of_permutation(inst, wsept_order(inst).reversed())


def delta(inst : Instance, j : int, k : int) -> float:
    """
    Extra expected cost w_j E[P_k] - w_k E[P_j] of running k before j, for a
    pair with priority(j) >= priority(k). Always >= 0, and 0 for priorities
    that tie under priorities_tie.
    """
    pj, pk = priority(inst, j), priority(inst, k)
    if priorities_tie(pj, pk):
        return 0.0
    if pj < pk:
        raise OrderViolation(f"delta({j},{k}) needs priority({j})={pj} >= priority({k})={pk}")
    a, b = inst.job(j), inst.job(k)
    return max(0.0, a.weight * b.dist.mean() - b.weight * a.dist.mean())


def ordered_pairs(inst : Instance) -> List[Tuple[int, int]]:
    "All (j, k) with j ahead of k in WSEPT order, as 1-based ids"
    order = wsept_order(inst).order
    return [(order[a], order[b]) for a in range(len(order)) for b in range(a + 1, len(order))]


def all_permutation_costs(inst : Instance) -> np.ndarray:
    "Expected cost of each of the n! sequences, in itertools.permutations order"
    if inst.n > MAX_ENUMERATED_JOBS:
        raise ValueError(f"refusing to enumerate {inst.n}! sequences (max n={MAX_ENUMERATED_JOBS})")
    perms = np.array(list(itertools.permutations(range(inst.n))), dtype=int)
    return weighted_completion(inst.weights[perms], inst.means[perms])


def instance_classes(inst : Instance) -> Tuple[str, ...]:
    """
    The well-behaved classes the whole instance belongs to. shape-uniform
    needs one shared base; translated needs one shared base and unit weights.
    """
    tags = [distributions.classify(job.dist) if not job.dist.is_atomic() else frozenset()
            for job in inst.jobs]
    common = frozenset.intersection(*tags)
    classes = []
    if 'symmetric' in common:
        classes.append('symmetric')
    if any(t.startswith('shape-uniform:') for t in common):
        classes.append('shape-uniform')
    if any(t.startswith('translated:') for t in common) and all(job.weight == 1.0 for job in inst.jobs):
        classes.append('translated')
    if 'exponential' in common:
        classes.append('exponential')
    return tuple(classes)


# ---------------------------------------------------------------------- files

def to_dict(inst : Instance) -> dict:
    return {'jobs': [{'weight': job.weight, 'dist': job.dist.to_dict()} for job in inst.jobs]}


def from_dict(obj : dict) -> Instance:
    if not isinstance(obj, dict) or not isinstance(obj.get('jobs'), list):
        raise ParseError("instance must be an object with a 'jobs' array")
    try:
        jobs = [Job(float(j['weight']), distributions.from_dict(j['dist'])) for j in obj['jobs']]
        return Instance(tuple(jobs))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad job entry: {e}") from e


def load_instance(path : str) -> Instance:
    try:
        with open(path) as f:
            obj = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"cannot read instance {path}: {e}") from e
    return from_dict(obj)


def dump_instance(inst : Instance, path : str) -> None:
    with open(path, 'w') as f:
        json.dump(to_dict(inst), f, indent=2)
