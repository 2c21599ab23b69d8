"""
Instance builders: the two adversarial examples and their variants, random
instances of the well-behaved classes used by verification sweeps, and
instances that push those classes to their bounds.

Random instances (all draws from the Generator passed in, so a seed pins
them down):
  n                uniform in {2, ..., 8}
  weights          log-uniform in [0.1, 10]; forced to 1 for translated
  class parameters log-uniform in [0.1, 10] (means, rates, shifts)
"""
import math
from typing import Optional

import numpy as np

from samplesched.distributions import (BASE_DENSITIES, SYMMETRIC_BASES, Deterministic,
                                       Exponential, FiniteDiscrete, PiecewiseUniform, ShapeUniform,
                                       Translated, UniformInterval)
from samplesched.instance import Instance, Job

CLASSES = ('symmetric', 'shape-uniform', 'translated', 'exponential')
PARAM_RANGE = (0.1, 10.0)
WEIGHT_RANGE = (0.1, 10.0)
N_RANGE = (2, 8)


def log_uniform(rng : np.random.Generator, lo : float, hi : float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def example1_instance(n : int = 5, M : float = 100.0, eps : float = 1e-6) -> Instance:
    """
    n-1 unit-weight jobs of deterministic length eps, and one unit-weight job
    that takes 0 with probability 1 - 1/M and M^2 with probability 1/M. SAM
    sees a zero sample most of the time and runs the long job first.
    """
    if n < 2:
        raise ValueError(f"the long-job example needs n >= 2, got {n}")
    if not M > 1:
        raise ValueError(f"the long-job example needs M > 1, got {M}")
    if not eps > 0:
        raise ValueError(f"the long-job example needs eps > 0, got {eps}")
    short = [Job(1.0, Deterministic(eps)) for _ in range(n - 1)]
    risky = Job(1.0, FiniteDiscrete(((0.0, 1.0 - 1.0 / M), (M * M, 1.0 / M))))
    return Instance(tuple(short + [risky]))


def example1_continuous_instance(n : int = 5, M : float = 100.0, eps : float = 1e-6) -> Instance:
    """
    The long-job example with densities: the short jobs are uniform on
    [eps/2, 3eps/2], the long job is uniform on [0, eps/2) with probability
    1 - 1/M and on [M^2, M^2 + eps) with probability 1/M. Every sample of the
    long job's first bin is below every short sample, so SAM orders the pairs
    exactly as in the atomic version and the large-M limits are the same.
    """
    if n < 2:
        raise ValueError(f"the long-job example needs n >= 2, got {n}")
    if not M > 1:
        raise ValueError(f"the long-job example needs M > 1, got {M}")
    if not eps > 0:
        raise ValueError(f"the long-job example needs eps > 0, got {eps}")
    short = [Job(1.0, UniformInterval(eps / 2, 3 * eps / 2)) for _ in range(n - 1)]
    risky = Job(1.0, PiecewiseUniform(((0.0, eps / 2, 1.0 - 1.0 / M), (M * M, M * M + eps, 1.0 / M))))
    return Instance(tuple(short + [risky]))


def example1_swapped_instance(n : int = 5, M : float = 100.0) -> Instance:
    """
    The long-job example with the roles of weights and lengths swapped: every
    expected time is 1, the n-1 deterministic jobs weigh M and the last job
    (weight 1) takes 0 with probability 1 - 1/M and M with probability 1/M.
    WSEPT runs it last; SAM runs it first whenever it samples 0, so
    rog = 1 - 1/M exactly, with
      L = M (n-1) n / 2 + n
      H = M ((n-1) + (n-1) n / 2) + 1
    """
    if n < 2:
        raise ValueError(f"the swapped long-job example needs n >= 2, got {n}")
    if not M > 1:
        raise ValueError(f"the swapped long-job example needs M > 1, got {M}")
    heavy = [Job(M, Deterministic(1.0)) for _ in range(n - 1)]
    risky = Job(1.0, FiniteDiscrete(((0.0, 1.0 - 1.0 / M), (M, 1.0 / M))))
    return Instance(tuple(heavy + [risky]))


def example2_instance(M : float = 100.0, eps : float = 1e-3) -> Instance:
    """
    Two jobs, weights 1 and 2. Job 1 takes 1 w.p. 1 - 1/M and M^2 w.p. 1/M;
    job 2 has the same law translated by 1 + eps. Translation-identical, but
    with non-unit weights SAM runs job 1 first whenever it samples 1.
    """
    if not M > 1:
        raise ValueError(f"the weighted translation example needs M > 1, got {M}")
    if not eps > 0:
        raise ValueError(f"the weighted translation example needs eps > 0, got {eps}")
    p1 = FiniteDiscrete(((1.0, 1.0 - 1.0 / M), (M * M, 1.0 / M)))
    return Instance((Job(1.0, p1), Job(2.0, p1.shifted(1.0 + eps))))


def _symmetric_law(rng : np.random.Generator):
    if rng.random() < 0.5:
        center = log_uniform(rng, *PARAM_RANGE)
        half = center * rng.uniform(0.05, 1.0)
        return UniformInterval(max(0.0, center - half), center + half)
    base = SYMMETRIC_BASES[rng.integers(len(SYMMETRIC_BASES))]
    return Translated(base, log_uniform(rng, *PARAM_RANGE))


def random_instance(class_name : str, rng : np.random.Generator,
                    unit_weights : Optional[bool] = None) -> Instance:
    """
    A random instance of one class. unit_weights defaults to True for the
    translated class (which only has a guarantee with unit weights) and to
    False otherwise.
    """
    if class_name not in CLASSES:
        raise ValueError(f"unknown class {class_name!r}; expected one of {', '.join(CLASSES)}")
    if unit_weights is None:
        unit_weights = class_name == 'translated'
    n = int(rng.integers(N_RANGE[0], N_RANGE[1] + 1))
    if class_name == 'symmetric':
        laws = [_symmetric_law(rng) for _ in range(n)]
    elif class_name == 'shape-uniform':
        base = list(BASE_DENSITIES)[rng.integers(len(BASE_DENSITIES))]
        laws = [ShapeUniform(base, log_uniform(rng, *PARAM_RANGE)) for _ in range(n)]
    elif class_name == 'translated':
        base = list(BASE_DENSITIES)[rng.integers(len(BASE_DENSITIES))]
        laws = [Translated(base, log_uniform(rng, *PARAM_RANGE)) for _ in range(n)]
    else:
        laws = [Exponential(log_uniform(rng, *PARAM_RANGE)) for _ in range(n)]
    weights = [1.0 if unit_weights else log_uniform(rng, *WEIGHT_RANGE) for _ in range(n)]
    return Instance(tuple(Job(w, d) for w, d in zip(weights, laws)))


def two_job_exponential(alpha : float) -> Instance:
    "Unit weights, rates alpha and 1: priorities alpha and 1"
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return Instance((Job(1.0, Exponential(alpha)), Job(1.0, Exponential(1.0))))


def alpha_separated_exponential(alpha : float, rng : np.random.Generator,
                                n : Optional[int] = None) -> Instance:
    """
    Exponential jobs whose priorities fall into at least two groups; inside a
    group priorities are equal, across groups they differ by a factor of at
    least alpha (alpha times a log-uniform factor in [1, 2]).
    """
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if n is None:
        n = int(rng.integers(N_RANGE[0], N_RANGE[1] + 1))
    groups = int(rng.integers(2, n + 1))
    levels = [log_uniform(rng, *PARAM_RANGE)]
    for _ in range(groups - 1):
        levels.append(levels[-1] * alpha * log_uniform(rng, 1.0, 2.0))
    assignment = list(range(groups)) + [int(g) for g in rng.integers(groups, size=n - groups)]
    jobs = []
    for g in assignment:
        w = log_uniform(rng, *WEIGHT_RANGE)
        jobs.append(Job(w, Exponential(levels[g] / w)))
    return Instance(tuple(jobs))


NEAR_TIE_CLASSES = ('symmetric', 'shape-uniform', 'exponential')


def heavy_near_tie_instance(class_name : str, rng : np.random.Generator,
                            weight : float = 1e8, delta : float = 1e-3) -> Instance:
    """
    A random instance of the class plus two jobs of weight W = weight with
    mean times W and W (1 + delta), built from the same law at two nearly
    equal scales. Their inversion cost W^2 delta dwarfs every other pair, and
    SAM inverts them with probability close to 1/2, so rog approaches the
    class bound from below as delta shrinks. Not available for the translated
    class, whose guarantee needs unit weights.
    """
    if class_name not in NEAR_TIE_CLASSES:
        raise ValueError(f"no near-tie construction for class {class_name!r}; "
                         f"expected one of {', '.join(NEAR_TIE_CLASSES)}")
    if not (weight > 0 and delta > 0):
        raise ValueError(f"weight and delta must be > 0, got {weight}, {delta}")
    inst = random_instance(class_name, rng)
    means = (weight, weight * (1.0 + delta))
    if class_name == 'symmetric':
        pair = [UniformInterval(0.0, 2 * m) for m in means]
    elif class_name == 'shape-uniform':
        base = inst.jobs[0].dist.base
        pair = [ShapeUniform(base, 1.0 / m) for m in means]
    else:
        pair = [Exponential(1.0 / m) for m in means]
    return Instance(inst.jobs + tuple(Job(weight, d) for d in pair))
