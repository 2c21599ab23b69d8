"""
Exact analysis of static list policies through pairwise ordering
probabilities. The expected cost of any static list policy is linear in the
indicators "j runs before k", so

    cost - L = sum over priority-ordered pairs (j, k) of P(k before j) * delta(j, k)

and the relative optimality gap is that sum divided by H - L = sum of all
deltas. For SAM, P(j before k) is the probability that w_j/p'_j beats
w_k/p'_k for independent samples, i.e.

    integral f_k(y) * F_j((w_j / w_k) * y) dy

for densities, a finite sum for atomic laws, and a one-dimensional sum of CDF
values when one side is atomic.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from samplesched.distributions import Atomic, Continuous, Exponential
from samplesched.errors import DegenerateInstance, NonPositivePriority
from samplesched.instance import (Instance, delta, h_cost, instance_classes, l_cost,
                                  ordered_pairs, priorities_tie, priority, wsept_order)
from samplesched.numerics import DEFAULT_QUADRATURE, QuadratureConfig, integrate
from samplesched.policies import Policy, sam_precedes

log = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-9
NEAR_DEGENERATE = 1e-9
KAPPA_SLACK = 1e-9
HALF_SLACK = 1e-8


@dataclass(frozen=True)
class PairwiseMatrix:
    """p[j][k] = P(policy runs j before k), 0-based; the diagonal is unused (0)."""
    p : np.ndarray = field(compare=False)
    policy : Policy = Policy.SAM

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"pairwise matrix must be square, got shape {p.shape}")
        np.fill_diagonal(p, 0.0)
        if np.any(p < -CONSISTENCY_TOL) or np.any(p > 1 + CONSISTENCY_TOL):
            raise ValueError("pairwise probabilities must lie in [0, 1]")
        off = ~np.eye(p.shape[0], dtype=bool)
        if np.any(np.abs((p + p.T)[off] - 1.0) > CONSISTENCY_TOL):
            raise ValueError("pairwise matrix is inconsistent: p[j][k] + p[k][j] != 1")
        p.setflags(write=False)
        object.__setattr__(self, 'p', p)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def before(self, j : int, k : int) -> float:
        "P(j before k) for 1-based ids"
        return float(self.p[j - 1, k - 1])


@dataclass(frozen=True)
class AnalysisReport:
    n : int
    policy : str
    l : float
    h : float
    cost : float
    rog : float
    kappa : float
    alpha : float
    bound_half_ok : bool
    bound_alpha : Optional[float]
    kappa_ok : bool
    near_degenerate : bool
    beats_random : bool
    approx_ratio : float
    approx_bound : float
    cost_random : float = math.nan
    classes : Tuple[str, ...] = ()
    method : str = 'exact-pairwise'

    def as_row(self) -> dict:
        row = {'n': self.n, 'L': self.l, 'H': self.h, 'cost': self.cost, 'rog': self.rog,
               'kappa': self.kappa, 'alpha': self.alpha, 'bound_alpha': self.bound_alpha,
               'policy': self.policy, 'method': self.method}
        row.update(bound_half_ok=self.bound_half_ok, kappa_ok=self.kappa_ok,
                   near_degenerate=self.near_degenerate, beats_random=self.beats_random,
                   approx_ratio=self.approx_ratio, approx_bound=self.approx_bound,
                   cost_random=self.cost_random, classes=';'.join(self.classes))
        return row


# ----------------------------------------------------- SAM pair probabilities

def p_exponential_closed(pi_j : float, pi_k : float) -> float:
    if not (pi_j > 0 and pi_k > 0):
        raise NonPositivePriority(f"priorities must be > 0, got {pi_j}, {pi_k}")
    return pi_j / (pi_j + pi_k)


def _atomic_pair(wj, dj : Atomic, j, wk, dk : Atomic, k) -> float:
    terms = [qa * qb
             for xa, qa in dj.atoms()
             for yb, qb in dk.atoms()
             if sam_precedes(wj, xa, j, wk, yb, k)]
    return math.fsum(terms)


def _continuous_vs_atomic(wj, dj : Continuous, wk, dk : Atomic) -> float:
    # j continuous: j first iff X < (w_j/w_k) y; ties have probability 0
    return math.fsum(qb * dj.cdf(wj / wk * yb) for yb, qb in dk.atoms())


def _atomic_vs_continuous(wj, dj : Atomic, wk, dk : Continuous) -> float:
    # k continuous: j first iff Y > (w_k/w_j) x
    return math.fsum(qa * (1.0 - dk.cdf(wk / wj * xa)) for xa, qa in dj.atoms())


def _continuous_pair(wj, dj : Continuous, wk, dk : Continuous, cfg : QuadratureConfig) -> float:
    """
    Outer integral over k's sample y of f_k(y) * F_j(c*y), c = w_j/w_k. An
    infinite support of k is cut at its 1 - tail_mass quantile; the integrand
    is bounded by f_k, so the cut loses at most tail_mass.

    Breakpoints are the landmarks of both laws, j's mapped to y = x/c: on
    laws of far apart scales F_j(c*y) climbs from 0 to 1 on a sliver of k's
    support, and that sliver must be its own subinterval.
    """
    c = wj / wk
    lo, hi = dk.support()
    if math.isinf(hi):
        hi = float(dk.quantile(1.0 - cfg.tail_mass))
    jlo, jhi = dj.support()
    # F_j(c*y) saturates at 1 beyond jhi/c; integrate the density tail in closed form
    tail = 0.0
    if math.isfinite(jhi) and jhi / c < hi:
        cut = max(jhi / c, lo)
        tail = 1.0 - dk.cdf(cut)
        hi = cut
    lo = max(lo, jlo / c)  # F_j(c*y) == 0 below jlo/c
    if not lo < hi:
        return float(min(1.0, max(0.0, tail)))
    points = dk.landmarks() + tuple(x / c for x in dj.landmarks())
    body = integrate(lambda y: float(dk.pdf(y) * dj.cdf(c * y)), lo, hi, cfg, points=points)
    return float(min(1.0, max(0.0, body + tail)))


def p_sam_pair(inst : Instance, j : int, k : int, cfg : QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    P(SAM runs job j before job k) for 1-based ids. Continuous pairs go through
    adaptive quadrature, atomic pairs are summed exactly with the SAM tie rule
    (zero samples count as infinite ratio), mixed pairs are sums of CDF values.
    """
    a, b = inst.job(j), inst.job(k)
    dj, dk = a.dist, b.dist
    if dj.is_atomic() and dk.is_atomic():
        return _atomic_pair(a.weight, dj, j, b.weight, dk, k)
    if dk.is_atomic():
        return _continuous_vs_atomic(a.weight, dj, b.weight, dk)
    if dj.is_atomic():
        return _atomic_vs_continuous(a.weight, dj, b.weight, dk)
    return _continuous_pair(a.weight, dj, b.weight, dk, cfg)


# ----------------------------------------------------------- pairwise matrix

def _sam_entry(inst : Instance, j : int, k : int, cfg : QuadratureConfig) -> float:
    dj, dk = inst.job(j).dist, inst.job(k).dist
    if isinstance(dj, Exponential) and isinstance(dk, Exponential):
        return p_exponential_closed(priority(inst, j), priority(inst, k))
    return p_sam_pair(inst, j, k, cfg)


def pairwise_matrix(inst : Instance, policy = Policy.SAM,
                    cfg : QuadratureConfig = DEFAULT_QUADRATURE, workers : int = 1) -> PairwiseMatrix:
    """
    Complete precedence matrix of SAM, RND or WSEPT. Only the upper triangle is
    computed; p[k][j] is set to 1 - p[j][k] so the matrix is consistent by
    construction. Entries are independent, so they may be evaluated by a pool
    of workers; the result does not depend on evaluation order.
    """
    policy = Policy.parse(policy)
    n = inst.n
    p = np.zeros((n, n))
    if policy is Policy.RND:
        p[:] = 0.5
    elif policy is Policy.WSEPT:
        pos = np.empty(n, dtype=int)
        pos[wsept_order(inst).indices] = np.arange(n)
        p[:] = (pos[:, None] < pos[None, :]).astype(float)
    elif policy is Policy.SAM:
        pairs = [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(lambda jk: _sam_entry(inst, jk[0], jk[1], cfg), pairs))
        else:
            values = [_sam_entry(inst, j, k, cfg) for j, k in pairs]
        for (j, k), v in zip(pairs, values):
            p[j - 1, k - 1] = v
            p[k - 1, j - 1] = 1.0 - v
    else:
        raise ValueError(f"no pairwise matrix for policy {policy}: it is not a static list policy")
    return PairwiseMatrix(p, policy)


# ---------------------------------------------------------- cost, rog, bounds

def _inversion_terms(inst : Instance, m : PairwiseMatrix):
    return [(m.before(k, j), delta(inst, j, k)) for j, k in ordered_pairs(inst)]


def cost_from_pairwise(inst : Instance, m : PairwiseMatrix) -> float:
    "L + sum of P(k before j) * delta(j, k) over priority-ordered pairs"
    return l_cost(inst) + math.fsum(q * d for q, d in _inversion_terms(inst, m))


def relative_gap(cost : float, l : float, h : float) -> float:
    "(cost - L) / (H - L) on raw numbers"
    if not h > l:
        raise DegenerateInstance(f"L = {l} and H = {h}: relative optimality gap undefined")
    return (cost - l) / (h - l)


def rog(inst : Instance, m : PairwiseMatrix) -> float:
    terms = _inversion_terms(inst, m)
    spread = math.fsum(d for _, d in terms)
    if not spread > 0:
        raise DegenerateInstance("all priorities tie (L == H): relative optimality gap undefined")
    return math.fsum(q * d for q, d in terms) / spread


def kappa(inst : Instance, m : PairwiseMatrix) -> float:
    "Smallest P(j before k) over pairs with priority(j) > priority(k); 1 if none"
    pri = inst.priorities
    correct = [m.p[a, b] for a in range(inst.n) for b in range(inst.n)
               if pri[a] > pri[b] and not priorities_tie(pri[a], pri[b])]
    return float(min(correct)) if correct else 1.0


def alpha_separation(inst : Instance) -> float:
    """
    Largest alpha for which the instance is alpha-separated: the smallest
    max(pi_j/pi_k, pi_k/pi_j) over pairs whose priorities do not tie.
    +inf when every priority ties.
    """
    pri = sorted(inst.priorities.tolist())
    ratios = [hi / lo for i, lo in enumerate(pri) for hi in pri[i + 1:] if not priorities_tie(lo, hi)]
    return min(ratios) if ratios else math.inf


def alpha_bound(alpha : float) -> float:
    return 1.0 / (1.0 + alpha)


def analyze(inst : Instance, policy = Policy.SAM,
            cfg : QuadratureConfig = DEFAULT_QUADRATURE, workers : int = 1) -> AnalysisReport:
    """Exact cost, rog, kappa, alpha-separation and guarantee checks of one policy."""
    policy = Policy.parse(policy)
    m = pairwise_matrix(inst, policy, cfg, workers)
    l, h = l_cost(inst), h_cost(inst)
    cost = cost_from_pairwise(inst, m)
    # RND runs every pair either way with probability 1/2: cost (L + H) / 2
    cost_random = cost_from_pairwise(inst, pairwise_matrix(inst, Policy.RND))
    r = rog(inst, m)
    k = kappa(inst, m)
    alpha = alpha_separation(inst)
    classes = instance_classes(inst)
    exponential = all(isinstance(job.dist, Exponential) for job in inst.jobs)
    bound = alpha_bound(alpha) if exponential and policy is Policy.SAM else None
    if not r <= 1 - k + KAPPA_SLACK:
        log.warning("rog %.12g exceeds 1 - kappa = %.12g", r, 1 - k)
    return AnalysisReport(
        n=inst.n, policy=str(policy), l=l, h=h, cost=cost, rog=r, kappa=k, alpha=alpha,
        bound_half_ok=r <= 0.5 + HALF_SLACK,
        bound_alpha=bound,
        kappa_ok=r <= 1 - k + KAPPA_SLACK,
        near_degenerate=(h - l) < NEAR_DEGENERATE * l,
        beats_random=cost <= cost_random + HALF_SLACK * (h - l),
        approx_ratio=cost / l,
        approx_bound=1.0 + r * (h / l - 1.0),
        cost_random=cost_random,
        classes=classes)
