"""
Numeric substrate shared by the exact and the simulated pipelines: adaptive
quadrature with a hard accuracy contract, and seeded counter-based random
streams.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate as _quadpack

from samplesched.errors import QuadratureFailure

log = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol : float = 1e-9
    max_subdivisions : int = 10_000
    tail_mass : float = 1e-12
    abs_tol : float = 1e-15  # floor for integrals whose true value is ~0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.tail_mass > 0:
            raise ValueError(f"tail_mass must be positive, got {self.tail_mass}")
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")

    def with_tol(self, rel_tol : float) -> 'QuadratureConfig':
        return QuadratureConfig(rel_tol, self.max_subdivisions, self.tail_mass, self.abs_tol)


DEFAULT_QUADRATURE = QuadratureConfig()


def integrate(f : Callable[[float], float], lo : float, hi : float,
              cfg : QuadratureConfig = DEFAULT_QUADRATURE,
              points : Sequence[float] = ()) -> float:
    """
    Integrate f over the finite interval [lo, hi] with QUADPACK's adaptive
    Gauss-Kronrod (21-point Kronrod / 10-point Gauss embedded pair). The
    Kronrod/Gauss difference on every subinterval is the error estimate that
    drives bisection, so the result carries relative error <= cfg.rel_tol.

    points are interior breakpoints where f has kinks (density support
    boundaries); they are passed to the subdivision scheme so it never has to
    discover them by refinement. Callers truncate infinite limits themselves,
    at a quantile of the outer density.

    Raises QuadratureFailure when the subdivision budget is exhausted before
    the error estimate falls under tolerance.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValueError(f"integrate needs finite lo < hi, got [{lo}, {hi}]")
    inner = sorted({float(x) for x in points if lo < x < hi})
    result = _quadpack.quad(f, lo, hi,
                            epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                            limit=max(cfg.max_subdivisions, len(inner) + 1),
                            points=inner or None,
                            full_output=1)
    value, abserr = result[0], result[1]
    if len(result) > 3:  # QUADPACK attaches a message only when ier != 0
        allowed = max(cfg.abs_tol, cfg.rel_tol * abs(value))
        if abserr > allowed:
            raise QuadratureFailure(f"quadrature on [{lo}, {hi}] stopped at error {abserr:.3e} "
                                    f"> {allowed:.3e}: {result[3]}")
        log.debug("quad warning on [%g, %g] within tolerance (err=%.3e): %s", lo, hi, abserr, result[3])
    return float(value)


def rng_stream(seed : int, stream_id : int) -> np.random.Generator:
    """
    Deterministic random stream number stream_id of a seed. The bit generator
    is Philox-4x64 (counter based); the key comes from SeedSequence(seed) with
    spawn key (stream_id,), so distinct ids give independent streams and the
    same (seed, stream_id) always replays the same sequence.
    """
    if stream_id < 0:
        raise ValueError(f"stream_id must be >= 0, got {stream_id}")
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


def mean_stderr(values : np.ndarray) -> Tuple[float, float]:
    """Sample mean and standard error (sample sd / sqrt(N)) with exactly rounded sums."""
    values = np.asarray(values, dtype=float).ravel()
    n = values.size
    if n == 0:
        raise ValueError("mean_stderr of an empty sample")
    if values.min() == values.max():  # constant sample; skip the rounding of fsum(values)/n
        return float(values[0]), 0.0
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)
