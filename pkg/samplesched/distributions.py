"""
Processing-time laws. Every kind is an immutable value with pdf/cdf/mean and
a vectorised sampler; continuous kinds also have quantile and support, atomic
kinds (Deterministic, FiniteDiscrete) expose their atoms instead of a density.

The module-level functions pdf(d, x), cdf(d, x), mean(d), ... are the public
operations; they simply dispatch to the methods.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import special, stats

from samplesched.errors import NoDensity, ParseError

SYMMETRY_GRID = 1001
BASE_MEAN_TOL = 1e-9
PROB_SUM_TOL = 1e-12
# probabilities whose quantiles mark where a density puts its mass, from the
# far left tail to the far right one
QUANTILE_LADDER = (tuple(10.0 ** -e for e in range(9, 0, -1)) + (0.25, 0.5, 0.75)
                   + tuple(1.0 - 10.0 ** -e for e in range(1, 10)))


def _scalar_or_array(x, y):
    return float(y) if np.ndim(x) == 0 else np.asarray(y, dtype=float)


def _symmetric_density(pdf, e : float, hi : float, tol : float) -> bool:
    """
    f(E-x) == f(E+x) within tol on a grid of SYMMETRY_GRID points x in
    [0, E], which covers [0, 2E]. A nonnegative symmetric law must also
    have its support inside [0, 2E].
    """
    if hi > 2 * e * (1 + tol):
        return False
    x = np.linspace(0.0, e, SYMMETRY_GRID)
    return bool(np.max(np.abs(pdf(e - x) - pdf(e + x))) <= tol)


@dataclass(frozen=True)
class BaseDensity:
    """A named density g over [0, inf) backed by a frozen scipy.stats law."""
    name : str
    rv : object = field(compare=False, repr=False)

    def pdf(self, x):
        return _scalar_or_array(x, self.rv.pdf(x))

    def cdf(self, x):
        return _scalar_or_array(x, self.rv.cdf(x))

    def quantile(self, q):
        return _scalar_or_array(q, self.rv.ppf(q))

    @property
    def mean(self) -> float:
        return float(self.rv.mean())

    @property
    def support_lo(self) -> float:
        return float(self.rv.support()[0])

    @property
    def support_hi(self) -> float:
        return float(self.rv.support()[1])

    def sample(self, rng : np.random.Generator, size=None):
        return self.rv.rvs(size=size, random_state=rng)

    def is_symmetric(self, tol : float = 1e-9) -> bool:
        return _symmetric_density(self.pdf, self.mean, self.support_hi, tol)

    def __str__(self):
        return self.name


def _catalog() -> Dict[str, BaseDensity]:
    # every entry has mean exactly 1 so it can serve as a shape-uniform base
    laws = {
        'exp1': stats.expon(),
        'uniform01x2': stats.uniform(loc=0.0, scale=2.0),
        'triangular02': stats.triang(0.5, loc=0.0, scale=2.0),
        'beta22x2': stats.beta(2.0, 2.0, scale=2.0),
        'gamma2': stats.gamma(2.0, scale=0.5),
        'halfnormal': stats.halfnorm(scale=math.sqrt(math.pi / 2)),
        'lognormal05': stats.lognorm(0.5, scale=math.exp(-0.125)),
        'weibull15': stats.weibull_min(1.5, scale=1.0 / special.gamma(1.0 + 1.0 / 1.5)),
    }
    return {name: BaseDensity(name, rv) for name, rv in laws.items()}


BASE_DENSITIES = _catalog()
SYMMETRIC_BASES = ('uniform01x2', 'triangular02', 'beta22x2')


def base_density(name : Union[str, BaseDensity]) -> BaseDensity:
    if isinstance(name, BaseDensity):
        return name
    try:
        return BASE_DENSITIES[name]
    except KeyError:
        raise ValueError(f"unknown base density {name!r}; known: {', '.join(BASE_DENSITIES)}") from None


class Distribution:
    """Root of the distribution kinds. Subclasses are frozen dataclasses."""
    kind = None

    def pdf(self, x):
        raise NoDensity(f"{self} has no density")

    def cdf(self, x):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng : np.random.Generator, size=None):
        raise NotImplementedError

    def is_atomic(self) -> bool:
        return False

    def is_symmetric(self, tol : float = 1e-9) -> bool:
        raise NoDensity(f"{self} has no density")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_mean(self):
        m = self.mean()
        if not (math.isfinite(m) and m > 0):
            raise ValueError(f"{self} must have finite positive mean, got {m}")


# ---------------------------------------------------------------- atomic laws

class Atomic(Distribution):
    """A law with finitely many atoms; _values sorted ascending."""

    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self._values.tolist(), self._probs.tolist()))

    def is_atomic(self) -> bool:
        return True

    def cdf(self, x):
        # right-continuous step: P[P <= x]
        idx = np.searchsorted(self._values, x, side='right')
        return _scalar_or_array(x, self._cum[idx])

    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self._values.tolist(), self._probs.tolist()))

    def sample(self, rng : np.random.Generator, size=None):
        if len(self._values) == 1:
            return float(self._values[0]) if size is None else np.full(size, self._values[0])
        draw = rng.choice(self._values, size=size, p=self._probs)
        return float(draw) if size is None else draw

    def _freeze(self, values : Sequence[float], probs : Sequence[float]):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        order = np.argsort(values, kind='stable')
        values, probs = values[order], probs[order]
        object.__setattr__(self, '_values', values)
        object.__setattr__(self, '_probs', probs)
        object.__setattr__(self, '_cum', np.concatenate(([0.0], np.cumsum(probs))))


@dataclass(frozen=True)
class Deterministic(Atomic):
    value : float
    kind = 'deterministic'

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0):
            raise ValueError(f"deterministic processing time must be finite and > 0, got {self.value}")
        self._freeze([self.value], [1.0])

    def mean(self) -> float:
        return float(self.value)

    def shifted(self, s : float) -> 'Deterministic':
        return Deterministic(self.value + s)

    def to_dict(self) -> dict:
        return {'type': 'deterministic', 'value': self.value}

    def __str__(self):
        return f'Deterministic({self.value:.4g})'


@dataclass(frozen=True)
class FiniteDiscrete(Atomic):
    pairs : Tuple[Tuple[float, float], ...]
    kind = 'finite'

    def __post_init__(self):
        pairs = tuple((float(v), float(p)) for v, p in self.pairs)
        object.__setattr__(self, 'pairs', pairs)
        if not pairs:
            raise ValueError("FiniteDiscrete needs at least one atom")
        values = [v for v, _ in pairs]
        probs = [p for _, p in pairs]
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError(f"atom values must be finite and >= 0: {values}")
        if len(set(values)) != len(values):
            raise ValueError(f"atom values must be distinct: {values}")
        if any(p <= 0 for p in probs):
            raise ValueError(f"atom probabilities must be > 0: {probs}")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"atom probabilities sum to {math.fsum(probs)!r}, not 1")
        self._freeze(values, probs)
        self._check_mean()

    def shifted(self, s : float) -> 'FiniteDiscrete':
        if s < 0:
            raise ValueError(f"shift must be >= 0, got {s}")
        return FiniteDiscrete(tuple((v + s, p) for v, p in self.pairs))

    def to_dict(self) -> dict:
        return {'type': 'finite', 'atoms': [[v, p] for v, p in self.pairs]}

    def __str__(self):
        return 'FiniteDiscrete(' + ', '.join(f'{v:.4g}:{p:.4g}' for v, p in self.atoms()) + ')'


# ------------------------------------------------------------ continuous laws

class Continuous(Distribution):

    def support(self) -> Tuple[float, float]:
        raise NotImplementedError

    def quantile(self, q):
        raise NotImplementedError

    def is_symmetric(self, tol : float = 1e-9) -> bool:
        return _symmetric_density(self.pdf, self.mean(), self.support()[1], tol)

    def kinks(self) -> Tuple[float, ...]:
        "Points where the density jumps or is not differentiable"
        return tuple(x for x in self.support() if math.isfinite(x))

    def landmarks(self) -> Tuple[float, ...]:
        """
        Sorted finite points that split the support into pieces a quadrature
        rule resolves without having to find the mass by refinement: the
        QUANTILE_LADDER quantiles, the mean (where symmetric laws peak) and
        the kinks.
        """
        qs = np.asarray(self.quantile(np.array(QUANTILE_LADDER)), dtype=float)
        pts = set(qs[np.isfinite(qs)].tolist()) | {self.mean()} | set(self.kinks())
        return tuple(sorted(pts))


@dataclass(frozen=True)
class Exponential(Continuous):
    rate : float
    kind = 'exponential'

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"rate must be finite and > 0, got {self.rate}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        y = np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)
        return _scalar_or_array(x, y)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, -np.expm1(-self.rate * np.maximum(x, 0.0)))

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        return _scalar_or_array(q, -np.log1p(-q) / self.rate)

    def support(self):
        return 0.0, math.inf

    def mean(self) -> float:
        return 1.0 / self.rate

    def sample(self, rng : np.random.Generator, size=None):
        return rng.exponential(1.0 / self.rate, size=size)

    def to_dict(self) -> dict:
        return {'type': 'exponential', 'rate': self.rate}

    def __str__(self):
        return f'Exponential(rate={self.rate:.4f})'


@dataclass(frozen=True)
class UniformInterval(Continuous):
    lo : float
    hi : float
    kind = 'uniform'

    def __post_init__(self):
        # lo >= 0 is what keeps the symmetric law's support inside [0, 2E]
        if not (0 <= self.lo < self.hi) or not math.isfinite(self.hi):
            raise ValueError(f"uniform needs 0 <= lo < hi < inf, got [{self.lo}, {self.hi}]")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        y = np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)
        return _scalar_or_array(x, y)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0))

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        return _scalar_or_array(q, self.lo + q * (self.hi - self.lo))

    def support(self):
        return float(self.lo), float(self.hi)

    def mean(self) -> float:
        return (self.lo + self.hi) / 2

    def is_symmetric(self, tol : float = 1e-9) -> bool:
        return True

    def sample(self, rng : np.random.Generator, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def to_dict(self) -> dict:
        return {'type': 'uniform', 'lo': self.lo, 'hi': self.hi}

    def __str__(self):
        return f'Uniform[{self.lo:.4f}, {self.hi:.4f}]'


@dataclass(frozen=True)
class PiecewiseUniform(Continuous):
    """
    Mixture of uniform bins (lo, hi, prob): mass prob spread evenly over
    [lo, hi). Bins are sorted, do not overlap and may leave gaps, which makes
    this the continuous stand-in for a law with a few far apart atoms.
    """
    bins : Tuple[Tuple[float, float, float], ...]
    kind = 'piecewise_uniform'

    def __post_init__(self):
        bins = tuple((float(lo), float(hi), float(p)) for lo, hi, p in self.bins)
        object.__setattr__(self, 'bins', bins)
        if not bins:
            raise ValueError("PiecewiseUniform needs at least one bin")
        for lo, hi, p in bins:
            if not (0 <= lo < hi) or not math.isfinite(hi):
                raise ValueError(f"bin needs 0 <= lo < hi < inf, got [{lo}, {hi}]")
            if not p > 0:
                raise ValueError(f"bin probabilities must be > 0, got {p}")
        if any(b[0] < a[1] for a, b in zip(bins, bins[1:])):
            raise ValueError(f"bins must be sorted and must not overlap: {bins}")
        probs = [p for _, _, p in bins]
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"bin probabilities sum to {math.fsum(probs)!r}, not 1")
        lo = np.array([b[0] for b in bins])
        hi = np.array([b[1] for b in bins])
        p = np.array(probs)
        cum = np.concatenate(([0.0], np.cumsum(p)))
        object.__setattr__(self, '_lo', lo)
        object.__setattr__(self, '_hi', hi)
        object.__setattr__(self, '_p', p)
        # cdf knots: (lo_i, cum_i), (hi_i, cum_{i+1}); flat across gaps
        object.__setattr__(self, '_xs', np.column_stack((lo, hi)).ravel())
        object.__setattr__(self, '_cs', np.column_stack((cum[:-1], cum[1:])).ravel())
        self._check_mean()

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x[..., None] >= self._lo) & (x[..., None] < self._hi)
        return _scalar_or_array(x, np.sum(np.where(inside, self._p / (self._hi - self._lo), 0.0), axis=-1))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.interp(x, self._xs, self._cs, left=0.0, right=1.0))

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        return _scalar_or_array(q, np.interp(q, self._cs, self._xs))

    def support(self):
        return float(self._lo[0]), float(self._hi[-1])

    def kinks(self):
        return tuple(sorted(set(self._xs.tolist())))

    def mean(self) -> float:
        return math.fsum(p * (lo + hi) / 2 for lo, hi, p in self.bins)

    def sample(self, rng : np.random.Generator, size=None):
        idx = rng.choice(len(self.bins), size=size, p=self._p)
        draw = rng.uniform(self._lo[idx], self._hi[idx])
        return float(draw) if size is None else draw

    def to_dict(self) -> dict:
        return {'type': 'piecewise_uniform', 'bins': [[lo, hi, p] for lo, hi, p in self.bins]}

    def __str__(self):
        return 'PiecewiseUniform(' + ', '.join(f'[{lo:.4g}, {hi:.4g}):{p:.4g}' for lo, hi, p in self.bins) + ')'


@dataclass(frozen=True)
class ShapeUniform(Continuous):
    """Density rate * g(rate * x) for a mean-1 base g, so the mean is 1/rate."""
    base : BaseDensity
    rate : float
    kind = 'shape_uniform'

    def __post_init__(self):
        object.__setattr__(self, 'base', base_density(self.base))
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"rate must be finite and > 0, got {self.rate}")
        if self.base.support_lo < 0:
            raise ValueError(f"base {self.base} must live on [0, inf)")
        if abs(self.base.mean - 1.0) > BASE_MEAN_TOL:
            raise ValueError(f"shape-uniform base {self.base} has mean {self.base.mean}, not 1")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, self.rate * self.base.pdf(self.rate * x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, self.base.cdf(self.rate * x))

    def quantile(self, q):
        return _scalar_or_array(q, np.asarray(self.base.quantile(q)) / self.rate)

    def support(self):
        return self.base.support_lo / self.rate, self.base.support_hi / self.rate

    def mean(self) -> float:
        return 1.0 / self.rate

    def sample(self, rng : np.random.Generator, size=None):
        return self.base.sample(rng, size) / self.rate

    def is_symmetric(self, tol : float = 1e-9) -> bool:
        # scaling preserves symmetry about the mean
        return self.base.is_symmetric(tol)

    def to_dict(self) -> dict:
        return {'type': 'shape_uniform', 'base': self.base.name, 'rate': self.rate}

    def __str__(self):
        return f'ShapeUniform({self.base}, rate={self.rate:.4f})'


@dataclass(frozen=True)
class Translated(Continuous):
    """Density g(x - shift): the base law moved right by shift >= 0."""
    base : BaseDensity
    shift : float
    kind = 'translated'

    def __post_init__(self):
        object.__setattr__(self, 'base', base_density(self.base))
        if not (math.isfinite(self.shift) and self.shift >= 0):
            raise ValueError(f"shift must be finite and >= 0, got {self.shift}")
        if self.base.support_lo < 0:
            raise ValueError(f"base {self.base} must live on [0, inf)")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, self.base.pdf(x - self.shift))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, self.base.cdf(x - self.shift))

    def quantile(self, q):
        return _scalar_or_array(q, np.asarray(self.base.quantile(q)) + self.shift)

    def support(self):
        return self.base.support_lo + self.shift, self.base.support_hi + self.shift

    def mean(self) -> float:
        return self.base.mean + self.shift

    def sample(self, rng : np.random.Generator, size=None):
        return self.base.sample(rng, size) + self.shift

    def is_symmetric(self, tol : float = 1e-9) -> bool:
        return self.base.is_symmetric(tol)

    def to_dict(self) -> dict:
        return {'type': 'translated', 'base': self.base.name, 'shift': self.shift}

    def __str__(self):
        return f'Translated({self.base}, shift={self.shift:.4f})'


# ------------------------------------------------------------------ operations

def pdf(d : Distribution, x):
    return d.pdf(x)


def cdf(d : Distribution, x):
    return d.cdf(x)


def mean(d : Distribution) -> float:
    return d.mean()


def sample(d : Distribution, rng : np.random.Generator, size=None):
    return d.sample(rng, size)


def is_symmetric(d : Distribution, tol : float = 1e-9) -> bool:
    return d.is_symmetric(tol)


def quantile(d : Continuous, q):
    return d.quantile(q)


def support(d : Continuous) -> Tuple[float, float]:
    return d.support()


def atoms(d : Atomic) -> List[Tuple[float, float]]:
    return d.atoms()


def shifted(d : Atomic, s : float) -> Atomic:
    return d.shifted(s)


def classify(d : Distribution) -> frozenset:
    """Tags naming the well-behaved classes d can belong to."""
    tags = set()
    if isinstance(d, Exponential):
        tags |= {'exponential', 'shape-uniform:exp1'}
    if isinstance(d, ShapeUniform):
        tags.add(f'shape-uniform:{d.base.name}')
        if d.base.name == 'exp1':
            tags.add('exponential')
    if isinstance(d, Translated):
        tags.add(f'translated:{d.base.name}')
    if isinstance(d, UniformInterval) and d.lo == 0.0:
        tags.add('shape-uniform:uniform01x2')
    if isinstance(d, Continuous) and d.is_symmetric():
        tags.add('symmetric')
    return frozenset(tags)


def to_dict(d : Distribution) -> dict:
    return d.to_dict()


def from_dict(obj : dict) -> Distribution:
    """Decode the JSON form of a distribution; any defect raises ParseError."""
    if not isinstance(obj, dict) or 'type' not in obj:
        raise ParseError(f"distribution must be an object with a 'type' key, got {obj!r}")
    kind = obj['type']
    try:
        if kind == 'deterministic':
            return Deterministic(float(obj['value']))
        if kind == 'finite':
            return FiniteDiscrete(tuple((float(v), float(p)) for v, p in obj['atoms']))
        if kind == 'exponential':
            return Exponential(float(obj['rate']))
        if kind == 'uniform':
            return UniformInterval(float(obj['lo']), float(obj['hi']))
        if kind == 'shape_uniform':
            return ShapeUniform(obj['base'], float(obj['rate']))
        if kind == 'translated':
            return Translated(obj['base'], float(obj['shift']))
        if kind == 'piecewise_uniform':
            return PiecewiseUniform(tuple((float(lo), float(hi), float(p)) for lo, hi, p in obj['bins']))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad {kind} distribution {obj!r}: {e}") from e
    raise ParseError(f"unknown distribution type {kind!r}")
