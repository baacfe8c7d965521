"""Discrete distributions on the non-negative integers.

Every distribution exposes the PMF ``u(n)``, CMF ``U(n)``, survival
``1 - U(n)``, the mean and the support bounds.  Survival values are computed
directly rather than as ``1 - U(n)`` so that tails keep their relative
accuracy, and each family also reports ``tail_excess(n)``, the sum of the
survival function strictly beyond ``n``.  Those two quantities are what lets
restart sequences of infinite-support families be evaluated on a finite
window without losing the part beyond it.
"""

from __future__ import annotations

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, ClassVar

import numpy as np

from ._numerics import compensated_cumsum, hurwitz_zeta, suffix_sums, zeta
from .errors import DistributionError, InfiniteMeanError

UNBOUNDED = math.inf
DEFAULT_TOL = 1e-12

# Explicit tables within this distance of total mass 1 are renormalized
_NORMALIZE_SLACK = 1e-9
# ... and left untouched inside this one
_EXACT_SLACK = 1e-12

_TRUNCATE_LIMIT = 1 << 24


class LogShape(str, enum.Enum):
    LOG_CONCAVE = "LogConcave"
    LOG_CONVEX = "LogConvex"
    GEOMETRIC_EXACT = "GeometricExact"
    NEITHER = "Neither"


@dataclass(frozen=True)
class RatioProfile:
    """Monotone behaviour of ``u(n+1)/u(n)`` on ``n >= start``.

    ``trend`` is one of ``"increasing"``, ``"decreasing"``, ``"constant"``
    (all weak) and ``limit`` is the limit of the ratio as n grows.
    """

    start: int
    trend: str
    limit: float
    ratio: Callable[[int], float]


class Pmf(ABC):
    """A probability distribution on {0, 1, 2, ...}."""

    family: ClassVar[str]

    @abstractmethod
    def pmf(self, n: int) -> float: ...

    @abstractmethod
    def cmf(self, n: int) -> float: ...

    @abstractmethod
    def sf(self, n: int) -> float:
        """Survival ``1 - U(n)``; equals 1 for n < 0."""

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def support(self) -> tuple[int, float]:
        """(a, b) with ``b = UNBOUNDED`` for infinite support."""

    @abstractmethod
    def tail_excess(self, n: int) -> float:
        """``sum_{k > n} (1 - U(k))``, i.e. ``E[(U - n - 1)^+]``."""

    @abstractmethod
    def to_spec(self) -> dict: ...

    def pmf_array(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self.pmf(k) for k in range(lo, hi + 1)], dtype=float)

    @property
    def bounded(self) -> bool:
        return self.support()[1] != UNBOUNDED

    def log_shape(self) -> LogShape | None:
        """Analytic log-shape class, or None if it must be checked numerically."""
        return None

    def ratio_profile(self) -> RatioProfile | None:
        return None

    def exact_pmf(self, n: int) -> Fraction:
        """``u(n)`` as a rational; the float value unless the family knows better."""
        return Fraction(self.pmf(n))


# ---------------------------------------------------------------------------
# finitely supported families


class FinitePmf(Pmf):
    """Base for families whose probabilities fit in a finite table."""

    @abstractmethod
    def _table(self) -> tuple[int, np.ndarray]: ...

    @cached_property
    def _tab(self):
        offset, probs = self._table()
        probs = np.asarray(probs, dtype=float)
        cum = np.minimum(compensated_cumsum(probs), 1.0)
        surv = suffix_sums(probs)
        return offset, probs, cum, surv

    def support(self) -> tuple[int, float]:
        offset, probs, _, _ = self._tab
        return offset, offset + len(probs) - 1

    def pmf(self, n: int) -> float:
        offset, probs, _, _ = self._tab
        i = n - offset
        if 0 <= i < len(probs):
            return float(probs[i])
        return 0.0

    def pmf_array(self, lo: int, hi: int) -> np.ndarray:
        offset, probs, _, _ = self._tab
        out = np.zeros(max(0, hi - lo + 1))
        s, e = max(lo, offset), min(hi, offset + len(probs) - 1)
        if s <= e:
            out[s - lo : e - lo + 1] = probs[s - offset : e - offset + 1]
        return out

    def cmf(self, n: int) -> float:
        offset, probs, cum, _ = self._tab
        if n < offset:
            return 0.0
        if n >= offset + len(probs) - 1:
            return 1.0
        return float(cum[n - offset])

    def sf(self, n: int) -> float:
        offset, probs, _, surv = self._tab
        if n < offset:
            return 1.0
        if n >= offset + len(probs) - 1:
            return 0.0
        return float(surv[n - offset])

    def mean(self) -> float:
        offset, probs, _, _ = self._tab
        return math.fsum((offset + i) * p for i, p in enumerate(probs.tolist()))

    def tail_excess(self, n: int) -> float:
        offset, probs, _, _ = self._tab
        return math.fsum(
            (offset + i - n - 1) * p
            for i, p in enumerate(probs.tolist())
            if offset + i > n + 1
        )


def _check_int(name: str, value, lo: int = 0) -> int:
    if isinstance(value, bool) or int(value) != value or value < lo:
        raise DistributionError(f"{name} must be an integer >= {lo}, got {value!r}")
    return int(value)


def _check_open_unit(name: str, value) -> float:
    value = float(value)
    if not 0.0 < value < 1.0:
        raise DistributionError(f"{name} must lie in (0, 1), got {value!r}")
    return value


@dataclass(frozen=True)
class Explicit(FinitePmf):
    """An explicit probability table starting at ``offset``.

    Leading and trailing zeros are trimmed into the offset.  Totals within
    1e-9 of one are renormalized; anything further off is rejected.
    """

    offset: int
    probs: tuple

    family: ClassVar[str] = "explicit"

    def __post_init__(self):
        offset = _check_int("offset", self.offset)
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or len(probs) == 0:
            raise DistributionError("probs must be a non-empty sequence")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise DistributionError("probabilities must be finite and non-negative")
        nz = np.flatnonzero(probs)
        if len(nz) == 0:
            raise DistributionError("probabilities are all zero")
        offset += int(nz[0])
        probs = probs[nz[0] : nz[-1] + 1]
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > _NORMALIZE_SLACK:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        if abs(total - 1.0) > _EXACT_SLACK:
            probs = probs / total
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))

    @classmethod
    def window(cls, offset: int, probs) -> "Explicit":
        """Table taken verbatim from a truncation window.

        The values are not renormalized; the mass beyond the window (at most
        the truncation tolerance) simply stays missing.
        """
        probs = [float(p) for p in probs]
        out = cls(offset, tuple(probs))  # validates and trims zeros
        start = out.offset - offset
        object.__setattr__(out, "probs", tuple(probs[start : start + len(out.probs)]))
        out.__dict__.pop("_tab", None)
        return out

    def _table(self):
        return self.offset, np.array(self.probs)

    def to_spec(self) -> dict:
        return {"family": "explicit", "offset": self.offset, "probs": list(self.probs)}


@dataclass(frozen=True)
class Deterministic(FinitePmf):
    n: int

    family: ClassVar[str] = "deterministic"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_int("N", self.n))

    def _table(self):
        return self.n, np.array([1.0])

    def mean(self) -> float:
        return float(self.n)

    def log_shape(self):
        return LogShape.LOG_CONCAVE

    def to_spec(self) -> dict:
        return {"family": "deterministic", "N": self.n}


@dataclass(frozen=True)
class TwoPoint(FinitePmf):
    """Mass ``w1`` at ``n1`` and ``1 - w1`` at ``n2 > n1``."""

    w1: float
    n1: int
    n2: int

    family: ClassVar[str] = "two_point"

    def __post_init__(self):
        object.__setattr__(self, "w1", _check_open_unit("w1", self.w1))
        n1 = _check_int("N1", self.n1)
        n2 = _check_int("N2", self.n2)
        if n2 <= n1:
            raise DistributionError("two_point needs N2 > N1")
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)

    def _table(self):
        probs = np.zeros(self.n2 - self.n1 + 1)
        probs[0] = self.w1
        probs[-1] = 1.0 - self.w1
        return self.n1, probs

    def cmf(self, n: int) -> float:
        if n < self.n1:
            return 0.0
        return self.w1 if n < self.n2 else 1.0

    def sf(self, n: int) -> float:
        if n < self.n1:
            return 1.0
        return 1.0 - self.w1 if n < self.n2 else 0.0

    def mean(self) -> float:
        return self.w1 * self.n1 + (1.0 - self.w1) * self.n2

    def log_shape(self):
        return LogShape.LOG_CONCAVE if self.n2 == self.n1 + 1 else LogShape.NEITHER

    def to_spec(self) -> dict:
        return {"family": "two_point", "w1": self.w1, "N1": self.n1, "N2": self.n2}


@dataclass(frozen=True)
class Uniform(FinitePmf):
    a: int
    b: int

    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        a = _check_int("a", self.a)
        b = _check_int("b", self.b)
        if b < a:
            raise DistributionError("uniform needs a <= b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def _table(self):
        width = self.b - self.a + 1
        return self.a, np.full(width, 1.0 / width)

    def cmf(self, n: int) -> float:
        if n < self.a:
            return 0.0
        if n >= self.b:
            return 1.0
        return (n - self.a + 1) / (self.b - self.a + 1)

    def sf(self, n: int) -> float:
        if n < self.a:
            return 1.0
        if n >= self.b:
            return 0.0
        return (self.b - n) / (self.b - self.a + 1)

    def mean(self) -> float:
        return (self.a + self.b) / 2.0

    def exact_pmf(self, n: int) -> Fraction:
        return Fraction(1, self.b - self.a + 1) if self.a <= n <= self.b else Fraction(0)

    def log_shape(self):
        return LogShape.LOG_CONCAVE

    def to_spec(self) -> dict:
        return {"family": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Binomial(FinitePmf):
    n: int
    p: float

    family: ClassVar[str] = "binomial"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_int("N", self.n, lo=1))
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise DistributionError(f"binomial p must lie in [0, 1], got {p!r}")
        object.__setattr__(self, "p", p)

    def _table(self):
        if self.p == 0.0:
            return 0, np.array([1.0])
        if self.p == 1.0:
            return self.n, np.array([1.0])
        k = np.arange(self.n + 1)
        log_c = np.array(
            [math.lgamma(self.n + 1) - math.lgamma(i + 1) - math.lgamma(self.n - i + 1) for i in k]
        )
        logp = log_c + k * math.log(self.p) + (self.n - k) * math.log1p(-self.p)
        return 0, np.exp(logp)

    def mean(self) -> float:
        return self.n * self.p

    def log_shape(self):
        return LogShape.LOG_CONCAVE

    def to_spec(self) -> dict:
        return {"family": "binomial", "N": self.n, "p": self.p}


# ---------------------------------------------------------------------------
# infinite support


@dataclass(frozen=True)
class Geometric(Pmf):
    """``u(n) = rho (1 - rho)^n`` on n >= 0."""

    rho: float

    family: ClassVar[str] = "geometric"

    def __post_init__(self):
        object.__setattr__(self, "rho", _check_open_unit("rho", self.rho))

    @property
    def _q(self) -> float:
        return 1.0 - self.rho

    def pmf(self, n: int) -> float:
        return float(self.pmf_array(n, n)[0])

    def pmf_array(self, lo, hi):
        k = np.arange(lo, hi + 1)
        return np.where(k >= 0, self.rho * self._q ** np.maximum(k, 0), 0.0)

    def cmf(self, n: int) -> float:
        if n < 0:
            return 0.0
        return -math.expm1((n + 1) * math.log1p(-self.rho))

    def sf(self, n: int) -> float:
        return self._q ** (n + 1) if n >= 0 else 1.0

    def mean(self) -> float:
        return self._q / self.rho

    def support(self):
        return 0, UNBOUNDED

    def tail_excess(self, n: int) -> float:
        if n < -1:
            return self.mean() + (-1 - n)
        return self._q ** (n + 2) / self.rho

    def log_shape(self):
        return LogShape.GEOMETRIC_EXACT

    def ratio_profile(self):
        q = self._q
        return RatioProfile(0, "constant", q, lambda n: q)

    def to_spec(self) -> dict:
        return {"family": "geometric", "rho": self.rho}


@dataclass(frozen=True)
class ShiftedGeometric(Pmf):
    """``u(n) = rho (1 - rho)^(n-1)`` on n >= 1."""

    rho: float

    family: ClassVar[str] = "shifted_geometric"

    def __post_init__(self):
        object.__setattr__(self, "rho", _check_open_unit("rho", self.rho))

    @property
    def _q(self) -> float:
        return 1.0 - self.rho

    def pmf(self, n: int) -> float:
        return float(self.pmf_array(n, n)[0])

    def pmf_array(self, lo, hi):
        k = np.arange(lo, hi + 1)
        return np.where(k >= 1, self.rho * self._q ** np.maximum(k - 1, 0), 0.0)

    def cmf(self, n: int) -> float:
        if n < 1:
            return 0.0
        return -math.expm1(n * math.log1p(-self.rho))

    def sf(self, n: int) -> float:
        return self._q**n if n >= 0 else 1.0

    def mean(self) -> float:
        return 1.0 / self.rho

    def support(self):
        return 1, UNBOUNDED

    def tail_excess(self, n: int) -> float:
        if n < -1:
            return self.mean() + (-1 - n)
        return self._q ** (n + 1) / self.rho

    def log_shape(self):
        return LogShape.LOG_CONCAVE

    def ratio_profile(self):
        q = self._q
        return RatioProfile(1, "constant", q, lambda n: q)

    def to_spec(self) -> dict:
        return {"family": "shifted_geometric", "rho": self.rho}


class _LightTailed(Pmf):
    """Shared tail machinery for families whose ratio tends to a limit < 1."""

    @abstractmethod
    def _mode(self) -> int: ...

    def _tail_sum(self, start: int, shift: int | None = None) -> float:
        """``sum_{k >= start} w(k) u(k)`` with ``w = 1`` or ``w = k - shift``."""
        start = max(start, 0)
        parts = []
        lo = start
        chunk = 64
        mode = self._mode()
        while True:
            hi = lo + chunk - 1
            vals = self.pmf_array(lo, hi)
            if shift is not None:
                vals = vals * (np.arange(lo, hi + 1) - shift)
            parts.append(math.fsum(vals.tolist()))
            if hi > mode:
                acc = math.fsum(parts)
                if vals[-1] == 0.0 or vals[-1] <= 1e-20 * acc:
                    return acc
            lo = hi + 1
            chunk = min(chunk * 2, 1 << 16)

    def cmf(self, n: int) -> float:
        if n < 0:
            return 0.0
        if n <= self._mode():
            return min(1.0, math.fsum(self.pmf_array(0, n).tolist()))
        return 1.0 - self.sf(n)

    def sf(self, n: int) -> float:
        if n < 0:
            return 1.0
        if n + 1 > self._mode():
            return self._tail_sum(n + 1)
        return 1.0 - self.cmf(n)

    def tail_excess(self, n: int) -> float:
        if n < -1:
            return self.mean() + (-1 - n)
        return self._tail_sum(n + 2, shift=n + 1)

    def support(self):
        return 0, UNBOUNDED


@dataclass(frozen=True)
class Poisson(_LightTailed):
    lam: float

    family: ClassVar[str] = "poisson"

    def __post_init__(self):
        lam = float(self.lam)
        if not (lam > 0.0 and math.isfinite(lam)):
            raise DistributionError(f"poisson lambda must be positive, got {lam!r}")
        object.__setattr__(self, "lam", lam)

    def _mode(self) -> int:
        return int(self.lam)

    def pmf(self, n: int) -> float:
        return float(self.pmf_array(n, n)[0])

    def pmf_array(self, lo, hi):
        k = np.arange(lo, hi + 1)
        kk = np.maximum(k, 0)
        lg = np.array([math.lgamma(i + 1) for i in kk.tolist()])
        vals = np.exp(kk * math.log(self.lam) - self.lam - lg)
        return np.where(k >= 0, vals, 0.0)

    def mean(self) -> float:
        return self.lam

    def log_shape(self):
        return LogShape.LOG_CONCAVE

    def ratio_profile(self):
        lam = self.lam
        return RatioProfile(0, "decreasing", 0.0, lambda n: lam / (n + 1))

    def to_spec(self) -> dict:
        return {"family": "poisson", "lambda": self.lam}


@dataclass(frozen=True)
class NegativeBinomial(_LightTailed):
    """``u(n) = C(n+r-1, n) p^n (1-p)^r`` with real ``r > 0``."""

    r: float
    p: float

    family: ClassVar[str] = "negative_binomial"

    def __post_init__(self):
        r = float(self.r)
        p = float(self.p)
        if not (r > 0.0 and math.isfinite(r)):
            raise DistributionError(f"negative_binomial r must be positive, got {r!r}")
        if not 0.0 <= p < 1.0:
            raise DistributionError(f"negative_binomial p must lie in [0, 1), got {p!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p", p)

    def _mode(self) -> int:
        if self.r <= 1.0 or self.p == 0.0:
            return 0
        return int((self.r - 1.0) * self.p / (1.0 - self.p)) + 1

    def _logpmf(self, k: np.ndarray) -> np.ndarray:
        lg = np.array(
            [math.lgamma(i + self.r) - math.lgamma(i + 1) for i in k.tolist()]
        )
        return lg - math.lgamma(self.r) + k * math.log(self.p) + self.r * math.log1p(-self.p)

    def pmf(self, n: int) -> float:
        if n < 0:
            return 0.0
        if self.p == 0.0:
            return 1.0 if n == 0 else 0.0
        return float(np.exp(self._logpmf(np.array([n])))[0])

    def pmf_array(self, lo, hi):
        k = np.arange(lo, hi + 1)
        if self.p == 0.0:
            return (k == 0).astype(float)
        kk = np.maximum(k, 0)
        return np.where(k >= 0, np.exp(self._logpmf(kk)), 0.0)

    def support(self):
        return (0, 0) if self.p == 0.0 else (0, UNBOUNDED)

    def sf(self, n: int) -> float:
        if self.p == 0.0:
            return 1.0 if n < 0 else 0.0
        return super().sf(n)

    def mean(self) -> float:
        return self.p * self.r / (1.0 - self.p)

    def log_shape(self):
        if self.p == 0.0 or self.r > 1.0:
            return LogShape.LOG_CONCAVE
        if self.r == 1.0:
            return LogShape.GEOMETRIC_EXACT
        return LogShape.LOG_CONVEX

    def ratio_profile(self):
        if self.p == 0.0:
            return None
        p, r = self.p, self.r
        trend = "constant" if r == 1.0 else ("increasing" if r < 1.0 else "decreasing")
        return RatioProfile(0, trend, p, lambda n: p * (n + r) / (n + 1))

    def to_spec(self) -> dict:
        return {"family": "negative_binomial", "r": self.r, "p": self.p}


@dataclass(frozen=True)
class Zeta(Pmf):
    """``u(n) = 1 / (zeta(p) (n+1)^p)`` on n >= 0."""

    p: float

    family: ClassVar[str] = "zeta"

    def __post_init__(self):
        p = float(self.p)
        if not (p > 1.0 and math.isfinite(p)):
            raise DistributionError(f"zeta p must exceed 1, got {p!r}")
        object.__setattr__(self, "p", p)

    @cached_property
    def _norm(self) -> float:
        return zeta(self.p)

    def pmf(self, n: int) -> float:
        return float(self.pmf_array(n, n)[0])

    def pmf_array(self, lo, hi):
        k = np.arange(lo, hi + 1, dtype=float)
        return np.where(k >= 0, (np.maximum(k, 0) + 1.0) ** -self.p / self._norm, 0.0)

    def cmf(self, n: int) -> float:
        if n < 0:
            return 0.0
        if n < 64:
            return min(1.0, math.fsum(self.pmf_array(0, n).tolist()))
        return 1.0 - self.sf(n)

    def sf(self, n: int) -> float:
        if n < 0:
            return 1.0
        return hurwitz_zeta(self.p, n + 2.0) / self._norm

    @cached_property
    def _mean(self) -> float:
        if self.p <= 2.0:
            return math.inf
        return zeta(self.p - 1.0) / self._norm - 1.0

    def mean(self) -> float:
        return self._mean

    def support(self):
        return 0, UNBOUNDED

    def tail_excess(self, n: int) -> float:
        if self.p <= 2.0:
            return math.inf
        if n < -1:
            return self.mean() + (-1 - n)
        a = n + 3.0
        # sum_{m >= n+3} (m - n - 2) m^-p
        return (hurwitz_zeta(self.p - 1.0, a) - (n + 2.0) * hurwitz_zeta(self.p, a)) / self._norm

    def log_shape(self):
        return LogShape.LOG_CONVEX

    def ratio_profile(self):
        p = self.p
        return RatioProfile(
            0, "increasing", 1.0, lambda n: math.exp(p * math.log1p(-1.0 / (n + 2.0)))
        )

    def to_spec(self) -> dict:
        return {"family": "zeta", "p": self.p}


@dataclass(frozen=True)
class Gapped(Pmf):
    """``base`` cut at ``m`` with every later mass pushed back by ``g``.

    Used for gap insertion on infinite-support distributions, where an
    explicit table would discard the tail.
    """

    base: Pmf
    m: int
    g: int

    family: ClassVar[str] = "gapped"

    def __post_init__(self):
        object.__setattr__(self, "m", _check_int("m", self.m))
        object.__setattr__(self, "g", _check_int("g", self.g, lo=1))

    def _src(self, n: int) -> int | None:
        if n < self.m:
            return n
        if n < self.m + self.g:
            return None
        return n - self.g

    def pmf(self, n: int) -> float:
        k = self._src(n)
        return 0.0 if k is None else self.base.pmf(k)

    def pmf_array(self, lo, hi):
        out = np.zeros(max(0, hi - lo + 1))
        s, e = lo, min(hi, self.m - 1)
        if s <= e:
            out[s - lo : e - lo + 1] = self.base.pmf_array(s, e)
        s = max(lo, self.m + self.g)
        if s <= hi:
            out[s - lo :] = self.base.pmf_array(s - self.g, hi - self.g)
        return out

    def cmf(self, n: int) -> float:
        k = self._src(n)
        return self.base.cmf(self.m - 1 if k is None else k)

    def sf(self, n: int) -> float:
        k = self._src(n)
        return self.base.sf(self.m - 1 if k is None else k)

    def mean(self) -> float:
        return self.base.mean() + self.g * self.base.sf(self.m - 1)

    def support(self):
        a, b = self.base.support()
        a2 = a if a < self.m else a + self.g
        b2 = b if b < self.m else b + self.g
        return a2, b2

    def tail_excess(self, n: int) -> float:
        edge = self.m + self.g - 1
        if n >= edge:
            return self.base.tail_excess(n - self.g)
        extra = math.fsum(self.sf(k) for k in range(n + 1, edge + 1))
        return self.base.tail_excess(edge - self.g) + extra

    def log_shape(self):
        a, _ = self.base.support()
        if self.m > a:
            # a gap inside the support is an internal zero
            return LogShape.NEITHER if self.m <= self.base.support()[1] else self.base.log_shape()
        base_shape = self.base.log_shape()
        # a pure delay: u(a')^2 > u(a'-1) u(a'+1) = 0 rules out log-convexity
        if base_shape in (LogShape.LOG_CONCAVE, LogShape.GEOMETRIC_EXACT):
            return LogShape.LOG_CONCAVE
        if base_shape is None:
            return None
        return LogShape.NEITHER

    def ratio_profile(self):
        prof = self.base.ratio_profile()
        if prof is None:
            return None
        g = self.g
        return RatioProfile(
            max(self.m, prof.start) + g, prof.trend, prof.limit, lambda n: prof.ratio(n - g)
        )

    def to_spec(self) -> dict:
        return {"family": "gapped", "base": self.base.to_spec(), "m": self.m, "g": self.g}


# ---------------------------------------------------------------------------
# module-level accessors


def pmf_at(d: Pmf, n: int) -> float:
    return d.pmf(n)


def cmf_at(d: Pmf, n: int) -> float:
    """``U(n)``, with ``U(-1) = 0``."""
    return d.cmf(n)


def mean(d: Pmf) -> float:
    """E[U]; ``math.inf`` when the series diverges."""
    return d.mean()


def support_bounds(d: Pmf) -> tuple[int, float]:
    return d.support()


def truncation_point(d: Pmf, tol: float = DEFAULT_TOL, limit: int | None = None) -> int:
    """Smallest ``n`` with ``1 - U(n) <= tol`` (``b`` for finite support).

    The search stops at ``limit`` if given and returns ``limit``.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    a, b = d.support()
    if b != UNBOUNDED:
        return int(b)
    lo = max(a - 1, -1)  # sf(lo) > tol
    hi = max(a, 1)
    while d.sf(hi) > tol:
        lo = hi
        hi *= 2
        if limit is not None and hi >= limit:
            if d.sf(limit) > tol:
                return limit
            hi = limit
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if d.sf(mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class TruncatedView:
    """Finite window ``[offset, n_max]`` onto a distribution."""

    offset: int
    probs: np.ndarray
    tail_mass: float
    n_max: int

    def to_explicit(self) -> Explicit:
        return Explicit.window(self.offset, self.probs.tolist())


def truncate(d: Pmf, tol: float = DEFAULT_TOL, max_n: int = _TRUNCATE_LIMIT) -> TruncatedView:
    """Window covering all but ``tol`` of the mass."""
    if math.isinf(d.mean()):
        raise InfiniteMeanError(f"{d.family} has infinite mean; no finite window applies")
    n_max = truncation_point(d, tol, limit=max_n + 1)
    if n_max > max_n:
        raise ValueError(f"truncation at tol={tol} needs more than {max_n} points")
    a, _ = d.support()
    return TruncatedView(
        offset=a,
        probs=d.pmf_array(a, n_max),
        tail_mass=d.sf(n_max) if not d.bounded else 0.0,
        n_max=n_max,
    )


def inverse_cmf(d: Pmf, x: float) -> int:
    """First ``n >= a`` with ``U(n) >= x``, for ``x`` in [0, 1).

    Implemented as the first ``n`` with ``1 - U(n) <= 1 - x`` so that the
    search always terminates on infinite supports.
    """
    t = 1.0 - x
    a, b = d.support()
    if d.sf(a) <= t:
        return a
    lo, hi = a, a + 1
    while d.sf(hi) > t:
        lo = hi
        hi = a + 2 * (hi - a)
        if hi > b:
            hi = int(b)
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if d.sf(mid) > t:
            lo = mid
        else:
            hi = mid
    return hi


def sample(d: Pmf, rng: np.random.Generator) -> int:
    """One inverse-CMF draw; advances ``rng`` by a single uniform."""
    return inverse_cmf(d, float(rng.random()))


@dataclass(frozen=True)
class SurvivalWindow:
    """Arrays over ``0..n_max``: pmf, CMF, survival and survival tail sums."""

    u: np.ndarray
    cmf: np.ndarray
    sf: np.ndarray
    tail: np.ndarray  # tail[n] = sum_{k>n} sf(k)

    @property
    def n_max(self) -> int:
        return len(self.u) - 1


@lru_cache(maxsize=64)
def survival_window(d: Pmf, n_max: int) -> SurvivalWindow:
    u = d.pmf_array(0, n_max)
    cum = np.minimum(compensated_cumsum(u), 1.0)
    a, b = d.support()
    if n_max >= b:
        sf = suffix_sums(u, 0.0)
        tail = suffix_sums(sf, 0.0)
    else:
        sf = suffix_sums(u, d.sf(n_max))
        tail = suffix_sums(sf, d.tail_excess(n_max))
    for arr in (u, cum, sf, tail):
        arr.flags.writeable = False
    return SurvivalWindow(u, cum, sf, tail)


# ---------------------------------------------------------------------------
# structured-text specs

_FAMILIES = {
    "deterministic": (Deterministic, ("N",)),
    "geometric": (Geometric, ("rho",)),
    "shifted_geometric": (ShiftedGeometric, ("rho",)),
    "two_point": (TwoPoint, ("w1", "N1", "N2")),
    "uniform": (Uniform, ("a", "b")),
    "binomial": (Binomial, ("N", "p")),
    "poisson": (Poisson, ("lambda",)),
    "zeta": (Zeta, ("p",)),
    "negative_binomial": (NegativeBinomial, ("r", "p")),
    "explicit": (Explicit, ("offset", "probs")),
}


def from_spec(spec: dict) -> Pmf:
    """Build a distribution from ``{"family": name, **params}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise DistributionError("distribution spec must be an object with a 'family' key")
    name = spec["family"]
    if name == "gapped":
        return Gapped(from_spec(spec["base"]), spec["m"], spec["g"])
    try:
        cls, keys = _FAMILIES[name]
    except KeyError:
        raise DistributionError(f"unknown family {name!r}") from None
    params = dict(spec)
    params.pop("family")
    if name == "explicit":
        params.setdefault("offset", 0)
    extra = set(params) - set(keys)
    missing = set(keys) - set(params)
    if extra or missing:
        raise DistributionError(
            f"{name} expects parameters {list(keys)}, got {sorted(set(spec) - {'family'})}"
        )
    args = [params[k] for k in keys]
    if name == "explicit":
        args[1] = tuple(args[1])
    try:
        return cls(*args)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DistributionError):
            raise
        raise DistributionError(str(exc)) from exc
