"""Restart sequences and the diagnostics derived from them.

For a hitting time U with finite mean the restart sequence is

    S_n = sum_{k<=n} (1 - U(k) - u(k) E[U]),

and some restart policy lowers the mean hitting time exactly when some
``S_n`` is negative; sharp restart at ``n + 1`` is then one such policy.

Because ``sum_k (1 - U(k)) = E[U]``, the same partial sums can be written in
tail form, ``S_n = E[U] (1 - U(n)) - sum_{k>n} (1 - U(k))``.  That is the form
evaluated here: it involves only tail quantities, so values far out in a
light tail keep their sign instead of drowning in cancellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._numerics import banded_sign, sign_tolerance
from .dist import (
    DEFAULT_TOL,
    UNBOUNDED,
    LogShape,
    Pmf,
    survival_window,
    truncation_point,
)
from .errors import InfiniteMeanError, NotApplicableError

# ceiling for the automatic horizon (heavy tails would otherwise need ~1e8 points)
MAX_AUTO_HORIZON = 1 << 20

# relative slack when comparing u(n+1)/u(n) against K
_RATIO_TOL = 1e-12


@dataclass(frozen=True)
class RestartSequence:
    values: np.ndarray
    mean_u: float
    k_ratio: float
    tail_mass: float
    horizon: int

    @property
    def eps_sign(self) -> float:
        return sign_tolerance(self.mean_u)

    def __len__(self) -> int:
        return len(self.values)


def _finite_mean(d: Pmf) -> float:
    m = d.mean()
    if math.isinf(m):
        raise InfiniteMeanError(f"{d.family} has infinite mean")
    return m


def auto_horizon(d: Pmf, tol: float = DEFAULT_TOL) -> int:
    """Truncation point at ``tol``, capped at ``MAX_AUTO_HORIZON``."""
    return min(truncation_point(d, tol, limit=MAX_AUTO_HORIZON), MAX_AUTO_HORIZON)


def restart_sequence(d: Pmf, tol: float = DEFAULT_TOL, horizon: int | None = None) -> RestartSequence:
    """``S_0 .. S_horizon``; the horizon defaults to the ``tol`` truncation point."""
    e = _finite_mean(d)
    n_max = auto_horizon(d, tol) if horizon is None else int(horizon)
    if n_max < 0:
        raise ValueError("horizon must be non-negative")
    w = survival_window(d, n_max)
    values = e * w.sf - w.tail
    a, b = d.support()
    # before the support the forward sums are exact integers
    head = min(int(a), n_max + 1)
    values[:head] = np.arange(1, head + 1)
    if b != UNBOUNDED and n_max >= b:
        values[int(b):] = 0.0
    return RestartSequence(
        values=values,
        mean_u=e,
        k_ratio=e / (e + 1.0),
        tail_mass=float(w.sf[-1]),
        horizon=n_max,
    )


# ---------------------------------------------------------------------------
# verdicts


class CertificateReason(str, enum.Enum):
    LOG_CONCAVE = "LogConcave"
    CONVEX_OR_LINEAR_BOUNDED = "ConvexOrLinearBounded"
    ALL_NON_NEGATIVE_FINITE_SUPPORT = "AllNonNegativeFiniteSupport"


@dataclass(frozen=True)
class Beneficial:
    witness: int  # sharp restart time N = n* + 1
    s_value: float

    tag = "Beneficial"

    def to_dict(self) -> dict:
        return {"tag": self.tag, "witness": self.witness, "s_value": self.s_value}


@dataclass(frozen=True)
class NotBeneficialCertified:
    reason: CertificateReason

    tag = "NotBeneficialCertified"

    def to_dict(self) -> dict:
        return {"tag": self.tag, "reason": self.reason.value}


@dataclass(frozen=True)
class NotBeneficialWithinHorizon:
    horizon: int
    min_s: float

    tag = "NotBeneficialWithinHorizon"

    def to_dict(self) -> dict:
        return {"tag": self.tag, "horizon": self.horizon, "min_s": self.min_s}


@dataclass(frozen=True)
class Neutral:
    tag = "Neutral"

    def to_dict(self) -> dict:
        return {"tag": self.tag}


@dataclass(frozen=True)
class TriviallyBeneficial:
    tag = "TriviallyBeneficial"

    def to_dict(self) -> dict:
        return {"tag": self.tag}


Verdict = Beneficial | NotBeneficialCertified | NotBeneficialWithinHorizon | Neutral | TriviallyBeneficial


def first_negative(seq: RestartSequence) -> int | None:
    """Least index with ``S_n < -eps_sign``."""
    idx = np.flatnonzero(seq.values < -seq.eps_sign)
    return int(idx[0]) if len(idx) else None


def beneficial(d: Pmf, tol: float = DEFAULT_TOL, horizon: int | None = None) -> Verdict:
    """Decide whether any restart policy can lower E[T] below E[U].

    Cases are tried in a fixed order: infinite mean, geometric, a negative
    ``S_n`` inside the horizon, an analytic certificate, and finally a
    horizon-bounded "no".
    """
    if math.isinf(d.mean()):
        return TriviallyBeneficial()
    shape = log_shape(d)
    if shape is LogShape.GEOMETRIC_EXACT and not d.bounded:
        return Neutral()
    seq = restart_sequence(d, tol, horizon)
    n_star = first_negative(seq)
    if n_star is not None:
        return Beneficial(witness=n_star + 1, s_value=float(seq.values[n_star]))
    if shape is LogShape.LOG_CONCAVE:
        return NotBeneficialCertified(CertificateReason.LOG_CONCAVE)
    _, b = d.support()
    if b != UNBOUNDED:
        try:
            if bounded_verdict(d) is BoundedVerdict.NON_NEGATIVE_EVERYWHERE:
                return NotBeneficialCertified(CertificateReason.CONVEX_OR_LINEAR_BOUNDED)
        except NotApplicableError:
            pass
        if seq.horizon >= b - 1:
            return NotBeneficialCertified(CertificateReason.ALL_NON_NEGATIVE_FINITE_SUPPORT)
    return NotBeneficialWithinHorizon(horizon=seq.horizon, min_s=float(seq.values.min()))


# ---------------------------------------------------------------------------
# first step analysis


@dataclass(frozen=True)
class FsaResult:
    threshold: float
    mean_u: float
    admits: bool

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "mean_u": self.mean_u, "admits": self.admits}


def fsa(d: Pmf) -> FsaResult:
    """Sign of ``S_a`` at the first support point, as ``E[U] > (a+1-u(a))/u(a)``.

    ``S_a = u(a) (threshold - E[U])``, so the comparison carries the same
    zero band as every other sign test: a threshold within ``eps_sign/u(a)``
    of the mean does not admit.
    """
    e = _finite_mean(d)
    a, _ = d.support()
    ua = d.exact_pmf(a)
    # rational arithmetic keeps integer thresholds exact (uniform: a(b-a)+b)
    threshold = float((a + 1 - ua) / ua)
    admits = threshold < e - sign_tolerance(e) / float(ua)
    return FsaResult(threshold=threshold, mean_u=e, admits=admits)


# ---------------------------------------------------------------------------
# convexity


class Convexity(str, enum.Enum):
    CONVEX = "Convex"
    LINEAR = "Linear"
    CONCAVE = "Concave"


def _classify(dn: float, eps: float) -> Convexity:
    s = banded_sign(dn, eps)
    return Convexity.CONCAVE if s > 0 else Convexity.CONVEX if s < 0 else Convexity.LINEAR


def convexity_at(d: Pmf, n: int) -> tuple[float, Convexity]:
    """Second difference ``C_n = (S_{n-1} - 2 S_n + S_{n+1}) / 2`` in closed form.

    ``n = 0`` is accepted under the convention ``S_{-1} = 0``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    e = _finite_mean(d)
    k = e / (e + 1.0)
    un, un1 = d.pmf(n), d.pmf(n + 1)
    c = 0.5 * (e + 1.0) * (un * k - un1)
    return c, _classify(un1 - k * un, sign_tolerance(e))


class BoundedVerdict(str, enum.Enum):
    NON_NEGATIVE_EVERYWHERE = "NonNegativeEverywhere"
    FSA_DECIDES = "FsaDecides"


def bounded_verdict(d: Pmf) -> BoundedVerdict:
    """Finite support with one convexity class on ``[a, b-1]``.

    Convex or linear throughout means S never dips below zero; concave
    throughout means the first step decides.  A single support point counts
    as concave, where the FSA correctly rejects.
    """
    a, b = d.support()
    if b == UNBOUNDED:
        raise NotApplicableError("bounded_verdict needs finite support")
    b = int(b)
    if a == b:
        return BoundedVerdict.FSA_DECIDES
    e = _finite_mean(d)
    k = e / (e + 1.0)
    eps = sign_tolerance(e)
    u = d.pmf_array(a, b)
    classes = {_classify(dn, eps) for dn in (u[1:] - k * u[:-1]).tolist()}
    if classes == {Convexity.CONCAVE}:
        return BoundedVerdict.FSA_DECIDES
    if Convexity.CONCAVE not in classes:
        return BoundedVerdict.NON_NEGATIVE_EVERYWHERE
    raise NotApplicableError(f"mixed convexity on the support: {sorted(c.value for c in classes)}")


# ---------------------------------------------------------------------------
# log-shape


def _windowed_log_shape(u: np.ndarray, bounded: bool = True) -> LogShape:
    """Classify a PMF table that starts at index 0.

    A bounded table ends at its last support point; an unbounded one is a
    window whose final entry only serves as the right neighbour.  Indices
    before the support matter: a zero at ``a - 1`` breaks log-convexity at
    ``a`` but never log-concavity.
    """
    padded = np.concatenate((u, [0.0])) if bounded else np.asarray(u)
    nz = np.flatnonzero(padded)
    a = int(nz[0])
    last = int(nz[-1]) if bounded else len(padded) - 2
    if np.any(padded[a : last + 1] == 0):
        return LogShape.NEITHER
    lo = max(a, 1)
    mid = padded[lo : last + 1]
    left = padded[lo - 1 : last]
    right = padded[lo + 1 : last + 2]
    sq = mid * mid
    cross = left * right
    slack = _RATIO_TOL * np.maximum(sq, cross)
    concave = bool(np.all(sq >= cross - slack))
    convex = bool(np.all(sq <= cross + slack))
    if concave and not convex:
        return LogShape.LOG_CONCAVE
    if convex and not concave:
        return LogShape.LOG_CONVEX
    if concave and convex:
        return LogShape.GEOMETRIC_EXACT
    return LogShape.NEITHER


def log_shape(d: Pmf, tol: float = DEFAULT_TOL) -> LogShape:
    """Log-concave / log-convex / geometric classification of the PMF."""
    shape = d.log_shape()
    if shape is not None:
        return shape
    a, b = d.support()
    if b == UNBOUNDED:
        # no analytic information: judge the window, never call it geometric
        n_max = truncation_point(d, tol, limit=MAX_AUTO_HORIZON)
        shape = _windowed_log_shape(d.pmf_array(0, n_max + 1), bounded=False)
        return LogShape.NEITHER if shape is LogShape.GEOMETRIC_EXACT else shape
    return _windowed_log_shape(d.pmf_array(0, int(b)))


# ---------------------------------------------------------------------------
# tails


class TailClass(str, enum.Enum):
    CONVEX_TAIL = "ConvexTail"
    CONCAVE_TAIL = "ConcaveTail"
    LINEAR_TAIL = "LinearTail"
    UNDETERMINED = "Undetermined"


_TAIL_OF_SIGN = {1: TailClass.CONCAVE_TAIL, -1: TailClass.CONVEX_TAIL, 0: TailClass.LINEAR_TAIL}


def _first_true(pred, lo: int) -> int:
    """Least ``n >= lo`` with ``pred(n)``, for a predicate monotone in n."""
    if pred(lo):
        return lo
    step = 1
    hi = lo + 1
    while not pred(hi):
        lo = hi
        step *= 2
        hi = lo + step
        if hi > 1 << 62:
            raise NotApplicableError("ratio never crosses K")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tail_class(d: Pmf, tol: float = DEFAULT_TOL) -> tuple[int | None, TailClass]:
    """Index M after which ``d_n = u(n+1) - K u(n)`` keeps one sign.

    Finite supports end in the zero tail ``S_n = 0`` from ``b`` on.  Built-in
    infinite families use their monotone PMF ratio; anything else falls back
    to the last sign change inside the truncation window, reported as
    Undetermined.
    """
    e = _finite_mean(d)
    k = e / (e + 1.0)
    a, b = d.support()
    if b != UNBOUNDED:
        return int(b), TailClass.LINEAR_TAIL
    prof = d.ratio_profile()
    if prof is None:
        return _windowed_tail(d, k, e, tol)

    def above(n):
        return prof.ratio(n) > k * (1 + _RATIO_TOL)

    def below(n):
        return prof.ratio(n) < k * (1 - _RATIO_TOL)

    n0 = prof.start
    if prof.trend == "constant":
        sign = 1 if above(n0) else -1 if below(n0) else 0
        m = n0
    elif prof.trend == "increasing":
        if prof.limit > k * (1 + _RATIO_TOL):
            sign, m = 1, _first_true(above, n0)
        else:
            sign, m = -1, n0
    else:
        if prof.limit < k * (1 - _RATIO_TOL):
            sign, m = -1, _first_true(below, n0)
        else:
            sign, m = 1, n0
    if m == n0:
        # extend backwards through the part of the PMF the profile does not cover
        eps = sign_tolerance(e)
        while m > 0 and banded_sign(d.pmf(m) - k * d.pmf(m - 1), eps) == sign:
            m -= 1
    return m, _TAIL_OF_SIGN[sign]


def _windowed_tail(d: Pmf, k: float, e: float, tol: float) -> tuple[int, TailClass]:
    n_max = auto_horizon(d, tol)
    u = d.pmf_array(0, n_max + 1)
    dn = u[1:] - k * u[:-1]
    eps = sign_tolerance(e)
    signs = np.where(dn > eps, 1, np.where(dn < -eps, -1, 0))
    changes = np.flatnonzero(signs != signs[-1])
    m = int(changes[-1]) + 1 if len(changes) else 0
    return m, TailClass.UNDETERMINED
