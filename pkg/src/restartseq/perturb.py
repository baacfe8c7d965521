"""Gaps in the support and delays of a hitting time.

A gap at ``m`` of length ``g`` keeps ``u(n)`` below ``m`` and pushes every
later mass back by ``g``; ``m = 0`` is a plain delay.  The restart sequence
of the result has a closed form in terms of the original one, which is used
here as a cross-check of the direct computation and to derive thresholds on
``g``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dist import DEFAULT_TOL, UNBOUNDED, Explicit, Gapped, Pmf, survival_window
from .errors import InapplicableError
from .restart_seq import restart_sequence


@dataclass(frozen=True)
class GapSpec:
    m: int
    g: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"gap cut point must be a non-negative integer, got {self.m!r}")
        if int(self.g) != self.g or self.g < 1:
            raise ValueError(f"gap length must be a positive integer, got {self.g!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "g", int(self.g))


class Threshold(enum.Enum):
    ALWAYS_BENEFICIAL = "AlwaysBeneficial"


ALWAYS_BENEFICIAL = Threshold.ALWAYS_BENEFICIAL


def insert_gap(d: Pmf, spec: GapSpec) -> Pmf:
    """Distribution of U with the gap inserted.

    Finite supports come back as an explicit table; infinite ones as a
    :class:`Gapped` view that keeps the exact tail.
    """
    a, b = d.support()
    if b == UNBOUNDED:
        return Gapped(d, spec.m, spec.g)
    b = int(b)
    if spec.m > b:
        return d
    lo = a if a < spec.m else a + spec.g
    probs = Gapped(d, spec.m, spec.g).pmf_array(lo, b + spec.g)
    return Explicit(lo, tuple(probs.tolist()))


def predicted_gap_sequence(d: Pmf, spec: GapSpec, n_max: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Restart sequence of the gapped distribution from the original's.

    Pre-gap ``S_n - U(n)(1-U(m-1)) g``; within the gap
    ``S_{m-1} + (1-U(m-1))(1 - U(m-1) g + n - m)``; afterwards
    ``S_{n-g} + (1-U(m-1))(1-U(n-g)) g``.
    """
    m, g = spec.m, spec.g
    s = restart_sequence(d, tol, horizon=max(n_max, m)).values
    n = np.arange(n_max + 1)
    cum = survival_window(d, n_max).cmf
    u_cut = d.cmf(m - 1)
    s_cut = s[m - 1] if m >= 1 else 0.0
    s = s[: n_max + 1]
    keep = 1.0 - u_cut
    out = np.empty(n_max + 1)
    pre = n < m
    out[pre] = s[pre] - cum[pre] * keep * g
    gap = (n >= m) & (n < m + g)
    out[gap] = s_cut + keep * (1.0 - u_cut * g + n[gap] - m)
    post = n >= m + g
    src = n[post] - g
    out[post] = s[src] + keep * (1.0 - cum[src]) * g
    return out


def within_gap_bounds(d: Pmf, spec: GapSpec, tol: float = DEFAULT_TOL) -> bool:
    """Check ``1 - g U(m-1) <= (S~_n - S_{m-1}) / (1 - U(m-1)) <= (1 - U(m-1)) g`` in the gap."""
    m, g = spec.m, spec.g
    keep = 1.0 - d.cmf(m - 1)
    if keep <= 0.0:
        return True  # gap lies past the support: nothing to bound
    gapped = insert_gap(d, spec)
    st = restart_sequence(gapped, tol, horizon=m + g).values
    s_cut = restart_sequence(d, tol, horizon=max(m - 1, 0)).values[m - 1] if m >= 1 else 0.0
    ratio = (st[m : m + g] - s_cut) / keep
    slack = 1e-9 * max(1.0, g)
    return bool(np.all(ratio >= 1.0 - g * (1.0 - keep) - slack) and np.all(ratio <= keep * g + slack))


def pre_gap_benefit_threshold(d: Pmf, n: int, m: int, tol: float = DEFAULT_TOL):
    """Gap length above which ``S~_n`` turns negative for some ``n < m``.

    Returns ``ALWAYS_BENEFICIAL`` when ``S_n`` is already non-positive.
    """
    if not 0 <= n < m:
        raise InapplicableError("pre-gap threshold needs 0 <= n < m")
    un = d.cmf(n)
    keep = 1.0 - d.cmf(m - 1)
    if un <= 0.0 or keep <= 0.0:
        raise InapplicableError(f"needs U(n) > 0 and U(m-1) < 1 (U(n)={un!r}, U(m-1)={1 - keep!r})")
    seq = restart_sequence(d, tol, horizon=n)
    s_n = float(seq.values[n])
    if s_n <= seq.eps_sign:
        return ALWAYS_BENEFICIAL
    return s_n / (un * keep)


def post_gap_threshold(d: Pmf, n: int, m: int, tol: float = DEFAULT_TOL) -> float:
    """``|S_n| / ((1 - U(m-1)) (1 - U(n)))``: the largest gap (exclusive) that keeps ``S~_{n+g} < 0``."""
    if n < m:
        raise InapplicableError("post-gap test needs n >= m")
    sf_n = d.sf(n)
    if sf_n <= 0.0:
        raise InapplicableError(f"U({n}) = 1: nothing lies beyond the gap")
    seq = restart_sequence(d, tol, horizon=n)
    s_n = float(seq.values[n])
    if s_n >= -seq.eps_sign:
        raise InapplicableError(f"S_{n} = {s_n!r} is not negative")
    return abs(s_n) / (d.sf(m - 1) * sf_n)


def post_gap_benefit_preserved(d: Pmf, n: int, m: int, g: int, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``S~_{n+g}`` stays negative, i.e. sharp restart at ``n + 1 + g`` still helps.

    Requires ``S_n < 0`` and ``n >= m``.
    """
    return g < post_gap_threshold(d, n, m, tol)


def delay_benefit_preserved(d: Pmf, n: int, g: int, tol: float = DEFAULT_TOL) -> bool:
    """Delay by ``g``: true iff ``g < |S_n| / (1 - U(n))``."""
    return post_gap_benefit_preserved(d, n, 0, g, tol)
