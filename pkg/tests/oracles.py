"""Independent reference computations in extended precision.

Nothing here calls into the package's numerics: PMFs come from mpmath
closed forms and restart sequences from the forward partial sums.
"""

from __future__ import annotations

import mpmath as mp

from restartseq import (
    Binomial,
    Deterministic,
    Explicit,
    Geometric,
    NegativeBinomial,
    Poisson,
    ShiftedGeometric,
    TwoPoint,
    Uniform,
    Zeta,
)

mp.mp.dps = 40


def pmf(d, n: int):
    n = int(n)
    if n < 0:
        return mp.mpf(0)
    if isinstance(d, Deterministic):
        return mp.mpf(n == d.n)
    if isinstance(d, Geometric):
        rho = mp.mpf(d.rho)
        return rho * (1 - rho) ** n
    if isinstance(d, ShiftedGeometric):
        rho = mp.mpf(d.rho)
        return rho * (1 - rho) ** (n - 1) if n >= 1 else mp.mpf(0)
    if isinstance(d, TwoPoint):
        w = mp.mpf(d.w1)
        return (w if n == d.n1 else 0) + (1 - w if n == d.n2 else 0)
    if isinstance(d, Uniform):
        return mp.mpf(1) / (d.b - d.a + 1) if d.a <= n <= d.b else mp.mpf(0)
    if isinstance(d, Binomial):
        p = mp.mpf(d.p)
        return mp.binomial(d.n, n) * p**n * (1 - p) ** (d.n - n) if n <= d.n else mp.mpf(0)
    if isinstance(d, Poisson):
        lam = mp.mpf(d.lam)
        return mp.exp(-lam) * lam**n / mp.factorial(n)
    if isinstance(d, NegativeBinomial):
        r, p = mp.mpf(d.r), mp.mpf(d.p)
        return mp.gamma(n + r) / (mp.gamma(r) * mp.factorial(n)) * p**n * (1 - p) ** r
    if isinstance(d, Zeta):
        return mp.mpf(n + 1) ** (-mp.mpf(d.p)) / mp.zeta(d.p)
    if isinstance(d, Explicit):
        i = n - d.offset
        return mp.mpf(d.probs[i]) if 0 <= i < len(d.probs) else mp.mpf(0)
    raise TypeError(f"no oracle for {d!r}")


def mean(d):
    if isinstance(d, Deterministic):
        return mp.mpf(d.n)
    if isinstance(d, Geometric):
        return (1 - mp.mpf(d.rho)) / d.rho
    if isinstance(d, ShiftedGeometric):
        return 1 / mp.mpf(d.rho)
    if isinstance(d, TwoPoint):
        return d.w1 * mp.mpf(d.n1) + (1 - mp.mpf(d.w1)) * d.n2
    if isinstance(d, Uniform):
        return mp.mpf(d.a + d.b) / 2
    if isinstance(d, Binomial):
        return d.n * mp.mpf(d.p)
    if isinstance(d, Poisson):
        return mp.mpf(d.lam)
    if isinstance(d, NegativeBinomial):
        return mp.mpf(d.r) * d.p / (1 - mp.mpf(d.p))
    if isinstance(d, Zeta):
        if d.p <= 2:
            return mp.inf
        return mp.zeta(d.p - 1) / mp.zeta(d.p) - 1
    if isinstance(d, Explicit):
        return mp.fsum((d.offset + i) * mp.mpf(p) for i, p in enumerate(d.probs))
    raise TypeError(f"no oracle for {d!r}")


def restart_sequence(d, n_max: int) -> list[float]:
    """Forward partial sums ``S_n = sum_{k<=n} (1 - U(k) - u(k) E)``."""
    e = mean(d)
    out = []
    cum = mp.mpf(0)
    s = mp.mpf(0)
    for k in range(n_max + 1):
        u = pmf(d, k)
        cum += u
        s += 1 - cum - u * e
        out.append(float(s))
    return out


def cmf(d, n: int):
    return mp.fsum(pmf(d, k) for k in range(0, int(n) + 1))
