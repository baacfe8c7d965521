"""Recover a distribution from its restart sequence and mean.

With ``F_n = 1 + S_{n-1} - S_n`` (``S_{-1} = 0``), ``p = 1/(E[U]+1)`` and
``q = 1 - p`` the CMF satisfies ``U(n) = p F_n + q U(n-1)``, so a sequence
together with a mean pins the distribution down.  Not every pair is
realizable; the result is validated as it is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DEFAULT_TOL, Explicit, Pmf, survival_window
from .errors import InconsistentTailError, NotADistributionError
from .restart_seq import auto_horizon, restart_sequence

VALIDATION_TOL = 1e-9
# a window ending within this of zero is continued at zero
ZERO_TAIL_TOL = 1e-6
# remaining mass at which a continued tail is cut off
_TAIL_CUTOFF = 1e-15
_MAX_TAIL = 1 << 22
MEAN_TOL = 1e-6


@dataclass(frozen=True)
class FSequence:
    values: np.ndarray


def f_sequence(s) -> FSequence:
    s = np.asarray(s, dtype=float)
    prev = np.concatenate(([0.0], s[:-1]))
    return FSequence(1.0 + prev - s)


def _cmf_recurrence(f: np.ndarray, mean: float, start: float = 0.0) -> np.ndarray:
    """``U(n) = p F_n + q U(n-1)``; kept as the reference form."""
    p = 1.0 / (mean + 1.0)
    q = mean / (mean + 1.0)
    out = np.empty(len(f))
    prev = start
    for i, fi in enumerate(f.tolist()):
        prev = p * fi + q * prev
        out[i] = prev
    return out


def _sf_recurrence(s: np.ndarray, mean: float) -> np.ndarray:
    # complement of the CMF recurrence: 1 - U(n) = q (1 - U(n-1)) + p (S_n - S_{n-1}).
    # Stays accurate where U(n) is within rounding of 1.
    p = 1.0 / (mean + 1.0)
    q = mean / (mean + 1.0)
    out = np.empty(len(s))
    prev_sf, prev_s = 1.0, 0.0
    for i, si in enumerate(s.tolist()):
        prev_sf = q * prev_sf + p * (si - prev_s)
        prev_s = si
        out[i] = prev_sf
    return out


def _validate(sf: np.ndarray) -> np.ndarray:
    out_of_range = (sf < -VALIDATION_TOL) | (sf > 1.0 + VALIDATION_TOL)
    if np.any(out_of_range):
        bad = int(np.flatnonzero(out_of_range)[0])
        raise NotADistributionError(f"U({bad}) = {float(1.0 - sf[bad])!r} lies outside [0, 1]")
    probs = -np.diff(np.concatenate(([1.0], sf)))
    if np.any(probs < -VALIDATION_TOL):
        bad = int(np.flatnonzero(probs < -VALIDATION_TOL)[0])
        raise NotADistributionError(f"U decreases at n={bad} by {float(-probs[bad])!r}")
    return np.clip(probs, 0.0, None)


def _check_input(s, mean: float) -> np.ndarray:
    if not mean > 0.0:
        raise ValueError("mean must be positive")
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or len(s) == 0:
        raise ValueError("restart sequence must be a non-empty 1-d sequence")
    return s


def reconstruct_window(s, mean: float) -> np.ndarray:
    """Validated CMF ``U(0..n)`` implied by the window, with no tail model.

    Beyond the window ``sum_{k>n} (1 - U(k)) = E[U] (1 - U(n)) - S_n`` is
    fixed by the window itself; it must be non-negative, and positive only
    if mass remains.
    """
    s = _check_input(s, mean)
    sf = _sf_recurrence(s, mean)
    _validate(sf)
    rest = max(float(sf[-1]), 0.0)
    excess = mean * rest - float(s[-1])
    slack = VALIDATION_TOL * (mean + 1.0)
    if excess < -slack or (rest <= _TAIL_CUTOFF and excess > slack):
        raise InconsistentTailError(
            f"window implies a tail sum of {excess!r} beyond n={len(s) - 1} with remaining mass {rest!r}"
        )
    return np.clip(1.0 - sf, 0.0, 1.0)


def reconstruct_cmf(s, mean: float) -> Explicit:
    """Explicit PMF whose restart sequence at the given mean is ``s``.

    A window whose last value is (nearly) zero is taken to stay at zero
    beyond it, which appends a geometric tail with ratio ``mean/(mean+1)``.
    """
    s = _check_input(s, mean)
    sf = _sf_recurrence(s, mean)
    if abs(s[-1]) <= ZERO_TAIL_TOL * max(1.0, mean):
        q = mean / (mean + 1.0)
        rest = sf[-1]
        if rest > _TAIL_CUTOFF:
            # F = 1 from here on: 1 - U decays by q per step
            length = min(_MAX_TAIL, math.ceil(math.log(_TAIL_CUTOFF / rest) / math.log(q)))
            sf = np.concatenate((sf, rest * q ** np.arange(1, length + 1)))
    probs = _validate(sf)
    total = math.fsum(probs.tolist())
    if total <= 0.0:
        raise NotADistributionError("reconstructed CMF carries no mass")
    rec = Explicit(0, tuple((probs / total).tolist()))
    if abs(rec.mean() - mean) > MEAN_TOL * (mean + 1.0):
        raise InconsistentTailError(
            f"reconstructed mean {rec.mean()!r} differs from the requested {mean!r}"
        )
    return rec


def round_trip_error(d: Pmf, tol: float = DEFAULT_TOL, horizon: int | None = None) -> float:
    """``max_n |U_rec(n) - U(n)|`` over the window.

    Compares the validated window CMF, so tails too heavy for any practical
    window to carry the mean still round-trip.
    """
    n_max = auto_horizon(d, tol) if horizon is None else int(horizon)
    seq = restart_sequence(d, tol, horizon=n_max)
    rec = reconstruct_window(seq.values, seq.mean_u)
    orig = survival_window(d, n_max).cmf
    return float(np.max(np.abs(rec - orig)))
