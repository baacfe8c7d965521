"""Mean hitting times under restart, and a Monte Carlo check of them.

A process with hitting time U is restarted at an independent time R; if
``R <= U`` the time R is spent and the process starts afresh.  The mean of
the resulting hitting time T is

    E[T] = E[U ^ R] / (1 - p_r),   p_r = P(R <= U),

and restart is non-preemptive when ``p_r < 1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._numerics import compensated_cumsum, sign_tolerance
from .dist import DEFAULT_TOL, UNBOUNDED, Pmf, inverse_cmf, survival_window, truncation_point
from .errors import (
    DegenerateRestartError,
    InfiniteMeanError,
    PreemptiveRestartError,
    RestartCapExceeded,
)
from .restart_seq import auto_horizon, restart_sequence

DEFAULT_MAX_ITERATIONS = 10**7
BLOCK_SIZE = 1 << 16
# window used to tabulate inverse CMFs in the simulator
_SAMPLING_TOL = 1e-9
_SAMPLING_WINDOW = 1 << 16
# sentinel restart time for "never restart"
_NEVER = np.iinfo(np.int64).max


@dataclass(frozen=True)
class Sharp:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"sharp restart time must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    def to_spec(self) -> dict:
        return {"policy": "sharp", "N": self.n}


@dataclass(frozen=True)
class Distributional:
    """Restart time drawn from ``r``; with probability ``p_never`` it never fires."""

    r: Pmf
    p_never: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_never < 1.0:
            raise ValueError("p_never must lie in [0, 1)")
        a, b = self.r.support()
        if a == 0 and b == 0 and self.p_never == 0.0:
            raise DegenerateRestartError("R = 0 almost surely restarts forever at no cost")

    def sf(self, n: int) -> float:
        return self.p_never + (1.0 - self.p_never) * self.r.sf(n)

    def to_spec(self) -> dict:
        out = {"policy": "dist", "r": self.r.to_spec()}
        if self.p_never:
            out["p_never"] = self.p_never
        return out


@dataclass(frozen=True)
class NoRestart:
    def to_spec(self) -> dict:
        return {"policy": "none"}


RestartPolicy = Union[Sharp, Distributional, NoRestart]


@dataclass(frozen=True)
class HittingTimeResult:
    e_t: float
    p_r: float
    e_min: float
    benefit_gap: float

    def to_dict(self) -> dict:
        return {
            "e_t": self.e_t,
            "p_r": self.p_r,
            "e_min": self.e_min,
            "benefit_gap": self.benefit_gap,
        }


def _joint_horizon(d: Pmf, pol: Distributional, tol: float) -> int:
    """Index beyond which either U or R has at most ``tol`` survival left."""
    bounds = []
    # with never-firing mass, R's survival stays at p_never past its support
    for x, ends in ((d, True), (pol.r, pol.p_never == 0.0)):
        if not ends:
            continue
        _, b = x.support()
        if b != UNBOUNDED:
            bounds.append(int(b))
        elif not math.isinf(x.mean()):
            bounds.append(truncation_point(x, tol))
    if not bounds:
        raise InfiniteMeanError("both E[U] and E[R] are infinite")
    return min(bounds)


def _distributional_sums(d: Pmf, pol: Distributional, tol: float) -> tuple[float, float, float]:
    """(p_r, P(U < R), E[U ^ R]) by direct summation up to the joint horizon.

    ``P(U < R)`` is summed on its own rather than taken as ``1 - p_r``, which
    would cancel badly for nearly preemptive policies.
    """
    n_end = _joint_horizon(d, pol, tol)
    w = survival_window(d, n_end + 1)
    su, cu = w.sf, w.cmf
    sr = survival_window(pol.r, n_end + 1).sf
    fire = 1.0 - pol.p_never
    r = fire * pol.r.pmf_array(0, n_end + 1)
    # P(R <= U) = sum_n r(n) P(U >= n), with P(U >= 0) = 1
    su_prev = np.concatenate(([1.0], su[:-1]))
    cu_prev = np.concatenate(([0.0], cu[:-1]))
    p_r = math.fsum((r * su_prev).tolist())
    # R beyond the window: U is done by then up to the window's tail mass
    complete = pol.p_never + math.fsum((r * cu_prev).tolist()) + fire * float(sr[-1]) * float(cu[-1])
    sr_all = pol.p_never + fire * sr[: n_end + 1]
    e_min = math.fsum((su[: n_end + 1] * sr_all).tolist())
    return min(p_r, 1.0), min(complete, 1.0), e_min


def p_restart(d: Pmf, pol: RestartPolicy, tol: float = DEFAULT_TOL) -> float:
    """``P(R <= U)``; ties restart."""
    if isinstance(pol, NoRestart):
        return 0.0
    if isinstance(pol, Sharp):
        return d.sf(pol.n - 1)
    return _distributional_sums(d, pol, tol)[0]


def _completion(d: Pmf, pol: RestartPolicy, tol: float) -> float:
    """``P(U < R)``, the chance one foray finishes before restart fires."""
    if isinstance(pol, NoRestart):
        return 1.0
    if isinstance(pol, Sharp):
        return d.cmf(pol.n - 1)
    return _distributional_sums(d, pol, tol)[1]


def mean_min(d: Pmf, pol: RestartPolicy, tol: float = DEFAULT_TOL) -> float:
    """``E[U ^ R] = sum_n (1 - U(n)) (1 - R(n))``."""
    if isinstance(pol, NoRestart):
        return d.mean()
    if isinstance(pol, Sharp):
        return math.fsum(survival_window(d, pol.n - 1).sf.tolist())
    return _distributional_sums(d, pol, tol)[2]


def mean_hitting_time(d: Pmf, pol: RestartPolicy, tol: float = DEFAULT_TOL) -> HittingTimeResult:
    """Exact ``E[T]`` and its gap to ``E[U]`` for one restart policy."""
    e_u = d.mean()
    if isinstance(pol, NoRestart):
        if math.isinf(e_u):
            raise InfiniteMeanError("E[U] is infinite and nothing restarts")
        return HittingTimeResult(e_t=e_u, p_r=0.0, e_min=e_u, benefit_gap=0.0)
    if isinstance(pol, Sharp):
        complete = d.cmf(pol.n - 1)  # 1 - p_r, kept accurate when small
        p_r = d.sf(pol.n - 1)
        e_min = mean_min(d, pol)
    else:
        p_r, complete, e_min = _distributional_sums(d, pol, tol)
    eps = sign_tolerance(0.0 if math.isinf(e_u) else e_u)
    if complete <= eps:
        raise PreemptiveRestartError(
            f"restart fires before completion with probability {p_r!r}", p_restart=p_r
        )
    e_t = e_min / complete
    return HittingTimeResult(e_t=e_t, p_r=p_r, e_min=e_min, benefit_gap=e_t - e_u)


def benefit_gap_identity(d: Pmf, n: int, tol: float = DEFAULT_TOL) -> float:
    """``E[T_N] - E[U]`` for sharp restart at N, as ``S_{N-1} / U(N-1)``."""
    complete = d.cmf(n - 1)
    if complete <= 0.0:
        raise PreemptiveRestartError(f"U({n - 1}) = 0: sharp restart at {n} is preemptive")
    seq = restart_sequence(d, tol, horizon=n - 1)
    return float(seq.values[n - 1]) / complete


@dataclass(frozen=True)
class SharpProfile:
    """``E[T_N]`` for N = 1..n_max, NaN where restart is preemptive."""

    n: np.ndarray
    e_t: np.ndarray

    def gap(self, mean_u: float) -> np.ndarray:
        return self.e_t - mean_u


def sharp_profile(d: Pmf, n_max: int) -> SharpProfile:
    """All sharp restart times at once via running survival sums."""
    w = survival_window(d, n_max - 1)
    running = compensated_cumsum(w.sf)
    e_u = d.mean()
    eps = sign_tolerance(0.0 if math.isinf(e_u) else e_u)
    complete = w.cmf
    with np.errstate(divide="ignore", invalid="ignore"):
        e_t = np.where(complete > eps, running / complete, np.nan)
    return SharpProfile(n=np.arange(1, n_max + 1), e_t=e_t)


def optimize_sharp(d: Pmf, n_max: int | None = None, tol: float = DEFAULT_TOL) -> tuple[int | None, float]:
    """Best sharp restart time in ``[1, n_max]``; ``(None, E[U])`` if none helps.

    The default range is the truncation horizon plus one.  Ties go to the
    smallest N.
    """
    e_u = d.mean()
    if math.isinf(e_u):
        raise InfiniteMeanError(f"{d.family} has infinite mean")
    if n_max is None:
        n_max = auto_horizon(d, tol) + 1
    prof = sharp_profile(d, n_max)
    valid = ~np.isnan(prof.e_t)
    if not valid.any():
        return None, e_u
    i = int(np.nanargmin(prof.e_t))
    best = float(prof.e_t[i])
    if best < e_u - sign_tolerance(e_u):
        return int(prof.n[i]), best
    return None, e_u


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimulationResult:
    replicates: int
    seed: int
    mean_estimate: float
    std_error: float
    restarts_per_run_mean: float

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "seed": self.seed,
            "mean_estimate": self.mean_estimate,
            "std_error": self.std_error,
            "restarts_per_run_mean": self.restarts_per_run_mean,
        }


class _Sampler:
    """Vectorised inverse-CMF draws from a tabulated window.

    Draws landing beyond the window get an exact scalar search, or just the
    lower bound ``window + 1`` when the caller only needs to know that.
    """

    def __init__(self, d: Pmf):
        self.d = d
        self.a = d.support()[0]
        _, b = d.support()
        if b != UNBOUNDED:
            top = int(b)
        else:
            top = truncation_point(d, _SAMPLING_TOL, limit=_SAMPLING_WINDOW)
        self.top = top
        self._neg_sf = -survival_window(d, top).sf

    def draw(self, x: np.ndarray, stop: np.ndarray | None = None) -> np.ndarray:
        # first n with sf(n) <= 1 - x
        idx = np.searchsorted(self._neg_sf, -(1.0 - x), side="left").astype(np.int64)
        np.maximum(idx, self.a, out=idx)
        beyond = np.flatnonzero(idx > self.top)
        for j in beyond.tolist():
            if stop is not None and stop[j] <= self.top + 1:
                continue  # value irrelevant: restart fires first
            idx[j] = inverse_cmf(self.d, float(x[j]))
        return idx


def _simulate_block(d_sampler, r_sampler, pol, size, seed, block, cap):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    total = np.zeros(size, dtype=np.int64)
    restarts = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    it = 0
    while len(active):
        it += 1
        if it > cap:
            raise RestartCapExceeded(f"a replicate restarted more than {cap} times")
        k = len(active)
        if isinstance(pol, Sharp):
            r = np.full(k, pol.n, dtype=np.int64)
        elif isinstance(pol, NoRestart):
            r = np.full(k, _NEVER, dtype=np.int64)
        else:
            xr = rng.random(k)
            r = r_sampler.draw(xr)
            if pol.p_never:
                never = rng.random(k) < pol.p_never
                r[never] = _NEVER
        u = d_sampler.draw(rng.random(k), stop=r)
        done = u < r
        total[active[done]] += u[done]
        total[active[~done]] += r[~done]
        restarts[active[~done]] += 1
        active = active[~done]
    return total, restarts


def simulate(
    d: Pmf,
    pol: RestartPolicy,
    replicates: int,
    seed: int,
    *,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    workers: int = 1,
) -> SimulationResult:
    """Monte Carlo estimate of ``E[T]``.

    Replicates are split into fixed blocks of ``BLOCK_SIZE``; block ``i``
    draws from the stream ``SeedSequence(seed, spawn_key=(i,))``, so the
    result depends only on ``(seed, replicates)``, whatever ``workers`` is.
    """
    if replicates < 1:
        raise ValueError("replicates must be positive")
    seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
    e_u = d.mean()
    eps = sign_tolerance(0.0 if math.isinf(e_u) else e_u)
    p_r = p_restart(d, pol)
    if _completion(d, pol, DEFAULT_TOL) <= eps:
        raise PreemptiveRestartError(f"p_r = {p_r!r}: the process would never finish", p_r)
    d_sampler = _Sampler(d)
    r_sampler = _Sampler(pol.r) if isinstance(pol, Distributional) else None
    sizes = [min(BLOCK_SIZE, replicates - s) for s in range(0, replicates, BLOCK_SIZE)]

    def run(i):
        return _simulate_block(d_sampler, r_sampler, pol, sizes[i], seed, i, max_iterations)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(i) for i in range(len(sizes))]
    totals = np.concatenate([t for t, _ in blocks])
    restarts = np.concatenate([r for _, r in blocks])
    mean_est = int(totals.sum()) / replicates
    if replicates > 1:
        dev = totals.astype(float) - mean_est
        var = math.fsum((dev * dev).tolist()) / (replicates - 1)
        std_error = math.sqrt(var / replicates)
    else:
        std_error = 0.0
    return SimulationResult(
        replicates=replicates,
        seed=seed,
        mean_estimate=mean_est,
        std_error=std_error,
        restarts_per_run_mean=int(restarts.sum()) / replicates,
    )
