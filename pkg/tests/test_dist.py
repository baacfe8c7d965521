import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gallery import ALL, HEAVY, LIGHT
from restartseq import (
    Binomial,
    Deterministic,
    DistributionError,
    Explicit,
    Gapped,
    Geometric,
    InfiniteMeanError,
    NegativeBinomial,
    Poisson,
    ShiftedGeometric,
    TwoPoint,
    Uniform,
    Zeta,
    from_spec,
    truncate,
)
from restartseq.dist import (
    LogShape,
    cmf_at,
    inverse_cmf,
    mean,
    pmf_at,
    sample,
    support_bounds,
    survival_window,
    truncation_point,
)


# --- documented examples --------------------------------------------------


def test_pmf_examples():
    assert pmf_at(Geometric(0.5), 2) == 0.125
    assert pmf_at(Deterministic(3), 3) == 1.0
    assert pmf_at(Deterministic(3), 2) == 0.0
    assert abs(pmf_at(Zeta(3), 0) - 0.8319073725807075) < 1e-15


def test_cmf_examples():
    assert cmf_at(Geometric(0.5), 1) == 0.75
    assert cmf_at(TwoPoint(0.5, 1, 6), 3) == 0.5
    for d in ALL:
        assert cmf_at(d, -1) == 0.0


def test_mean_examples():
    assert mean(Geometric(0.5)) == 1.0
    assert abs(mean(Zeta(3)) - 0.3684327776202061) < 1e-13
    assert mean(Zeta(1.5)) == math.inf
    assert mean(Zeta(2.0)) == math.inf


def test_truncate_examples():
    t = truncate(Deterministic(3), 1e-12)
    assert (t.offset, list(t.probs), t.tail_mass) == (3, [1.0], 0.0)
    assert truncation_point(Geometric(0.5), 1e-3) == 9
    assert truncate(Geometric(0.5), 1e-3).n_max == 9
    with pytest.raises(InfiniteMeanError):
        truncate(Zeta(1.5), 1e-6)


def test_support_examples():
    assert support_bounds(Uniform(2, 5)) == (2, 5)
    assert support_bounds(Poisson(2.0)) == (0, math.inf)
    assert support_bounds(ShiftedGeometric(0.3)) == (1, math.inf)


def test_sample_examples():
    assert inverse_cmf(Deterministic(3), 0.123) == 3
    assert inverse_cmf(Geometric(0.5), 0.6) == 1
    assert inverse_cmf(TwoPoint(0.5, 1, 6), 0.7) == 6
    rng = np.random.default_rng(0)
    assert all(sample(Deterministic(3), rng) == 3 for _ in range(20))


# --- agreement with the extended-precision oracle -------------------------


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
def test_pmf_and_mean_against_oracle(d):
    for n in range(0, 40):
        assert pmf_at(d, n) == pytest.approx(float(oracles.pmf(d, n)), rel=1e-12, abs=1e-300)
    assert mean(d) == pytest.approx(float(oracles.mean(d)), rel=1e-13)


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
def test_survival_against_oracle(d):
    for n in [0, 1, 3, 10, 30]:
        exact = 1 - oracles.cmf(d, n)
        assert d.sf(n) == pytest.approx(float(exact), rel=1e-10, abs=1e-15)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
@pytest.mark.parametrize("n", [0, 5, 100, 5000])
def test_zeta_tail_quantities(p, n):
    d = Zeta(p)
    z = mp.zeta(p)
    sf = mp.zeta(p, n + 2) / z
    # sum_{k>n} sf(k) = sum_{j>=n+3} (j - n - 2) j^-p, in Hurwitz form
    tail = (mp.zeta(p - 1, n + 3) - (n + 2) * mp.zeta(p, n + 3)) / z
    assert d.sf(n) == pytest.approx(float(sf), rel=1e-12)
    assert d.tail_excess(n) == pytest.approx(float(tail), rel=1e-10)


def test_zeta_tail_identity_brute_force():
    p, n, J = 4, 3, 20000
    direct = mp.fsum((j - n - 2) * mp.mpf(j) ** -p for j in range(n + 3, J))
    # remainder of sum j^-3 beyond J is below 1/(2 J^2)
    closed = mp.zeta(p - 1, n + 3) - (n + 2) * mp.zeta(p, n + 3)
    assert abs(closed - direct) < 1 / (2 * J**2)


# --- invariants -----------------------------------------------------------


@pytest.mark.parametrize("d", ALL, ids=repr)
def test_pmf_sums_to_cmf(d):
    n_max = min(truncation_point(d, 1e-12), 2000)
    u = d.pmf_array(0, n_max)
    partial = np.cumsum(u)
    cmf = np.array([d.cmf(k) for k in range(n_max + 1)])
    assert np.max(np.abs(partial - cmf)) <= 1e-10


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
def test_survival_sum_recovers_mean(d):
    n_max = truncation_point(d, 1e-12)
    w = survival_window(d, n_max)
    # tail[n_max] is the exact remainder, so the corrected sum is tight
    assert math.fsum(w.sf.tolist()) + w.tail[-1] == pytest.approx(d.mean(), abs=1e-8)
    if d.bounded:
        assert w.tail[-1] == 0.0


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
def test_truncated_view(d):
    t = truncate(d, 1e-12)
    assert math.fsum(t.probs.tolist()) + t.tail_mass == pytest.approx(1.0, abs=1e-12)
    assert t.tail_mass <= 1e-12
    e = t.to_explicit()
    for n in range(t.offset, t.n_max + 1):
        assert e.pmf(n) == d.pmf(n)


@pytest.mark.parametrize(
    "d", [Geometric(0.5), TwoPoint(0.5, 1, 6), Poisson(2.0), Zeta(3.0), NegativeBinomial(0.5, 0.5)], ids=repr
)
def test_sample_histogram(d):
    rng = np.random.default_rng(12345)
    draws = 1_000_000
    x = np.array([sample(d, rng) for _ in range(20_000)])  # scalar path
    big = np.searchsorted(
        -np.array([d.sf(k) for k in range(200)]), -rng.random(draws), side="left"
    )  # same inverse-CMF rule, vectorized over the first 200 cells
    for k in range(8):
        p = d.pmf(k)
        se = math.sqrt(p * (1 - p) / draws)
        assert abs(np.mean(big == k) - p) <= 5 * se + 1e-12
        se_small = math.sqrt(p * (1 - p) / len(x))
        assert abs(np.mean(x == k) - p) <= 5 * se_small + 1e-12


def test_sample_is_deterministic():
    d = Zeta(3.0)
    a = [sample(d, np.random.default_rng(9)) for _ in range(5)]
    b = [sample(d, np.random.default_rng(9)) for _ in range(5)]
    assert a == b


# --- construction and specs -----------------------------------------------


def test_explicit_trims_and_normalizes():
    e = Explicit(2, (0.0, 0.5, 0.5 + 5e-10, 0.0))
    assert e.offset == 3
    assert len(e.probs) == 2
    assert math.fsum(e.probs) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DistributionError):
        Explicit(0, (0.5, 0.4))
    with pytest.raises(DistributionError):
        Explicit(0, (1.5, -0.5))


@pytest.mark.parametrize(
    "bad",
    [
        lambda: Geometric(0.0),
        lambda: Geometric(1.5),
        lambda: TwoPoint(0.5, 3, 3),
        lambda: TwoPoint(1.0, 1, 2),
        lambda: Uniform(4, 2),
        lambda: Binomial(0, 0.5),
        lambda: Poisson(0.0),
        lambda: Zeta(1.0),
        lambda: NegativeBinomial(0.0, 0.5),
        lambda: NegativeBinomial(1.0, 1.0),
        lambda: Deterministic(-1),
    ],
)
def test_invalid_parameters(bad):
    with pytest.raises(DistributionError):
        bad()


@pytest.mark.parametrize("d", ALL + [Gapped(Geometric(0.5), 1, 2)], ids=repr)
def test_spec_round_trip(d):
    assert from_spec(d.to_spec()) == d


def test_from_spec_errors():
    with pytest.raises(DistributionError):
        from_spec({"family": "nope"})
    with pytest.raises(DistributionError):
        from_spec({"family": "geometric"})
    with pytest.raises(DistributionError):
        from_spec({"family": "geometric", "rho": 0.5, "extra": 1})
    with pytest.raises(DistributionError):
        from_spec({"rho": 0.5})
    assert from_spec({"family": "explicit", "probs": [0.5, 0.5]}) == Explicit(0, (0.5, 0.5))


def test_analytic_log_shapes():
    assert Binomial(10, 0.3).log_shape() is LogShape.LOG_CONCAVE
    assert Zeta(3).log_shape() is LogShape.LOG_CONVEX
    assert NegativeBinomial(0.5, 0.5).log_shape() is LogShape.LOG_CONVEX
    assert NegativeBinomial(1.0, 0.5).log_shape() is LogShape.GEOMETRIC_EXACT
    assert Geometric(0.4).log_shape() is LogShape.GEOMETRIC_EXACT


def test_gapped_accessors_match_definition():
    base = Poisson(2.0)
    d = Gapped(base, 2, 3)
    for n in range(30):
        expected = base.pmf(n) if n < 2 else (0.0 if n < 5 else base.pmf(n - 3))
        assert d.pmf(n) == pytest.approx(expected, abs=1e-300)
    assert d.mean() == pytest.approx(base.mean() + 3 * base.sf(1), rel=1e-14)


# --- properties -----------------------------------------------------------

prob_lists = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=30).filter(
    lambda xs: sum(xs) > 1e-3
)


@settings(max_examples=80, deadline=None)
@given(prob_lists, st.integers(0, 20))
def test_explicit_accessors_consistent(raw, offset):
    total = math.fsum(raw)
    d = Explicit(offset, tuple(x / total for x in raw))
    a, b = d.support()
    assert d.pmf(a) > 0 and d.pmf(b) > 0
    for n in range(offset - 1, offset + len(raw) + 1):
        assert d.cmf(n) + d.sf(n) == pytest.approx(1.0, abs=1e-15)
        assert d.cmf(n) == pytest.approx(math.fsum(d.pmf(k) for k in range(0, n + 1)), abs=1e-14)
    assert d.mean() == pytest.approx(math.fsum(d.sf(k) for k in range(0, int(b) + 1)), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 0.999999))
def test_inverse_cmf_is_first_covering_index(rho, x):
    d = Geometric(rho)
    n = inverse_cmf(d, x)
    assert d.sf(n) <= 1 - x
    assert n == 0 or d.sf(n - 1) > 1 - x
