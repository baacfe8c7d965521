import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gallery import HEAVY, LIGHT
from restartseq import (
    Deterministic,
    Explicit,
    Geometric,
    NotApplicableError,
    Poisson,
    ShiftedGeometric,
    TwoPoint,
    Uniform,
    Zeta,
)
from restartseq.perturb import (
    ALWAYS_BENEFICIAL,
    GapSpec,
    delay_benefit_preserved,
    insert_gap,
    post_gap_benefit_preserved,
    post_gap_threshold,
    pre_gap_benefit_threshold,
    predicted_gap_sequence,
    within_gap_bounds,
)
from restartseq.restart_seq import restart_sequence

TP = TwoPoint(0.5, 1, 6)
GRID_FAMILIES = [Geometric(0.5), TP, Uniform(0, 4), Zeta(3.0)]
GRID = [(d, m, g) for d in GRID_FAMILIES for m in (0, 1, 3) for g in (1, 2, 5)]


def _direct(d, spec, n_max):
    return restart_sequence(insert_gap(d, spec), horizon=n_max).values


# --- documented examples --------------------------------------------------


def test_insert_gap_examples():
    t = insert_gap(Geometric(0.5), GapSpec(1, 2))
    assert [t.pmf(n) for n in range(5)] == [0.5, 0.0, 0.0, 0.25, 0.125]
    assert t.mean() == 2.0
    t = insert_gap(Deterministic(3), GapSpec(0, 2))
    assert t.support() == (5, 5) and t.mean() == 5.0
    assert insert_gap(Deterministic(3), GapSpec(4, 7)) == Deterministic(3)


def test_predicted_examples():
    p = predicted_gap_sequence(Geometric(0.5), GapSpec(1, 2), 6)
    assert np.allclose(p, [-0.5, 0, 0.5, 0.25, 0.125, 0.0625, 0.03125], atol=1e-15)
    p = predicted_gap_sequence(Geometric(0.5), GapSpec(0, 1), 6)
    assert np.allclose(p, 0.5 ** np.arange(7), atol=1e-15)
    p = predicted_gap_sequence(Deterministic(3), GapSpec(5, 3), 8)
    assert p.tolist() == restart_sequence(Deterministic(3), horizon=8).values.tolist()


def test_pre_gap_threshold_examples():
    assert pre_gap_benefit_threshold(Geometric(0.5), 0, 1) is ALWAYS_BENEFICIAL
    assert _direct(Geometric(0.5), GapSpec(1, 1), 0)[0] == pytest.approx(-0.25)
    assert pre_gap_benefit_threshold(Uniform(0, 4), 0, 1) == pytest.approx(2.5, rel=1e-14)
    assert _direct(Uniform(0, 4), GapSpec(1, 2), 0)[0] > 0
    assert _direct(Uniform(0, 4), GapSpec(1, 3), 0)[0] < 0
    with pytest.raises(NotApplicableError):
        pre_gap_benefit_threshold(Deterministic(3), 2, 3)


def test_post_gap_examples():
    assert post_gap_threshold(TP, 1, 1) == pytest.approx(0.5)
    assert post_gap_benefit_preserved(TP, 1, 1, 1) is False
    thr = post_gap_threshold(Zeta(3.0), 0, 0)
    assert thr == pytest.approx(0.823410988979, rel=1e-10)
    assert delay_benefit_preserved(Zeta(3.0), 0, 1) is False
    assert delay_benefit_preserved(TP, 1, 1) is False
    # below the threshold the benefit survives
    assert post_gap_benefit_preserved(Zeta(3.0), 1, 1, 1) is (1 < post_gap_threshold(Zeta(3.0), 1, 1))


def test_post_gap_preconditions():
    with pytest.raises(NotApplicableError):
        post_gap_threshold(TP, 0, 1)  # n < m
    with pytest.raises(NotApplicableError):
        post_gap_threshold(TP, 2, 1)  # S_2 > 0
    with pytest.raises(NotApplicableError):
        post_gap_threshold(TP, 6, 1)  # U(6) = 1
    with pytest.raises(ValueError):
        GapSpec(1, 0)


def test_delay_of_non_beneficial_stays_non_beneficial():
    for d in [Geometric(0.5), Poisson(2.0), Deterministic(3)]:
        for g in (1, 3):
            s = _direct(d, GapSpec(0, g), 60)
            assert s.min() >= -1e-10


# --- invariants -----------------------------------------------------------


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
@pytest.mark.parametrize("m,g", [(0, 1), (0, 3), (1, 2), (3, 5), (7, 1)])
def test_transform_validity(d, m, g):
    t = insert_gap(d, GapSpec(m, g))
    expected = d.mean() + g * (1 - d.cmf(m - 1))
    assert t.mean() == pytest.approx(expected, abs=1e-10)
    n_max = 400
    total = math.fsum(t.pmf_array(0, n_max).tolist()) + t.sf(n_max)
    assert total == pytest.approx(1.0, abs=1e-12)
    for n in range(0, 30):
        want = d.pmf(n) if n < m else 0.0 if n < m + g else d.pmf(n - g)
        assert t.pmf(n) == want


@pytest.mark.parametrize("d,m,g", GRID, ids=repr)
def test_region_formulas_match_direct(d, m, g):
    n_max = 300
    spec = GapSpec(m, g)
    assert np.max(np.abs(predicted_gap_sequence(d, spec, n_max) - _direct(d, spec, n_max))) <= 1e-9


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
@pytest.mark.parametrize("g", [1, 2, 5])
def test_delay_monotone(d, g):
    n_max = 120
    s = restart_sequence(d, horizon=n_max).values
    st_ = _direct(d, GapSpec(0, g), n_max)
    tol = 1e-10 * max(1.0, d.mean() + g)
    assert np.all(st_[:g] >= -tol)
    assert np.all(st_[g:] >= s[: n_max + 1 - g] - tol)


@pytest.mark.parametrize("d", LIGHT + HEAVY, ids=repr)
@pytest.mark.parametrize("m,g", [(1, 1), (3, 2), (5, 5)])
def test_pre_gap_domination(d, m, g):
    s = restart_sequence(d, horizon=m).values
    st_ = _direct(d, GapSpec(m, g), m)
    for n in range(m):
        drop = d.cmf(n) * (1 - d.cmf(m - 1))
        if drop == 0:
            assert st_[n] == pytest.approx(s[n], abs=1e-12)
        else:
            assert st_[n] < s[n]


@pytest.mark.parametrize("d,m,g", GRID, ids=repr)
def test_within_gap_bounds_hold(d, m, g):
    assert within_gap_bounds(d, GapSpec(m, g))


@pytest.mark.parametrize("d", GRID_FAMILIES + [Poisson(2.0), ShiftedGeometric(0.4)], ids=repr)
@pytest.mark.parametrize("m", [1, 3])
@pytest.mark.parametrize("g", [1, 2, 5])
def test_pre_gap_threshold_soundness(d, m, g):
    for n in range(m):
        try:
            thr = pre_gap_benefit_threshold(d, n, m)
        except NotApplicableError:
            continue
        s_new = _direct(d, GapSpec(m, g), n)[n]
        eps = 1e-10 * max(1.0, d.mean())
        if thr is ALWAYS_BENEFICIAL:
            assert s_new <= eps
        elif abs(g - thr) > 1e-9:
            assert (g > thr) == (s_new < 0)


@pytest.mark.parametrize("d", [TP, Zeta(3.0), Zeta(4.0), TwoPoint(0.3, 2, 9), Explicit(0, (0.6, 0.0, 0.0, 0.0, 0.4))], ids=repr)
@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("g", [1, 2, 5])
def test_post_gap_threshold_soundness(d, m, g):
    s = restart_sequence(d, horizon=40).values
    for n in range(m, 20):
        try:
            preserved = post_gap_benefit_preserved(d, n, m, g)
        except NotApplicableError:
            continue
        s_new = _direct(d, GapSpec(m, g), n + g)[n + g]
        assert preserved == (s_new < 0), (n, s[n], s_new)


# --- properties -----------------------------------------------------------

tables = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=15).filter(
    lambda xs: sum(xs) > 1e-2
)


@settings(max_examples=100, deadline=None)
@given(tables, st.integers(0, 4), st.integers(0, 20), st.integers(1, 8))
def test_random_tables_region_formulas(raw, offset, m, g):
    total = math.fsum(raw)
    d = Explicit(offset, tuple(x / total for x in raw))
    spec = GapSpec(m, g)
    n_max = offset + len(raw) + g + 5
    scale = max(1.0, d.mean() + g)
    assert np.max(np.abs(predicted_gap_sequence(d, spec, n_max) - _direct(d, spec, n_max))) <= 1e-9 * scale
    assert within_gap_bounds(d, spec)
