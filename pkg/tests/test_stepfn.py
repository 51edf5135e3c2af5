import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grenander_linf.errors import DomainError
from grenander_linf.stepfn import (
    CadlagStep,
    LeftContStep,
    step_from_dict,
    sup_abs_diff,
    upper_version,
)
from oracles import dense_sup


@pytest.fixture
def jump_half():
    return CadlagStep([0.0, 0.5], [0.0, 1.0])


def test_eval_right_continuous(jump_half):
    assert jump_half(0.5) == 1.0
    assert jump_half(0.49) == 0.0


def test_empirical_cdf_two_points():
    F = CadlagStep.empirical([0.2, 0.8])
    assert F(0.5) == 0.5
    assert F(1.0) == 1.0
    assert F(0.0) == 0.0


def test_empirical_merges_ties():
    F = CadlagStep.empirical([0.3, 0.3, 0.6])
    np.testing.assert_array_equal(F.t, [0.0, 0.3, 0.6])
    np.testing.assert_allclose(F.y, [0.0, 2 / 3, 1.0])


@pytest.mark.parametrize("t", [-0.1, 1.1, np.nan])
def test_eval_outside_domain(jump_half, t):
    with pytest.raises(DomainError):
        jump_half(t)


def test_left_limit(jump_half):
    assert jump_half.left_limit(0.5) == 0.0
    assert jump_half.left_limit(0.7) == jump_half(0.7)
    G = CadlagStep([0.0, 0.3, 0.5], [0.0, 0.4, 1.0])
    assert G.left_limit(0.5) == 0.4
    with pytest.raises(DomainError):
        G.left_limit(0.0)


def test_duplicate_knots_rejected():
    with pytest.raises(DomainError):
        CadlagStep([0.0, 0.5, 0.5], [0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        CadlagStep([0.1, 0.5], [0.0, 1.0])


def test_upper_version_only_upward_jumps_unchanged():
    F = CadlagStep([0.0, 0.2, 0.7], [0.0, 0.3, 1.0])
    G = upper_version(F)
    np.testing.assert_array_equal(G.atoms, F.atoms)
    assert not F.has_downward_jumps


def test_upper_version_downward_jump():
    F = CadlagStep([0.0, 0.3, 0.6], [0.0, 1.0, 0.4])
    G = upper_version(F)
    assert G(0.6) == 1.0
    for t in (0.0, 0.2, 0.3, 0.5, 0.61, 1.0):
        assert G(t) == F(t)


def test_upper_version_brunk_against_two_sided_eval():
    y = np.array([0.5, -0.3, 0.2, -1.0, 0.8, -0.1])
    F = CadlagStep.partial_sums(y)
    G = upper_version(F)
    for k, tk in enumerate(F.t):
        expect = F(tk) if k == 0 else max(F(tk), F.left_limit(tk))
        assert G(tk) == expect
    raised = np.nonzero(G.atoms != F.atoms)[0]
    np.testing.assert_array_equal(raised, np.nonzero(y < 0)[0] + 1)


knot_lists = st.lists(st.floats(0.001, 0.999, allow_nan=False), min_size=1, max_size=30, unique=True)
value_lists = st.lists(st.floats(-5, 5, allow_nan=False), min_size=31, max_size=31)


@settings(max_examples=200, deadline=None)
@given(knot_lists, value_lists)
def test_upper_version_properties(ts, ys):
    t = np.concatenate([[0.0], np.sort(ts)])
    F = CadlagStep(t, ys[: t.size])
    G = upper_version(F)
    assert np.all(G.atoms >= F.atoms)
    assert np.all(G.atoms[1:] >= F.y[:-1])
    # idempotent on its own output
    np.testing.assert_array_equal(upper_version(G).atoms, G.atoms)
    # point value and left limit agree away from knots
    mids = 0.5 * (t[1:] + t[:-1])
    mids = mids[(mids > t[:-1]) & (mids < t[1:])]
    np.testing.assert_array_equal(F(mids), F.left_limit(mids))


def test_left_cont_step_conventions():
    f = LeftContStep([0.5], [1.2, 0.8])
    assert f(0.0) == 1.2
    assert f(0.5) == 1.2
    assert f(0.5000001) == 0.8
    assert f.right_limit(0.5) == 0.8
    with pytest.raises(DomainError):
        LeftContStep([0.5], [0.8, 1.2], monotone=True)


@pytest.mark.parametrize("make", [
    lambda: CadlagStep([0.0, 0.3, 0.6], [0.0, 1.0, 0.4], [0.0, 1.0, 1.0]),
    lambda: LeftContStep([0.25, 0.5], [2.0, 1.0, 0.5], monotone=True),
    lambda: LeftContStep([0.5, 1.5], [1.0, 0.5, 0.0], domain=(-np.inf, np.inf)),
])
def test_json_round_trip(make):
    h = make()
    d = json.loads(json.dumps(h.to_dict()))
    h2 = step_from_dict(d)
    assert type(h2) is type(h)
    assert h2.to_dict() == h.to_dict()
    assert d["convention"] in ("cadlag", "left")


def test_sup_abs_diff_trivial():
    f = LeftContStep([], [0.7])
    assert sup_abs_diff(f, lambda t: np.full_like(np.asarray(t, float), 0.7), 0.0, 1.0) == 0.0
    one = LeftContStep([], [1.0])
    assert sup_abs_diff(one, lambda t: np.asarray(t, float), 0.0, 1.0) == 1.0
    assert sup_abs_diff(one, lambda t: np.asarray(t, float), 0.5, 0.5) == 0.0


def _random_step(rng, m):
    knots = np.sort(rng.uniform(0, 1, m))
    vals = np.sort(rng.uniform(0, 2, m + 1))[::-1]
    return LeftContStep(knots, vals, monotone=True)


@pytest.mark.parametrize("seed", range(5))
def test_sup_abs_diff_dense_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    h1 = _random_step(rng, 12)
    c0, c1 = 1.5, 1.0

    def truth(t):
        return c0 - c1 * np.asarray(t, float)

    a, b = 0.05, 0.95
    exact = sup_abs_diff(h1, truth, a, b)
    grid = dense_sup(h1, truth, a, b)
    spacing = (b - a) / 1_000_000
    assert grid <= exact + 1e-12
    assert exact - grid <= c1 * spacing + 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_sup_abs_diff_weighted_dense_grid(seed):
    rng = np.random.default_rng(100 + seed)
    h1 = _random_step(rng, 8)

    def truth(t):
        return 1.5 - np.asarray(t, float)

    def weight(t):
        return (1.5 - np.asarray(t, float)) ** (-1 / 3)

    exact = sup_abs_diff(h1, truth, 0.0, 1.0, weight=weight)
    grid = dense_sup(h1, truth, 0.0, 1.0, weight=weight)
    assert grid <= exact + 1e-12
    # derivative of (c - f) * w is bounded by 2 on this window
    assert exact - grid <= 2 * 1e-6


steps = st.lists(st.floats(0.01, 0.99), min_size=1, max_size=10, unique=True)


@settings(max_examples=200, deadline=None)
@given(steps, steps, st.data())
def test_monotone_pair_sup_bound(k1, k2, data):
    v1 = sorted(data.draw(st.lists(st.floats(-3, 3), min_size=len(k1) + 1, max_size=len(k1) + 1)),
                reverse=True)
    v2 = sorted(data.draw(st.lists(st.floats(-3, 3), min_size=len(k2) + 1, max_size=len(k2) + 1)),
                reverse=True)
    h1 = LeftContStep(sorted(k1), v1, monotone=True)
    h2 = LeftContStep(sorted(k2), v2, monotone=True)
    a, b = 0.0, 1.0
    # evaluated over [a, b] with h2 as a step function via its own knots
    grid = np.unique(np.concatenate([[a, b], h1.knots, h2.knots,
                                     np.nextafter(h1.knots, 2), np.nextafter(h2.knots, 2)]))
    sup = np.max(np.abs(h1(grid) - h2(grid)))
    bound = max(abs(h1(a) - h2(a)), abs(h1(b) - h2(b))) + abs(h2(a) - h2(b))
    assert sup <= bound + 1e-12
