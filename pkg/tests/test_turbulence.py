import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diagop.metrics import resolvent_gap
from diagop.operator_model import TailMeta, from_values, make_family, make_spec
from diagop.reproduce import alternating_fixture
from diagop.turbulence import (
    WalkError,
    align_target,
    least_steps,
    orbit_walk_compact_at_zero,
    orbit_walk_unbounded,
    sign_matched_permutation,
    sign_partition,
    verify_walk,
)


def test_sign_partition():
    a, _ = alternating_fixture()
    part = sign_partition(a, 6)
    assert part.nonnegative == (2, 4, 6)
    assert part.negative == (1, 3, 5)
    assert part.both_infinite
    assert not sign_partition(make_family("A_t", t=0.5), 4).both_infinite


def test_sign_plan_pairs_matching_signs():
    a = from_values([1.0, -1.0, 2.0, -2.0])
    b = from_values([-5.0, -6.0, 7.0, 8.0])
    plan = sign_matched_permutation(a, b, 4)
    assert plan.mapping == (2, 4, 1, 3)
    target = align_target(plan, b.values(4))
    assert list(target) == [7.0, -5.0, 8.0, -6.0]


@settings(max_examples=80)
@given(st.lists(st.booleans(), min_size=1, max_size=40), st.integers(0, 2**32 - 1))
def test_sign_plan_products_nonnegative(signs, seed):
    rng = np.random.default_rng(seed)
    a_vals = rng.uniform(0.1, 5, len(signs)) * np.where(signs, 1, -1)
    b_vals = rng.permutation(a_vals) * rng.uniform(0.5, 2.0, len(signs))
    a, b = from_values(a_vals.tolist()), from_values(b_vals.tolist())
    plan = sign_matched_permutation(a, b, len(signs))
    assert plan.size == len(signs)
    assert np.all(a_vals * align_target(plan, b_vals) >= 0)


def test_sign_plan_unbalanced():
    with pytest.raises(WalkError):
        sign_matched_permutation(from_values([1.0]), from_values([-1.0]), 1)


def test_least_steps():
    assert least_steps(1.0, 0.1) == 11
    assert least_steps(1.0, 10.0) == 1
    assert least_steps(0.95, 0.1) == 10
    assert least_steps(0.0, 1.0) == 1


@pytest.mark.parametrize("r,expected", [(0.1, 11), (10.0, 1)])
def test_walk_between_shifted_alternating(r, expected):
    a, b = alternating_fixture()
    walk = orbit_walk_unbounded(a, b, 0.5, r, 512)
    assert walk.length == expected
    assert walk.details["m_p"] == 1.0
    check = verify_walk(walk)
    assert check.ok
    assert check.max_step_norm < r
    assert check.max_distance < 0.5


def test_walk_stays_under_interpolation_bound():
    a, b = alternating_fixture()
    walk = orbit_walk_unbounded(a, b, 0.5, 0.1, 512)
    n0, p = walk.details["N"], walk.details["p"]
    plan = sign_matched_permutation(a, b, 512)
    target = align_target(plan, b.values(p))
    full = float(np.max(resolvent_gap(target[n0:], a.values(p)[n0:])))
    assert max(walk.per_step_distance) <= full + 1e-15


def test_walk_identity_is_empty():
    a, _ = alternating_fixture()
    walk = orbit_walk_unbounded(a, a, 0.5, 0.1, 128)
    assert walk.length == 0 and verify_walk(walk).ok


def test_walk_rejects_bounded_and_far():
    with pytest.raises(WalkError):
        orbit_walk_unbounded(make_family("A_t", t=0.5), make_family("A_t", t=0.5), 0.5, 0.1)
    a, _ = alternating_fixture()
    meta = TailMeta(False, False, (), (), True, False)
    far = make_spec("far", "if even(n) then 0.5 * n else -0.5 * n", meta)
    with pytest.raises(WalkError, match="reachable"):
        orbit_walk_unbounded(a, far, 1e-6, 0.1, 64)


def test_verify_walk_catches_tampering():
    a, b = alternating_fixture()
    walk = orbit_walk_unbounded(a, b, 0.5, 0.1, 512)
    big = tuple((i, s * 40) for i, s in walk.steps[0])
    tampered = dataclasses.replace(walk, steps=(big,) + walk.steps[1:])
    check = verify_walk(tampered)
    assert not check.ok and check.problems
    lying = dataclasses.replace(walk, per_step_distance=tuple(d / 2 for d in walk.per_step_distance))
    assert not verify_walk(lying).ok


def test_walk_json():
    a, b = alternating_fixture()
    data = orbit_walk_unbounded(a, b, 0.5, 10.0, 64).to_json()
    assert data["base"] == "alternating" and len(data["steps"]) == 1
    assert set(data["steps"][0][0]) == {"idx", "shift"}


def test_walk_from_zero_examples():
    walk = orbit_walk_compact_at_zero([(1, 2.0), (3, -0.5)], 8, 1.0, 0.5)
    assert walk.details["N"] == 5
    assert walk.per_step_distance[-1] == pytest.approx(2 / math.sqrt(5))
    assert verify_walk(walk).ok
    walk = orbit_walk_compact_at_zero([(2, 1.0)], 4, 1.0, 0.2)
    assert walk.details["N"] == 6


def test_walk_from_zero_distances_increase():
    walk = orbit_walk_compact_at_zero([(1, 1.0), (2, -0.3), (5, 0.7)], 8, 1.0, 0.2)
    d = walk.per_step_distance
    assert all(x < y for x, y in zip(d, d[1:]))
    probes = np.array(walk.details["probe_distances"])
    assert np.all(np.diff(probes, axis=0) >= 0)
    assert verify_walk(walk).ok


@settings(max_examples=50)
@given(
    st.lists(st.tuples(st.integers(1, 8), st.floats(-3, 3)), min_size=1, max_size=6),
    st.floats(0.05, 2.0),
)
def test_walk_from_zero_properties(pairs, r):
    walk = orbit_walk_compact_at_zero(pairs, 8, 1.0, r)
    check = verify_walk(walk)
    assert check.ok
    assert check.max_step_norm < r


def test_walk_from_zero_degenerate_and_errors():
    assert orbit_walk_compact_at_zero([(1, 0.0)], 4, 1.0, 0.1).length == 0
    with pytest.raises(WalkError):
        orbit_walk_compact_at_zero([(9, 1.0)], 8, 1.0, 0.1)
    with pytest.raises(WalkError):
        orbit_walk_compact_at_zero([(1, 1.0)], 8, 0.5, 0.1)
    with pytest.raises(WalkError):
        orbit_walk_compact_at_zero([(0, 1.0)], 8, 1.0, 0.1)
