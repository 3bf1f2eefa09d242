import pytest
from hypothesis import given, strategies as st

from diagop.closedsets import ClosedSetApprox, WindowMismatch, intersect_closed

WINDOW = (-10.0, 10.0)


def test_interval_overlap():
    x = ClosedSetApprox.build(WINDOW, [], [(0, 2)])
    y = ClosedSetApprox.build(WINDOW, [], [(1, 3)])
    assert intersect_closed([x, y]).intervals == ((1.0, 2.0),)


def test_point_intersection():
    x = ClosedSetApprox.build(WINDOW, [0, 1])
    y = ClosedSetApprox.build(WINDOW, [1, 2])
    got = intersect_closed([x, y])
    assert got.points == (1.0,) and got.intervals == ()


def test_touching_intervals_meet_in_a_point():
    x = ClosedSetApprox.build(WINDOW, [], [(0, 1)])
    y = ClosedSetApprox.build(WINDOW, [], [(1, 2)])
    assert intersect_closed([x, y]).points == (1.0,)


def test_window_mismatch():
    with pytest.raises(WindowMismatch):
        intersect_closed([ClosedSetApprox.build((0, 1)), ClosedSetApprox.build((0, 2))])


def test_normalisation():
    s = ClosedSetApprox.build(WINDOW, [0.5, 5, 20], [(0, 1), (0.5, 2), (9, 30)])
    assert s.intervals == ((0.0, 2.0), (9.0, 10.0))
    assert s.points == (5.0,)


def test_constructor_validates():
    with pytest.raises(ValueError):
        ClosedSetApprox(WINDOW, (0.5,), ((0.0, 1.0),))
    with pytest.raises(ValueError):
        ClosedSetApprox(WINDOW, (), ((0.0, 2.0), (1.0, 3.0)))


def test_from_samples_merges_close_values():
    s = ClosedSetApprox.from_samples([0.0, 0.5e-6, 1.0e-6, 3.0], WINDOW, 1e-6)
    assert s.intervals == ((0.0, 1.0e-6),) and s.points == (3.0,)


def test_json_round_trip():
    s = ClosedSetApprox.build(WINDOW, [3], [(0, 1)], True, False)
    assert ClosedSetApprox.from_json(s.to_json()) == s


_values = st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 1))
_ivs = st.tuples(_values, _values).map(lambda p: (min(p), max(p) + 0.1))
_sets = st.builds(
    lambda pts, ivs, ua, ub: ClosedSetApprox.build(WINDOW, pts, ivs, ua, ub),
    st.lists(_values, max_size=6),
    st.lists(_ivs, max_size=4),
    st.booleans(),
    st.booleans(),
)


@given(_sets, _sets)
def test_intersection_commutes(x, y):
    assert intersect_closed([x, y]) == intersect_closed([y, x])


@given(_sets, _sets, _sets)
def test_intersection_associates(x, y, z):
    left = intersect_closed([intersect_closed([x, y]), z])
    right = intersect_closed([x, intersect_closed([y, z])])
    assert left == right == intersect_closed([x, y, z])


@given(_sets)
def test_intersection_idempotent_with_identity(x):
    assert intersect_closed([x, x]) == x
    assert intersect_closed([x, ClosedSetApprox.full(WINDOW)]) == x


@given(_sets, _sets, _values)
def test_intersection_membership(x, y, v):
    assert intersect_closed([x, y]).contains(v) == (x.contains(v) and y.contains(v))


@given(_sets, _sets)
def test_intersection_is_subset(x, y):
    both = intersect_closed([x, y])
    assert both.issubset(x) and both.issubset(y)
