import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diagop.operator_model import (
    FAMILIES,
    BasisMismatch,
    MetadataInconsistent,
    SpecError,
    TailMeta,
    check_metadata,
    constant,
    from_values,
    load_spec,
    make_family,
    make_spec,
    meta_report,
    pair_decode,
    pair_encode,
    perturb,
    rational_enumeration,
    require_same_basis,
    spec_from_json,
)


def builtin_specs():
    return [
        make_family("example41_A"),
        make_family("example41_B"),
        make_family("A_t", t=0.3),
        make_family("A_t", t=0.5),
        make_family("A_t", t=0.7),
        make_family("B_t", t=0.0),
        make_family("B_t", t=0.5),
        make_family("B_t", t=1.0),
        make_family("A_F", F="even(n)"),
        make_family("A_F", F="n in {1,5,9}"),
        make_family("rationals", M=1.0),
        make_family("rationals", M=1.0, negative_first=True),
        make_family("constant", c=7.0),
        make_family("K0", s=0.0, t=1.0),
    ]


@pytest.mark.parametrize("k,m,n", [(1, 1, 1), (2, 2, 6), (3, 1, 4), (3, 2, 12)])
def test_pair_examples(k, m, n):
    assert pair_encode(k, m) == n
    assert pair_decode(n) == (k, m)


def test_pair_bijection_exhaustive():
    seen = set()
    for n in range(1, 10**6 + 1):
        k, m = pair_decode(n)
        assert pair_encode(k, m) == n
        seen.add((k, m))
    assert len(seen) == 10**6


def test_pair_errors():
    with pytest.raises(ValueError):
        pair_encode(0, 1)
    with pytest.raises(ValueError):
        pair_decode(0)
    with pytest.raises(OverflowError):
        pair_encode(70, 1)


def test_family_values():
    assert make_family("B_t", t=1.0).value(1) == pytest.approx(4.0 / 3.0, abs=1e-15)
    assert make_family("A_F", F="even(n)").value(3) == 0.0
    assert make_family("A_t", t=0.5).value(4) == 4.0
    ex = make_family("example41_A")
    assert list(ex.values(6)) == [1.0, 0.0, 2.0, 0.0, 3.0, 0.0]


def test_family_metadata():
    a = make_family("A_t", t=0.5).meta
    assert a.abs_divergent and not a.bounded_above and a.bounded_below
    b = make_family("B_t", t=0.5).meta
    assert b.acc_points[:3] == (1.0, 2.0, 3.0) and not b.bounded_above
    f = make_family("A_F", F="even(n)").meta
    assert set(f.acc_points) <= {0.0, 1.0}
    ex = make_family("example41_A").meta
    assert ex.acc_points == (0.0,) and not ex.bounded_above


@pytest.mark.parametrize(
    "name,kwargs",
    [("A_t", {"t": 0.0}), ("A_t", {"t": 1.0}), ("B_t", {"t": 1.5}), ("K0", {"s": 0.5, "t": 0.5}),
     ("A_F", {}), ("rationals", {"M": -1}), ("nope", {})],
)
def test_family_parameter_errors(name, kwargs):
    with pytest.raises(SpecError):
        make_family(name, **kwargs)


def test_tail_meta_validation():
    with pytest.raises(SpecError):
        TailMeta(True, True, (), (), True)
    with pytest.raises(SpecError):
        TailMeta(False, True, (1.0,), (), True)


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label[:20])
def test_builtin_metadata_has_no_spurious_clusters(spec):
    report = check_metadata(spec)
    assert report.spurious == ()


def _unsupported_oracle(spec, window=(-64.0, 64.0), delta=1e-2, horizon=4096):
    vals = [float(v) for v in spec.values(horizon)]
    probes = [p for p in spec.meta.acc_points if window[0] <= p <= window[1]]
    for a, b in spec.meta.acc_intervals:
        a, b = max(a, window[0]), min(b, window[1])
        j = 0
        while a + j * delta <= b:
            probes.append(a + j * delta)
            j += 1
        probes.append(b)
    out = []
    for p in sorted(set(probes)):
        if sum(1 for v in vals if p - delta < v < p + delta) < 2:
            out.append(p)
    return out


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label[:20])
def test_unsupported_points_match_count_oracle(spec):
    assert list(meta_report(spec).unsupported) == pytest.approx(_unsupported_oracle(spec), abs=1e-12)


def test_spurious_cluster_detected():
    bad = make_spec("bad", "5", TailMeta(True, True, (0.0,), (), False, True))
    with pytest.raises(MetadataInconsistent):
        check_metadata(bad)


def test_values_are_read_only_and_deterministic():
    spec = make_family("B_t", t=0.5)
    first = spec.values(100)
    assert not first.flags.writeable
    assert np.array_equal(first, make_family("B_t", t=0.5).values(100))
    assert all(spec.value(n) == first[n - 1] for n in range(1, 101))


def test_prefix_then_generator():
    spec = make_spec("p", "n", TailMeta(False, True, (), (), True, False), prefix=[9, 8])
    assert list(spec.values(4)) == [9.0, 8.0, 3.0, 4.0]


def test_perturb():
    spec = make_family("B_t", t=0.0)
    moved = perturb(spec, [(3, 0.5), (3, 0.25), (10, -1.0)])
    vals = moved.values(12)
    base = spec.values(12)
    assert vals[2] == base[2] + 0.75 and vals[9] == base[9] - 1.0
    assert np.array_equal(np.delete(vals, [2, 9]), np.delete(base, [2, 9]))
    assert perturb(spec, []) is spec
    with pytest.raises(ValueError):
        perturb(spec, [(0, 1.0)])


def test_rational_enumeration():
    vals = rational_enumeration(1.0, 11)
    assert vals == [0.0, 1.0, -1.0, 0.5, -0.5, 1 / 3, -1 / 3, 2 / 3, -2 / 3, 0.25, -0.25]
    neg = rational_enumeration(1.0, 11, negative_first=True)
    assert neg[1:3] == [-1.0, 1.0]
    assert sorted(vals) == sorted(neg)


def test_basis_mismatch():
    with pytest.raises(BasisMismatch):
        require_same_basis(constant(0.0), constant(0.0, basis="other"))


def test_json_round_trip(tmp_path):
    spec = make_spec("demo", "k(n) + 0.5/(m(n) + 2)", TailMeta(False, True, (1.0, 2.0), (), False, False), prefix=[3.5])
    path = tmp_path / "demo.json"
    path.write_text(json.dumps(spec.to_json()))
    again = load_spec(str(path))
    assert again.to_json() == spec.to_json()
    assert np.array_equal(again.values(50), spec.values(50))


def test_json_rejects_unknown_keys():
    data = constant(1.0).to_json()
    data["extra"] = 1
    with pytest.raises(SpecError):
        spec_from_json(data)
    data = constant(1.0).to_json()
    data["meta"]["accumulation"]["bogus"] = 1
    with pytest.raises(SpecError):
        spec_from_json(data)


def test_from_values():
    spec = from_values([1.0, 2.0, 3.0])
    assert list(spec.values(5)) == [1.0, 2.0, 3.0, 3.0, 3.0]
    assert spec.meta.acc_points == (3.0,)


def test_families_listed():
    assert set(FAMILIES) >= {"example41_A", "example41_B", "A_t", "B_t", "A_F", "rationals"}


@given(st.floats(0.05, 0.95), st.integers(1, 2**20))
def test_power_family_finite_where_representable(t, n):
    # 2^(n^t) is a float64 only while n^t < 1024
    spec = make_family("A_t", t=t)
    if n**t < 1023:
        assert math.isfinite(spec.value(n))
