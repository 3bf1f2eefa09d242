import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diagop.genexpr import (
    BinOp,
    Cond,
    Even,
    Exp2,
    GeneratorEvalError,
    GeneratorSemanticError,
    GeneratorSyntaxError,
    InSet,
    Index,
    Num,
    Odd,
    AtMost,
    PairK,
    PairM,
    depends_on_index,
    evaluate,
    evaluate_many,
    pair_components,
    parse_generator,
    tail_constants,
    to_text,
)


def test_power_generator_value():
    expr = parse_generator("2^(n^0.5)")
    assert evaluate(expr, 4) == 4.0
    assert evaluate(expr, 9) == 8.0


def test_constant_zero():
    expr = parse_generator("0")
    assert expr == Num(0.0)
    assert np.array_equal(evaluate_many(expr, [1, 2, 3]), np.zeros(3))


def test_pair_generator_first_index():
    expr = parse_generator("k(n) + 1/(m(n)+2)")
    assert evaluate(expr, 1) == pytest.approx(4.0 / 3.0, abs=1e-15)
    # 6 = 2^1 * 3 decodes to k=2, m=2
    assert evaluate(expr, 6) == pytest.approx(2.25, abs=1e-15)


def test_precedence_and_associativity():
    assert evaluate(parse_generator("2^3^2"), 1) == 512.0
    assert evaluate(parse_generator("8 - 3 - 2"), 1) == 3.0
    assert evaluate(parse_generator("8 / 4 / 2"), 1) == 1.0
    assert evaluate(parse_generator("1 + 2 * 3"), 1) == 7.0


def test_conditionals():
    expr = parse_generator("if n<=2 then 5 else if even(n) then 1 else 0")
    assert list(evaluate_many(expr, range(1, 7))) == [5, 5, 0, 1, 0, 1]
    expr = parse_generator("if n in {3, 1, 3} then 1 else 0")
    assert expr.pred == InSet((1, 3))
    assert list(evaluate_many(expr, [1, 2, 3, 4])) == [1, 0, 1, 0]


def test_unary_minus():
    assert parse_generator("-2.5") == Num(-2.5)
    assert list(evaluate_many(parse_generator("if odd(n) then -n else n"), [1, 2])) == [-1.0, 2.0]


def test_exp2():
    assert evaluate(parse_generator("exp2(n)"), 10) == 1024.0


def test_syntax_error_has_position():
    with pytest.raises(GeneratorSyntaxError) as info:
        parse_generator("1 + * 2")
    assert info.value.position == 4
    assert "position 4" in str(info.value)


def test_unknown_symbol():
    with pytest.raises(GeneratorSemanticError):
        parse_generator("x + 1")


@pytest.mark.parametrize("text", ["", "(1 + 2", "1 2", "if n<=2 then 1", "k(m)", "n in {1}"])
def test_malformed(text):
    with pytest.raises((GeneratorSyntaxError, GeneratorSemanticError)):
        parse_generator(text)


def test_division_by_zero_raises():
    with pytest.raises(GeneratorEvalError):
        evaluate(parse_generator("1/(n - 3)"), 3)


def test_overflow_raises():
    with pytest.raises(GeneratorEvalError):
        evaluate(parse_generator("2^n"), 2000)


def test_index_must_be_positive():
    with pytest.raises(GeneratorEvalError):
        evaluate_many(parse_generator("n"), [0])


def test_pair_components_match_definition():
    ns = np.arange(1, 5000)
    k, m = pair_components(ns)
    for n, kk, mm in zip(ns[:300], k[:300], m[:300]):
        assert n == 2 ** (kk - 1) * (2 * mm - 1)


def test_tail_constants():
    assert tail_constants(parse_generator("k(n)")) == [1.0]
    assert tail_constants(parse_generator("if odd(n) then n else 0")) == [0.0]
    assert tail_constants(parse_generator("if n in {1,2} then 1 else 0")) == [0.0]
    assert tail_constants(parse_generator("if even(n) then 1 else 0")) == [0.0, 1.0]
    assert tail_constants(parse_generator("2^n")) == []


def test_depends_on_index():
    assert depends_on_index(parse_generator("m(n) + 1"))
    assert not depends_on_index(parse_generator("3 * 2"))


# random ASTs for round-trip checks
_numbers = st.one_of(
    st.integers(0, 1000).map(float),
    st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False),
).map(Num)
_leaves = st.one_of(_numbers, st.just(Index()), st.just(PairK()), st.just(PairM()))
_preds = st.one_of(
    st.integers(0, 50).map(AtMost),
    st.just(Even()),
    st.just(Odd()),
    st.lists(st.integers(0, 99), min_size=1, max_size=5).map(lambda xs: InSet(tuple(sorted(set(xs))))),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
        children.map(Exp2),
        st.tuples(_preds, children, children).map(lambda t: Cond(*t)),
    )


_exprs = st.recursive(_leaves, _extend, max_leaves=12)


@given(_exprs)
def test_print_parse_round_trip(expr):
    text = to_text(expr)
    again = parse_generator(text)
    assert again == expr
    assert to_text(again) == text


@given(st.integers(1, 10**6))
def test_evaluation_is_pure(n):
    expr = parse_generator("k(n) + 0.5/(m(n) + 2)")
    first = evaluate(expr, n)
    assert evaluate(expr, n) == first
    assert evaluate_many(expr, [n])[0] == first
    assert math.isfinite(first)
