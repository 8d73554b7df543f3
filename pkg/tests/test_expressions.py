"""Expression language: parsing, evaluation, printing round trips, errors."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from septrack.expressions import (
    ExpressionError,
    compile_fn,
    evaluate,
    parse_expression,
    pretty,
    variables,
)

# every drift and gain expression of the built-in benchmark
BENCHMARK_CORPUS = [
    "1 - cos(x1)", "x1*x2 + 0.5", "0.5 + exp(-x1^2)", "0.2*x1^2 + x2",
    "0.2*cos(x1) + 0.5", "cos(x1^2*x2) + 0.2",
    "abs(tanh(x1^2)) + 4", "2*(abs(cos(x1^3*x2)) + 1)", "cos(x1^3) + 3",
    "3*sin(x2)^3 + 5", "2*cos(x1)^2", "5*abs(sin(0.1*x1*x2)) + 2",
    "1.5*x1 + x1^2", "0.25*x2 + 0.5", "x1^3 + 0.25", "0.3 + 0.5*x1*x2^2",
    "x1^2 + 0.2", "cos(x1*x2) + 0.2", "2*sin(x1^2) + 6", "3*cos(x2^2) + 5",
    "sin(x1^3) + 3", "3*cos(x1 + x2^2) + 5", "cos(x1) + 3",
    "5 + 3*sin(x1^2 + x2*x1^2)",
    "x1 + 0.5*sin(x1)", "0.3*x1^2 + x2", "0.3*x1^2 + cos(x1)",
    "x2 + 0.5*sin(x1)", "x1 + 0.5*x1^2", "cos(x1*x2)^2 + 0.5",
    "abs(cos(x1)) + 4", "cos(x2^2) + 3", "abs(sin(x2^3)) + 2", "4*cos(x1) + 6",
    "cos(x2^2*x1^3) + 3", "cos(x2)^3 + 3",
    "2*sin(t) + 2*sin(0.5*t)",
]


class TestParsing:
    def test_simple(self):
        e = parse_expression("1 - cos(x1)")
        assert evaluate(e, {"x1": 0.0}) == 0.0

    def test_benchmark_gain_at_origin(self):
        e = parse_expression("2*(abs(cos(x1^3*x2)) + 1)")
        assert evaluate(e, {"x1": 0.0, "x2": 0.0}) == 4.0

    def test_subtraction_left_associative(self):
        e = parse_expression("x1 - x2 - 1")
        assert evaluate(e, {"x1": 5.0, "x2": 1.0}) == 3.0

    def test_unary_minus_binds_below_power(self):
        e = parse_expression("-x1^2")
        assert evaluate(e, {"x1": 3.0}) == -9.0

    def test_negative_exponent(self):
        e = parse_expression("x1^-2")
        assert evaluate(e, {"x1": 2.0}) == 0.25

    def test_scientific_literals(self):
        assert evaluate(parse_expression("1e-4 + 2.5E2"), {}) == 250.0001

    def test_syntax_error_offset(self):
        with pytest.raises(ExpressionError) as exc:
            parse_expression("sin(")
        assert exc.value.offset == 4

    def test_unknown_identifier(self):
        with pytest.raises(ExpressionError, match="unknown identifier"):
            parse_expression("sin(q)")

    def test_arity_mismatch(self):
        with pytest.raises(ExpressionError, match="expects 1 argument"):
            parse_expression("sin(x1, x2)")

    def test_non_integer_exponent_rejected(self):
        with pytest.raises(ExpressionError, match="integer"):
            parse_expression("x1^1.5")

    def test_variable_exponent_rejected(self):
        with pytest.raises(ExpressionError):
            parse_expression("x1^x2")

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ExpressionError, match="trailing"):
            parse_expression("x1 + 1 )")

    def test_variables_collected(self):
        e = parse_expression("x1*x3 + sin(t)")
        assert variables(e) == frozenset({"x1", "x3", "t"})


class TestRoundTrip:
    @pytest.mark.parametrize("text", BENCHMARK_CORPUS)
    def test_benchmark_corpus(self, text):
        tree = parse_expression(text)
        assert parse_expression(pretty(tree)) == tree

    def test_nested_parens_preserved_structurally(self):
        tree = parse_expression("(x1 + x2)*(x1 - (x2 - 1))")
        assert parse_expression(pretty(tree)) == tree

    def test_power_of_negation(self):
        tree = parse_expression("(-x1)^2")
        assert parse_expression(pretty(tree)) == tree


# recursive strategy producing well-formed trees as text
_atoms = st.one_of(
    st.floats(0.0, 100.0, allow_nan=False).map(lambda v: repr(round(v, 3))),
    st.sampled_from(["x1", "x2", "x3", "t"]),
)


def _expr_strategy():
    return st.recursive(
        _atoms,
        lambda children: st.one_of(
            st.tuples(children, st.sampled_from(list("+-*/")), children).map(
                lambda triple: f"({triple[0]} {triple[1]} {triple[2]})"
            ),
            st.tuples(st.sampled_from(["sin", "cos", "tanh", "abs"]), children).map(
                lambda pair: f"{pair[0]}({pair[1]})"
            ),
            st.tuples(children, st.integers(0, 4)).map(
                lambda pair: f"({pair[0]})^{pair[1]}"
            ),
            children.map(lambda c: f"-{c}"),
        ),
        max_leaves=20,
    )


class TestGeneratedRoundTrip:
    @given(_expr_strategy())
    @settings(max_examples=300, deadline=None)
    def test_pretty_reparse_identity(self, text):
        tree = parse_expression(text)
        assert parse_expression(pretty(tree)) == tree


class TestCompilation:
    @pytest.mark.parametrize("text", BENCHMARK_CORPUS)
    def test_matches_tree_evaluation(self, text):
        tree = parse_expression(text)
        fn = compile_fn(tree)
        env = {"x1": 0.7, "x2": -1.3, "t": 2.1}
        expected = evaluate(tree, env)
        got = fn([env["x1"], env["x2"]], env["t"])
        assert got == pytest.approx(expected, rel=1e-15) or (
            math.isnan(expected) and math.isnan(got)
        )

    def test_missing_variable_reported(self):
        tree = parse_expression("x3 + 1")
        with pytest.raises(ExpressionError, match="x3"):
            evaluate(tree, {"x1": 0.0})
