import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from codazzi.expr import (
    Call,
    Const,
    DomainError,
    Mul,
    ParseError,
    Pow,
    UnknownIdentifierError,
    Var,
    differentiate,
    evaluate,
    parse_expression,
    to_text,
    variables,
)

COORDS = ["x", "y"]


def P(text, coords=COORDS):
    return parse_expression(text, coords)


def central(e, i, p, h=1e-6):
    up, dn = list(p), list(p)
    up[i] += h
    dn[i] -= h
    return (evaluate(e, up) - evaluate(e, dn)) / (2 * h)


class TestParse:
    def test_product_of_powers(self):
        e = P("r^2 * sin(th)^2", ["r", "th"])
        assert e == Mul(Pow(Var("r", 0), 2), Pow(Call("sin", Var("th", 1)), 2))

    def test_constant(self):
        assert P("1") == Const(1.0)

    def test_syntax_error_points_at_star(self):
        with pytest.raises(ParseError) as info:
            P("x + * y")
        assert info.value.offset == 4

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            P("x + zeta")
        assert info.value.name == "zeta"
        assert "zeta" in str(info.value)

    @pytest.mark.parametrize(
        "text, value",
        [
            ("-x^2", -9.0),
            ("2^3^2", 512.0),
            ("2^-1", 0.5),
            ("x - y - 1", 0.0),
            ("x / y / 2", 0.75),
            ("(x+y)*2", 10.0),
            ("1.5e1 + 2E-1", 15.2),
            ("-(-x)", 3.0),
            ("pi", math.pi),
            ("x^0.5", math.sqrt(3.0)),
        ],
    )
    def test_precedence(self, text, value):
        assert evaluate(P(text), [3.0, 2.0]) == pytest.approx(value, rel=1e-15)

    def test_offsets_are_bytes(self):
        # the Greek letter takes two bytes in UTF-8
        with pytest.raises(ParseError) as info:
            parse_expression("θ + )", ["θ"])
        assert info.value.offset == 5

    @pytest.mark.parametrize("text", ["", "(", "x)", "sin x", "2 3", "x^", "x^y^"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            P(text)


class TestDifferentiate:
    def test_power_rule(self):
        assert to_text(differentiate(P("r^2", ["r"]), "r")) == "2*r"

    def test_chain_rule(self):
        d = differentiate(P("sin(th)^2", ["th"]), "th")
        assert to_text(d) == "2*sin(th)*cos(th)"

    def test_independent_variable(self):
        assert differentiate(P("sin(th)", ["r", "th"]), "r") == Const(0.0)

    def test_against_central_difference(self):
        e = P("sin(th)^2", ["th"])
        d = differentiate(e, "th")
        p = [math.pi / 4]
        assert evaluate(d, p) == pytest.approx(1.0, abs=1e-15)
        assert abs(evaluate(d, p) - central(e, 0, p)) <= 1e-8

    def test_integer_power_of_negative_base(self):
        d = differentiate(P("x^3"), "x")
        assert evaluate(d, [-2.0, 0.0]) == 12.0

    @pytest.mark.parametrize(
        "text, i, p",
        [
            ("tan(x)*cosh(y)", 0, [0.3, 0.4]),
            ("sqrt(1 + x^2)/y", 1, [1.2, 0.7]),
            ("exp(-x*y)*log(y)", 1, [0.5, 2.0]),
            ("sinh(x)^3 - y^-2", 0, [0.8, 1.5]),
        ],
    )
    def test_function_table(self, text, i, p):
        e = P(text)
        d = differentiate(e, COORDS[i])
        assert evaluate(d, p) == pytest.approx(central(e, i, p), rel=1e-7)


class TestEvaluate:
    def test_square(self):
        assert evaluate(P("r^2", ["r"]), [3.0]) == 9.0

    def test_log_domain_error(self):
        with pytest.raises(DomainError) as info:
            evaluate(P("1 + log(x)", ["x"]), [0.0])
        assert "log(x)" in str(info.value)
        assert info.value.point == (0.0,)

    @pytest.mark.parametrize("text", ["1/(x - 1)", "sqrt(x - 2)", "(x - 1)^-2"])
    def test_other_domain_errors(self, text):
        with pytest.raises(DomainError):
            evaluate(P(text, ["x"]), [1.0])

    def test_variables(self):
        assert variables(P("x*sin(y) + 2")) == {"x", "y"}


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

SAFE_POINTS = st.tuples(st.floats(0.2, 1.5), st.floats(0.2, 1.5))


def _leaves():
    return st.one_of(
        st.sampled_from(["x", "y"]),
        st.integers(-3, 3).map(str),
        st.floats(0.1, 3.0).map(lambda v: f"{v:.3f}"),
    )


def _extend(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})")
    quotient = children.map(lambda c: f"({c})/(2 + x^2)")
    power = st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    call = st.tuples(st.sampled_from(["sin", "cos", "exp", "sinh", "cosh"]), children).map(
        lambda t: f"{t[0]}(({t[1]})/4)"
    )
    safe = children.map(lambda c: f"log(2 + ({c})^2)")
    return st.one_of(binary, quotient, power, call, safe, children.map(lambda c: f"-{c}"))


EXPRS = st.recursive(_leaves(), _extend, max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(EXPRS, SAFE_POINTS, st.sampled_from([0, 1]))
def test_derivative_matches_finite_difference(text, p, i):
    e = P(text)
    try:
        value = evaluate(e, p)
        fd = central(e, i, p)
    except (DomainError, OverflowError):
        assume(False)
    assume(abs(value) < 1e6)
    exact = evaluate(differentiate(e, COORDS[i]), p)
    assert abs(exact - fd) <= 1e-6 * (1 + abs(value))


@settings(max_examples=150, deadline=None)
@given(EXPRS, st.lists(SAFE_POINTS, min_size=5, max_size=5))
def test_print_parse_round_trip(text, points):
    e = P(text)
    again = P(to_text(e))
    for p in points:
        try:
            a = evaluate(e, p)
        except (DomainError, OverflowError):
            continue
        assert evaluate(again, p) == pytest.approx(a, rel=1e-14, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(EXPRS, EXPRS, st.floats(-5, 5), SAFE_POINTS)
def test_derivative_is_linear(t1, t2, a, p):
    e1, e2 = P(t1), P(t2)
    combo = P(f"({a!r})*({t1}) + ({t2})")
    try:
        lhs = evaluate(differentiate(combo, "x"), p)
        rhs = a * evaluate(differentiate(e1, "x"), p) + evaluate(differentiate(e2, "x"), p)
    except (DomainError, OverflowError):
        assume(False)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
