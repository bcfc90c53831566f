"""expr-io: grammar, lowering, errors, round-trips."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mage.exprparse import (
    BinOp,
    Const,
    ParseError,
    Pow,
    Var,
    VariableKind,
    format_rf,
    lower,
    parse,
    parse_expression,
    point_from_string,
)
from mage.poly import MultiPoly, RationalFunction


class TestParse:
    def test_direct_tree(self):
        ast = parse("p22 - p11^2", 2)
        assert isinstance(ast, BinOp) and ast.op == "-"
        assert ast.left == Var("p22", VariableKind.SECOND_JET)
        assert ast.right == Pow(Var("p11", VariableKind.SECOND_JET), 2)

    def test_parameters(self):
        ast = parse("k0*(p11*p22 - p12^2) + k4", 2)
        f = lower(ast)
        names = f.variables_present()
        assert {"k0", "k4", "p11", "p12", "p22"} == names

    def test_syntax_error_offset(self):
        with pytest.raises(ParseError) as ei:
            parse("p11 +", 2)
        assert ei.value.pos == 5

    def test_index_out_of_range(self):
        with pytest.raises(ParseError):
            parse("p13", 2)
        with pytest.raises(ParseError):
            parse("xi3", 2)
        with pytest.raises(ParseError):
            parse("x5", 3)

    def test_misordered_jet_index(self):
        with pytest.raises(ParseError, match="p12"):
            parse("p21", 2)

    def test_variable_kinds(self):
        ast = parse("x1 + u + p1 + p11 + xi2 + alpha", 2)
        f = lower(ast)
        assert f.variables_present() == {"x1", "u", "p1", "p11", "xi2", "alpha"}

    def test_precedence(self):
        # ^ binds tighter than unary minus: -p11^2 = -(p11^2)
        f = parse_expression("-p11^2", 2)
        p11 = MultiPoly.var("p11")
        assert f == RationalFunction.from_poly(-(p11 * p11))
        # left-associative products and quotients
        g = parse_expression("2*p11/p12*p12", 2)
        assert g == RationalFunction.from_poly(2 * p11)

    def test_nonnegative_integer_exponent_only(self):
        with pytest.raises(ParseError):
            parse("p11^p12", 2)
        with pytest.raises(ParseError):
            parse("p11^(2)", 2)


class TestLower:
    def test_polynomial(self):
        f = parse_expression("p22 - p11^2", 2)
        p11, p22 = MultiPoly.var("p11"), MultiPoly.var("p22")
        assert f == RationalFunction.from_poly(p22 - p11 * p11)

    def test_quotient(self):
        f = parse_expression("(p12^2-1)/p11", 2)
        assert f.den == MultiPoly.var("p11")

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            parse_expression("1/0", 2)
        with pytest.raises(ZeroDivisionError):
            parse_expression("p11/(p12 - p12)", 2)

    def test_rational_literals(self):
        assert parse_expression("3/4", 2) == RationalFunction.const(Fraction(3, 4))


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def poly_strategy(names=("p11", "p12", "k0")):
    k = len(names)
    exps = st.tuples(*[st.integers(0, 3)] * k)
    return st.dictionaries(exps, coeffs, max_size=5).map(lambda d: MultiPoly.make(names, d))


class TestRoundTrip:
    @given(poly_strategy(), poly_strategy())
    @settings(max_examples=50, deadline=None)
    def test_format_parse_roundtrip(self, num, den):
        if den.is_zero():
            den = den + 1
        f = RationalFunction.from_polys(num, den)
        assert parse_expression(format_rf(f), 2) == f

    def test_format_examples(self):
        f = parse_expression("p22 - p11^2", 2)
        assert parse_expression(format_rf(f), 2) == f


class TestPoint:
    def test_parse_point(self):
        pt = point_from_string("p11=1/2, p12=-3,p22=0")
        assert pt == {"p11": Fraction(1, 2), "p12": Fraction(-3), "p22": Fraction(0)}

    def test_empty(self):
        assert point_from_string("  ") == {}

    def test_malformed(self):
        with pytest.raises(ParseError):
            point_from_string("p11:1")
