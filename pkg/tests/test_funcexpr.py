import numpy as np
import pytest

from app.core.exceptions import ExprSyntaxError, PoleError, UnknownFunctionError
from app.core.fejer import CircleGrid
from app.services.funcexpr import (
    BinOp,
    Builtin,
    Call,
    CircleFunction,
    Literal,
    Neg,
    Pow,
    Var,
    evaluate,
    parse,
    pole_check,
    singular_subexpressions,
    to_source,
    tokenize,
)


def test_tokenize_offsets():
    tokens = tokenize("exp(z) + 2.5")
    assert [(t.kind, t.text, t.offset) for t in tokens] == [
        ("IDENT", "exp", 0),
        ("OP", "(", 3),
        ("IDENT", "z", 4),
        ("OP", ")", 5),
        ("OP", "+", 7),
        ("NUM", "2.5", 9),
        ("END", "", 12),
    ]


def test_precedence_and_associativity():
    assert to_source(parse("1 + 2*z")) == "(1.0 + (2.0 * z))"
    assert to_source(parse("z - 1 - 2")) == "((z - 1.0) - 2.0)"
    assert to_source(parse("-z^2")) == "(-(z ^ 2))"
    assert to_source(parse("z/2*3")) == "((z / 2.0) * 3.0)"


def test_negative_exponents():
    assert parse("z^-1") == Pow(Var(), -1)
    assert parse("z^(-3)") == Pow(Var(), -3)
    assert parse("(z+1)^2") == Pow(BinOp("+", Var(), Literal(1 + 0j)), 2)


def test_complex_literal():
    assert parse("(1,-2)") == Literal(1 - 2j)
    assert parse("(0.5, 0.25) * z") == BinOp("*", Literal(0.5 + 0.25j), Var())


def test_calls():
    assert parse("conj(z)") == Call("conj", Var())
    assert parse("logabs(z - 2)") == Call("logabs", BinOp("-", Var(), Literal(2 + 0j)))


def test_print_parse_is_a_fixed_point():
    for src in ["1/(z-2) + exp(conj(z))", "-(z^-2)*(1,-0.5)", "re(z)*im(z) - abs(z+3)", "cos(z)^3"]:
        printed = to_source(parse(src))
        assert to_source(parse(printed)) == printed
        assert parse(printed) == parse(src)


@pytest.mark.parametrize(
    "src, offset",
    [
        ("z^", 2),
        ("", 0),
        ("1 + * z", 4),
        ("(z + 1", 6),
        ("z $ 2", 2),
        ("z^1.5", 2),
        ("z z", 2),
    ],
)
def test_syntax_error_offsets(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


def test_unknown_function():
    with pytest.raises(UnknownFunctionError) as info:
        parse("2 + foo(z)")
    assert info.value.offset == 4
    assert info.value.name == "foo"


def test_non_ascii_offset_is_in_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("z + é")
    assert info.value.offset == 4


def test_evaluate_values():
    assert evaluate(parse("1/(z-2)"), 1) == pytest.approx(-1)
    assert evaluate(parse("z^-2"), 1j) == pytest.approx(-1)
    assert evaluate(parse("re(z) + im(z)"), np.exp(0.3j)) == pytest.approx(np.cos(0.3) + np.sin(0.3))
    assert evaluate(parse("logabs(z - 3)"), -1) == pytest.approx(np.log(4))
    values = evaluate(parse("z*conj(z)"), np.exp(1j * np.linspace(0, 6, 7)))
    assert np.allclose(values, 1.0)


def test_evaluate_requires_unit_circle():
    with pytest.raises(ValueError):
        evaluate(parse("z"), 2.0)


def test_evaluate_pole_is_an_error():
    with pytest.raises(PoleError):
        evaluate(parse("1/(z-1)"), 1.0)


def test_pole_check():
    assert not pole_check(parse("1/(z-1)")).passed
    ok = pole_check(parse("1/(z-2)"))
    assert ok.passed
    assert ok.min_denominator_modulus == pytest.approx(1.0)
    assert ok.grid_size == 4096
    assert pole_check(parse("logabs(z)")).passed
    assert not pole_check(parse("logabs(z + 1)")).passed


def test_pole_check_upgrades_small_grid():
    assert pole_check(parse("1/(z-2)"), CircleGrid(M=16)).grid_size == 4096


def test_pole_check_without_denominators():
    report = pole_check(parse("exp(z) + z^-3"))
    assert report.passed
    assert report.denominators == 0


def test_singular_subexpressions():
    expr = parse("1/(z-2) + (z+3)^-1 + z^-4")
    found = singular_subexpressions(expr)
    assert BinOp("-", Var(), Literal(2 + 0j)) in found
    assert BinOp("+", Var(), Literal(3 + 0j)) in found
    assert len(found) == 2


def test_from_source_rejects_poles():
    with pytest.raises(PoleError):
        CircleFunction.from_source("1/(z-1)")
    f = CircleFunction.from_source("1/(z-1)", check_poles=False)
    assert f.description == "1/(z-1)"


def test_builtins_resolve():
    assert CircleFunction.resolve("power(3)")(1j) == pytest.approx(-1j)
    assert CircleFunction.resolve("inv_shift(2)")(1) == pytest.approx(-1)
    assert CircleFunction.resolve("inv_shift((0,3))")(1) == pytest.approx(1 / (1 - 3j))
    assert CircleFunction.resolve("exp_z")(1) == pytest.approx(np.e)
    assert CircleFunction.resolve("one")(-1) == 1


def test_builtin_errors():
    with pytest.raises(PoleError):
        CircleFunction.resolve("inv_shift(1)")
    with pytest.raises(ExprSyntaxError):
        CircleFunction.resolve("power(x)")
    with pytest.raises(UnknownFunctionError):
        Builtin("nope")


def test_builtin_closed_form_matches_expression():
    t = np.linspace(0, 6.2, 40)
    for spec in ["one", "z", "re_z", "exp_z", "inv_shift(0.5)", "power(-3)", "power(2)"]:
        f = CircleFunction.resolve(spec)
        as_expr = CircleFunction(f.expr)
        assert np.allclose(f.on_angles(t), as_expr.on_angles(t), atol=1e-13), spec


def test_conjugate_and_product():
    z = np.exp(0.7j)
    f = CircleFunction.resolve("z")
    g = CircleFunction.resolve("z^-1")
    assert f.conjugate()(z) == pytest.approx(np.conj(z))
    assert (f * g)(z) == pytest.approx(1.0)
    assert (f * f.conjugate())(z) == pytest.approx(1.0)


def test_neg_node():
    assert parse("-(1,1)") == Neg(Literal(1 + 1j))


def test_overflowing_literal_rejected():
    with pytest.raises(ExprSyntaxError) as info:
        parse("2 + 1e400*z")
    assert info.value.offset == 4
    assert "out of range" in str(info.value)
