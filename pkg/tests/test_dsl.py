from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkweyl.dsl import (BinOp, Call, Coord, Neg, Num, Param, ParseError, evaluate_component,
                        evaluate_field, load_metric_file, parse_expression, parse_metric_file,
                        to_source)
from kkweyl.dsl import to_file_text
from kkweyl.solutions import load_fixture

DATA = Path(__file__).parent / "data"

SOLUTION_B = """\
dim 3
signature + - -
coords t rho theta
params A = 1, B = 1
g[0][0] = 0.25*rho^4 + A*rho^2 + B
g[1][1] = -1/(0.25*rho^4 + A*rho^2 + B)
g[2][2] = -rho^2
"""

MINKOWSKI = """\
dim 4
signature + - - -
coords t x y z
g[0][0] = 1
g[1][1] = -1
g[2][2] = -1
g[3][3] = -1
"""


def test_solution_b_component_value():
    spec = parse_metric_file(SOLUTION_B).metric
    j = evaluate_component(spec, 0, 0, (0.0, 2.0, 0.0), 2)
    assert j.value == pytest.approx(9.0, abs=1e-14)
    assert j.derivative((0, 1, 0)) == pytest.approx(2.0**3 + 2 * 2.0)
    assert not np.any(evaluate_component(spec, 2, 1, (0.0, 2.0, 0.0), 2).coeffs)


def test_mirror_symmetry_is_exact():
    spec = load_fixture("kk_generic3").metric
    pt = (0.1, -0.2, 0.05)
    assert np.array_equal(evaluate_component(spec, 0, 1, pt, 3).coeffs,
                          evaluate_component(spec, 1, 0, pt, 3).coeffs)


def test_minkowski_constant():
    spec = parse_metric_file(MINKOWSKI).metric
    j = evaluate_component(spec, 1, 1, (0.3, 1.0, -2.0, 5.0), 3)
    assert j.value == -1.0
    assert not np.any(j.coeffs[1:])


def test_unknown_function_is_positioned():
    with pytest.raises(ParseError) as exc:
        load_metric_file(DATA / "unknown_function.metric")
    assert "foo" in str(exc.value)
    assert (exc.value.line, exc.value.col) == (4, 11)


def test_bad_syntax_is_positioned():
    with pytest.raises(ParseError) as exc:
        load_metric_file(DATA / "bad_syntax.metric")
    assert exc.value.line == 6
    assert "')'" in exc.value.message


@pytest.mark.parametrize("text, line, fragment", [
    ("dim 5\n", 1, "dimension"),
    ("dim 2\nsignature + - -\n", 2, "signature"),
    ("dim 2\nsignature + -\ncoords t x\ng[0][0] = 1\n", 1, "degenerate"),
    ("dim 2\nsignature + -\ncoords t x\ng[0][0] = 1\ng[1][1] = -1\ng[0][1] = x\ng[1][0] = t\n", 7, "duplicate"),
    ("dim 2\nsignature + -\ncoords t x\ng[0][0] = sin(t, x)\ng[1][1] = -1\n", 4, "argument"),
    ("dim 2\nsignature + -\ncoords t x\ng[0][0] = 1 + q\ng[1][1] = -1\n", 4, "'q'"),
    ("dim 2\nsignature + -\ncoords t x\ng[0][0] = 1 +* 2\ng[1][1] = -1\n", 4, "'*'"),
])
def test_parse_errors(text, line, fragment):
    with pytest.raises(ParseError) as exc:
        parse_metric_file(text)
    assert exc.value.line == line
    assert fragment in exc.value.message


def test_power_is_right_associative_and_binds_tighter_than_unary_minus():
    e = parse_expression("-2^3^2")
    assert e == Neg(BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0))))


def test_params_override():
    mf = parse_metric_file(SOLUTION_B).with_params(A=2.0)
    assert evaluate_component(mf.metric, 0, 0, (0, 1.0, 0), 0).value == pytest.approx(0.25 + 2 + 1)


def test_blocks_and_domain():
    mf = load_fixture("solution_b")
    assert mf.domain_bounds()[1] == (0.5, 3.0)
    f = evaluate_field(mf.killing, (0.0, 1.0, 0.0), 0)[:, 0]
    np.testing.assert_array_equal(f, [0.0, 0.0, 1.0])
    a = evaluate_field(mf.potential, (0.0, 2.0, 0.0), 1)
    assert a[0, 0] == pytest.approx(-2.0)


def test_file_round_trip_for_fixtures():
    for name in ("solution_a", "solution_b", "kk_generic3", "static2d", "conformally_flat4"):
        mf = load_fixture(name)
        again = parse_metric_file(to_file_text(mf))
        assert again.metric.components == mf.metric.components
        assert again.potential == mf.potential


names = st.sampled_from(["t", "x", "A"])


def _leaf():
    nums = st.floats(0.0, 10.0, allow_nan=False).map(lambda v: Num(round(v, 6)))
    refs = names.map(lambda n: Param("A") if n == "A" else Coord(n, ("t", "x").index(n)))
    return nums | refs


exprs = st.recursive(
    _leaf(),
    lambda kids: (st.builds(Neg, kids)
                  | st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "^"]), kids, kids)
                  | st.builds(Call, st.sampled_from(["sin", "exp", "sqrt", "tanh"]), kids)),
    max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_pretty_print_round_trip(e):
    text = to_source(e)
    assert parse_expression(text, ("t", "x"), ("A",)) == e
