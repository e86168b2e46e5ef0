from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardylab.errors import ParseError
from hardylab.grammar import format_expr, parse_expr
from hardylab.means import Circ, Power, Square


@pytest.mark.parametrize("text, expected", [
    ("P[0]", Power(0.0)),
    ("P[-1]", Power(-1.0)),
    ("P[1/2]", Power(0.5)),
    ("P[2.5e-1]", Power(0.25)),
    ("sq(P[0],P[1])", Square(Power(0.0), Power(1.0))),
    (" circ ( P[1] , P[0] ) ", Circ(Power(1.0), Power(0.0))),
    ("sq(circ(P[1],P[0]),P[-2])", Square(Circ(Power(1.0), Power(0.0)), Power(-2.0))),
])
def test_parse(text, expected):
    assert parse_expr(text) == expected


@pytest.mark.parametrize("text, position", [
    ("P[0", 3),
    ("", 0),
    ("Q[1]", 0),
    ("sq(P[0])", 7),
    ("P[0]x", 4),
    ("P[abc]", 2),
    ("P[1/0]", 2),
])
def test_parse_errors_carry_position(text, position):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    assert info.value.position == position
    assert f"position {position}" in str(info.value)


exprs = st.recursive(
    st.sampled_from([-2.0, -1.0, -0.5, 0.0, 0.25, 1.0, 3.0]).map(Power),
    lambda sub: st.one_of(st.builds(Circ, sub, sub), st.builds(Square, sub, sub)),
    max_leaves=6,
)


@given(exprs)
def test_format_round_trip(e):
    assert parse_expr(format_expr(e)) == e
    assert str(e) == format_expr(e)
