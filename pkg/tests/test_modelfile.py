"""Round-trip and error behavior of the nmx-model v1 text format."""

from fractions import Fraction

import pytest

from nmx.modelfile import ParseError, parse_model, serialize_model
from nmx.pursuit import PursuitParams, build
from nmx.randgen import random_instance

from conftest import chain_model


def test_round_trip_identity_chain(tiny_chain):
    model, info = tiny_chain
    text = serialize_model(model, info)
    model2, info2 = parse_model(text)
    assert model2 == model
    assert info2 == info
    assert serialize_model(model2, info2) == text


@pytest.mark.parametrize("seed", range(8))
def test_round_trip_random_instances(seed):
    model, info = random_instance(seed)
    text = serialize_model(model, info)
    model2, info2 = parse_model(text)
    assert model2 == model
    assert info2 == info
    assert serialize_model(model2, info2) == text


def test_round_trip_pursuit_with_tuple_elements():
    model, info = build(
        PursuitParams(grid=3, horizon=1, penalty=Fraction(10), x1=1, x2=3, y0=2)
    )
    text = serialize_model(model, info)
    model2, info2 = parse_model(text)
    assert model2 == model
    assert info2 == info


def test_round_trip_preserves_rational_costs():
    model, info = chain_model(
        terminal={"a": Fraction(3, 2), "b": Fraction(7)}
    )
    model2, _ = parse_model(serialize_model(model, info))
    assert model2.terminal_cost["a"] == Fraction(3, 2)


def test_missing_header_is_line_one_error():
    with pytest.raises(ParseError) as err:
        parse_model("[meta]\nhorizon = 0\n")
    assert err.value.line_no == 1


def test_bad_row_reports_line_number():
    model, info = chain_model(horizon=1)
    text = serialize_model(model, info)
    lines = text.splitlines()
    # corrupt the first dynamics row
    idx = next(i for i, l in enumerate(lines) if l.startswith("[dynamics")) + 1
    lines[idx] = "garbage row without separator"
    with pytest.raises(ParseError) as err:
        parse_model("\n".join(lines))
    assert err.value.line_no == idx + 1


def test_unknown_section_rejected():
    with pytest.raises(ParseError):
        parse_model("nmx-model v1\n[wat]\n")


def test_negative_cost_parses_then_fails_validation():
    from nmx.model import validate

    model, info = chain_model(terminal={"a": Fraction(-1), "b": Fraction(0)})
    bad = validate(model, info)
    assert any("negative" in b for b in bad)
