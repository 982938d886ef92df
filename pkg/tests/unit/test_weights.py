# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Unit tests for `src/weights.py`."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import weights
from weights import (
    CompensatedSum,
    WeightKind,
    WeightSpec,
    compensated_prefix_sums,
    lambda_ratio,
    lambda_ratios,
    make_weights,
    power_sum_bounds,
)


@pytest.mark.parametrize(
    "text,kind,param",
    [
        ("constant", WeightKind.CONSTANT, None),
        ("cesaro", WeightKind.CONSTANT, None),
        ("power:0.5", WeightKind.POWER, 0.5),
        ("Power:-0.5", WeightKind.POWER, -0.5),
        ("geometric:2", WeightKind.GEOMETRIC, 2.0),
    ],
)
def test_parse_families(text, kind, param):
    spec = WeightSpec.parse(text)

    assert spec.kind is kind
    assert spec.param == param


def test_parse_list():
    spec = WeightSpec.parse("list:1, 2.5,0,4")

    assert spec.kind is WeightKind.EXPLICIT
    assert spec.values == (1.0, 2.5, 0.0, 4.0)


@pytest.mark.parametrize(
    "text",
    [
        "power:-1",
        "power:-2",
        "power:",
        "power:abc",
        "geometric:0",
        "geometric:-3",
        "list:",
        "list:0,1",
        "list:1,-1",
        "constant:3",
        "harmonic",
    ],
)
def test_parse_rejects_invalid(text):
    with pytest.raises(ValueError):
        WeightSpec.parse(text)


def test_from_file_skips_comments_and_blanks(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("# weights\n1\n\n2  # second\n3\n")

    spec = WeightSpec.parse(f"file:{path}")

    assert spec.values == (1.0, 2.0, 3.0)
    assert str(spec) == f"file:{path}"


def test_from_file_reports_line_number(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("1\n2\nthree\n")

    with pytest.raises(ValueError, match=r"w\.txt:3"):
        WeightSpec.from_file(path)


def test_from_file_missing_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        WeightSpec.parse(f"file:{tmp_path / 'absent.txt'}")


@pytest.mark.parametrize(
    "text,lam,big",
    [
        ("constant", [1, 1, 1], [1, 2, 3]),
        ("power:1", [1, 2, 3], [1, 3, 6]),
        ("geometric:2", [2, 4, 8], [2, 6, 14]),
        ("list:3,0,1,9", [3, 0, 1], [3, 3, 4]),
    ],
)
def test_make_weights(text, lam, big):
    w = make_weights(text, 3)

    assert w.N == 3
    np.testing.assert_array_equal(w.lam, lam)
    np.testing.assert_array_equal(w.Lam, big)


def test_geometric_weights_are_exact_powers():
    w = make_weights("geometric:2", 60)

    assert w.lam.tolist() == [2.0**k for k in range(1, 61)]
    assert lambda_ratio(w, 3) == 1.75


def test_make_weights_arrays_are_read_only():
    w = make_weights("constant", 4)

    with pytest.raises(ValueError):
        w.lam[0] = 2.0


def test_make_weights_geometric_overflow():
    with pytest.raises(ValueError, match="overflow"):
        make_weights("geometric:10", 400)


def test_make_weights_explicit_too_short():
    with pytest.raises(ValueError, match="3 weights, 5 requested"):
        make_weights("list:1,2,3", 5)


def test_make_weights_rejects_nonpositive_n():
    with pytest.raises(ValueError):
        make_weights("constant", 0)


@pytest.mark.parametrize(
    "text,n,expected",
    [
        ("constant", 7, 7.0),
        ("power:1", 4, 2.5),
        ("geometric:2", 3, 1.75),
    ],
)
def test_lambda_ratio(text, n, expected):
    assert lambda_ratio(make_weights(text, 10), n) == pytest.approx(expected, rel=1e-15)


def test_lambda_ratio_index_errors():
    w = make_weights("constant", 3)

    with pytest.raises(IndexError):
        lambda_ratio(w, 0)
    with pytest.raises(IndexError):
        lambda_ratio(w, 4)


def test_zero_weight_is_reported_with_its_index():
    w = make_weights("list:1,0,2", 3)

    with pytest.raises(ZeroDivisionError, match="lambda_2"):
        lambda_ratio(w, 2)
    with pytest.raises(ZeroDivisionError, match="lambda_2"):
        lambda_ratios(w)


def test_truncate_and_scaled_keep_ratios():
    w = make_weights("power:0.5", 20)

    short = w.truncate(5)
    scaled = w.scaled(3.0)

    assert short.N == 5
    assert w.truncate(20) is w
    np.testing.assert_allclose(lambda_ratios(short), lambda_ratios(w)[:5], rtol=0)
    np.testing.assert_allclose(lambda_ratios(scaled), lambda_ratios(w), rtol=1e-14)
    with pytest.raises(ValueError):
        w.truncate(21)
    with pytest.raises(ValueError):
        w.scaled(0)


def test_alpha_property():
    assert WeightSpec.parse("constant").alpha == 0.0
    assert WeightSpec.parse("power:0.25").alpha == 0.25
    assert WeightSpec.parse("geometric:2").alpha is None


def test_compensated_sum_recovers_cancelled_term():
    acc = CompensatedSum()
    for value in (1e16, 1.0, -1e16):
        total = acc.add(value)

    assert total == 1.0


def test_compensated_prefix_sums_beats_naive_accumulation():
    values = np.full(10**5, 0.1)

    sums = compensated_prefix_sums(values)

    assert sums[-1] == pytest.approx(math.fsum(values), rel=1e-15)
    assert sums[9] == pytest.approx(1.0, rel=1e-15)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
@settings(max_examples=100, deadline=None)
def test_compensated_prefix_sums_match_fsum(values):
    sums = compensated_prefix_sums(np.array(values))

    for k in range(len(values)):
        exact = math.fsum(values[: k + 1])
        assert sums[k] == pytest.approx(exact, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize(
    "n,r,lower,upper",
    [
        (2, 0.5, 2.3094, 2.5689),
        (1, 1.0, 1.0, 1.0),
        (3, 1.0, 6.0, 6.0),
        (5, 0.0, 5.0, 5.0),
    ],
)
def test_power_sum_bounds_values(n, r, lower, upper):
    bounds = power_sum_bounds(n, r)

    assert bounds.lower == pytest.approx(lower, abs=1e-4)
    assert bounds.upper == pytest.approx(upper, abs=1e-4)
    assert not bounds.extended


@given(st.integers(1, 300), st.floats(0.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_power_sum_bounds_bracket_the_sum(n, r):
    total = math.fsum(i**r for i in range(1, n + 1))

    bounds = power_sum_bounds(n, r)

    assert bounds.lower <= total * (1 + 1e-12)
    assert total <= bounds.upper * (1 + 1e-12)


@pytest.mark.parametrize("r", [5e-324, 1e-300, 1e-17])
def test_power_sum_bounds_tiny_exponent(r):
    bounds = power_sum_bounds(2, r)

    assert bounds.lower == pytest.approx(2.0)
    assert bounds.upper == pytest.approx(1 / math.log(1.5))
    assert bounds.lower <= 2.0 <= bounds.upper


def test_power_sum_bounds_extended_regime_keeps_upper_bound(caplog):
    caplog.set_level("DEBUG", logger=weights.__name__)

    bounds = power_sum_bounds(10, -0.5)

    assert bounds.extended
    assert sum(i**-0.5 for i in range(1, 11)) <= bounds.upper
    assert "extended regime" in caplog.text


@pytest.mark.parametrize("n,r", [(0, 0.5), (3, -1.0), (3, 1.5)])
def test_power_sum_bounds_rejects_out_of_range(n, r):
    with pytest.raises(ValueError):
        power_sum_bounds(n, r)
