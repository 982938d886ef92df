# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Unit tests for `src/recurrences.py`."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import conditions
import recurrences
from recurrences import (
    RecurrenceKind,
    barrier_check,
    barrier_constants,
    critical_multiplier,
    eta_trace,
    gao_sequence,
    ks_classical_weights,
    mu_trace_q,
    reversed_w_trace,
    write_trace,
)
from weights import WeightKind, WeightSpec, lambda_ratios, make_weights


def explicit(values):
    return make_weights(WeightSpec(WeightKind.EXPLICIT, values=tuple(values)), len(values))


random_prefixes = st.lists(st.floats(0.1, 10.0), min_size=2, max_size=100).map(
    lambda steps: explicit(np.cumsum(steps))
)


def test_barrier_constants():
    b, c = barrier_constants(2.0, 1.0)

    assert (b, c) == pytest.approx((0.25, 0.25))
    assert critical_multiplier(2.0, 1.0) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        barrier_constants(2.0, 2.0)


@pytest.mark.parametrize("mu", [1.5, 4.0, 100.0])
def test_eta_starts_at_inverse_multiplier(mu):
    trace = eta_trace(make_weights("power:0.5", 10), 2.0, mu, 10)

    assert trace.values[0] == pytest.approx(1 / mu, rel=1e-15)
    assert trace.kind is RecurrenceKind.ETA


def test_eta_does_not_escape_above_the_hardy_multiplier():
    trace = eta_trace(make_weights("constant", 1000), 2.0, 4.0, 1000)

    assert trace.escaped_at is None
    assert trace.n_valid == 1000
    assert np.all(trace.values > 0)


def test_eta_escapes_below_the_norm():
    trace = eta_trace(make_weights("constant", 1000), 2.0, 1.5, 1000)

    assert trace.escaped_at is not None
    assert np.all(trace.values[: trace.escaped_at] > 0)
    assert np.all(np.isnan(trace.values[trace.escaped_at :]))


def test_eta_escape_counts_boundary_equality():
    # eta_1 = 1/mu = (Lambda_1/lambda_1)^p exactly at mu = 1
    trace = eta_trace(make_weights("constant", 5), 2.0, 1.0, 5)

    assert trace.escaped_at == 1


def test_eta_is_decreasing_in_the_multiplier():
    w = make_weights("power:0.5", 300)

    low = eta_trace(w, 3.0, 8.0, 300).values
    high = eta_trace(w, 3.0, 16.0, 300).values

    assert np.all(high <= low)


def test_eta_validates_arguments():
    w = make_weights("constant", 5)

    with pytest.raises(ValueError):
        eta_trace(w, 1.0, 4.0, 5)
    with pytest.raises(ValueError):
        eta_trace(w, 2.0, 0.0, 5)


def test_barrier_holds_for_cesaro_at_critical_multiplier():
    w = make_weights("constant", 1000)

    checked = barrier_check(eta_trace(w, 2.0, 4.0, 1000), 2.0, 1.0)

    assert checked.first_violation is None
    assert checked.margins[0] == 0.0
    assert np.all(checked.margins[1:] > 0)
    assert any("critical multiplier" in note for note in checked.notes)
    assert checked.parameters["b"] == pytest.approx(0.25)


def test_barrier_check_flags_small_multiplier():
    w = make_weights("constant", 100)

    checked = barrier_check(eta_trace(w, 2.0, 3.0, 100), 2.0, 1.0)

    assert checked.first_violation == 1


def test_barrier_check_rejects_other_traces():
    trace = ks_classical_weights(2.0, 5)

    with pytest.raises(ValueError):
        barrier_check(trace, 2.0, 1.0)


@given(
    random_prefixes,
    st.sampled_from([(2.0, 1.0), (3.0, 1.5), (1.5, 0.4)]),
    st.floats(0.5, 2.0),
)
@settings(max_examples=100, deadline=None)
def test_barrier_clearance_rules_out_escape(w, pl, factor):
    p, L = pl
    trace = eta_trace(w, p, factor * critical_multiplier(p, L), w.N)

    checked = barrier_check(trace, p, L)

    if checked.first_violation is None:
        assert trace.escaped_at is None
    if trace.escaped_at is not None:
        assert checked.first_violation is not None
        assert checked.first_violation <= trace.escaped_at


def test_mu_trace_starts_on_the_barrier():
    w = make_weights("constant", 100)

    trace = mu_trace_q(w, 2.0, 1.0, 100)

    assert trace.values[0] == pytest.approx(0.25)
    assert trace.first_violation is None
    assert trace.escaped_at is None
    assert trace.margins[0] == 0.0


@pytest.mark.parametrize("p,L", [(2.0, 1.0), (3.0, 1.5), (1.5, 0.4)])
def test_mu_and_eta_identify_for_power_weights(p, L):
    w = make_weights("power:0.5", 100)

    mu = mu_trace_q(w, p, L, 100)
    eta = eta_trace(w, p, (p / (p - L)) ** p, 100)

    assert mu.escaped_at == eta.escaped_at
    m = min(mu.n_valid, eta.n_valid) - 1
    np.testing.assert_allclose(mu.values[:m], eta.values[:m] ** (1 / (p - 1)), rtol=1e-10)


@given(random_prefixes, st.sampled_from([(2.0, 1.0), (3.0, 1.5), (1.5, 0.4)]))
@settings(max_examples=50, deadline=None)
def test_mu_and_eta_identify_on_random_prefixes(w, pl):
    p, L = pl
    mu = mu_trace_q(w, p, L, w.N)
    eta = eta_trace(w, p, (p / (p - L)) ** p, w.N)

    # the escaping term is ill-conditioned; compare the terms before it
    m = min(mu.n_valid, eta.n_valid) - 1
    np.testing.assert_allclose(mu.values[:m], eta.values[:m] ** (1 / (p - 1)), rtol=1e-10)


def test_ks_weights_for_p2():
    trace = ks_classical_weights(2.0, 4)

    np.testing.assert_allclose(trace.values, [1, 0.5, 0.375, 0.3125], rtol=1e-15)
    assert trace.parameters["U"] == pytest.approx(4.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_ks_verification_margins_are_nonnegative(p):
    trace = ks_classical_weights(p, 10**4)

    assert trace.first_violation is None
    assert np.all(trace.margins >= 0)


def test_ks_margin_closed_form_for_p2():
    n = np.arange(1, 100)

    trace = ks_classical_weights(2.0, 100)

    np.testing.assert_allclose(trace.margins[:-1], 1 / (2 * n - 1), rtol=1e-12)


def test_gao_sequence_matches_ks_weights_for_cesaro():
    w = make_weights("constant", 50)

    gao = gao_sequence(w, 2.0, 1.0, 50)

    assert gao.parameters["beta"] == pytest.approx(1.0)
    np.testing.assert_allclose(gao.values, ks_classical_weights(2.0, 50).values, rtol=1e-13)
    assert gao.first_violation is None


def test_gao_terminal_inequality_at_n1():
    gao = gao_sequence(make_weights("power:0.5", 1), 3.0, 1.0, 1)

    # x_1 = 1 reduces the terminal inequality to U >= 1
    assert gao.parameters["U"] == pytest.approx(1.5**3)
    assert gao.margins[0] == pytest.approx(gao.parameters["U"] - 1, rel=1e-14)
    assert gao.values.tolist() == [1.0]


@given(random_prefixes, st.sampled_from([(2.0, 1.0), (3.0, 1.5), (1.5, 0.4)]))
@settings(max_examples=50, deadline=None)
def test_gao_margins_scale_the_thm13_margins(w, pl):
    p, L = pl
    beta = L / (p - L)
    gao = gao_sequence(w, p, L, w.N)

    thm13 = conditions.thm13_margins(lambda_ratios(w), p, L)

    np.testing.assert_allclose(gao.margins[:-1], (1 + beta) * thm13, rtol=1e-9, atol=1e-9)
    assert (gao.first_violation is None) == bool(np.all(gao.margins >= 0))


def test_reversed_w_trace_for_levin_steckin_case():
    w = make_weights("constant", 11)

    trace = reversed_w_trace(w, 1 / 3, 1.0, 10)

    assert trace.parameters["beta"] == pytest.approx(-0.5)
    np.testing.assert_allclose(trace.values, np.arange(1, 12), rtol=1e-13)


def test_reversed_w_trace_validates():
    w = make_weights("constant", 11)

    with pytest.raises(ValueError):
        reversed_w_trace(w, 1.0, 2.0, 10)
    with pytest.raises(ValueError):
        reversed_w_trace(w, 0.25, 0.25, 10)
    with pytest.raises(ValueError):
        reversed_w_trace(w, 0.25, 2.0, 11)


def test_write_trace_round_trips_columns(tmp_path):
    w = make_weights("constant", 20)
    trace = barrier_check(eta_trace(w, 2.0, 4.0, 20), 2.0, 1.0)
    path = tmp_path / "eta.txt"

    write_trace(trace, path)

    header = path.read_text().splitlines()[0]
    data = np.loadtxt(path)
    assert header.startswith("# kind=eta")
    assert data.shape == (20, 5)
    np.testing.assert_array_equal(data[:, 0], np.arange(1, 21))
    np.testing.assert_array_equal(data[:, 1], trace.values)
    assert math.isclose(data[0, 3], 0.25)


def test_zero_weight_fails_loudly():
    with pytest.raises(ZeroDivisionError):
        eta_trace(make_weights("list:1,0,1", 3), 2.0, 4.0, 3)
    assert recurrences.BOUNDARY_RTOL > 0
