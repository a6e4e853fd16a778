import math

import numpy as np
import pytest

from convtails import families as fam
from convtails.hfunc import HFunction, construct_h, h_name, parse_h
from convtails.probes import Verdict
from convtails.testers import check_h_insensitive, test_long_tailed


@pytest.fixture(scope="module")
def h_pareto():
    return construct_h(fam.pareto(alpha=1))


def test_hfunction_counts_breakpoints_below_x():
    h = HFunction(np.array([1.0, 2.0, 2.0, 5.0]))
    assert h(1.0) == 0
    assert h(1.5) == 1
    assert h(2.0) == 1
    assert h(2.1) == 3
    assert h(100.0) == 4
    np.testing.assert_array_equal(h(np.array([0.0, 3.0])), [0.0, 3.0])


def test_hfunction_cap_and_validation():
    h = HFunction(np.arange(1.0, 50.0)).capped()
    xs = np.linspace(0.0, 60.0, 241)
    assert np.all(h(xs) <= xs / 2)
    with pytest.raises(ValueError):
        HFunction(np.array([2.0, 1.0]))


def test_constructed_h_for_pareto_is_insensitive(h_pareto):
    P = fam.pareto(alpha=1)
    xs = 10.0 ** np.arange(2, 9)
    hx = h_pareto(xs)
    assert np.all(np.diff(hx) > 0)
    minus = P.sf(xs - hx) / P.sf(xs)
    plus = P.sf(xs + hx) / P.sf(xs)
    # analytic ratios (1 -+ h/x)**-+1
    np.testing.assert_allclose(minus, 1 / (1 - hx / xs), rtol=1e-12)
    assert abs(minus[-1] - 1) < 0.01 and abs(plus[-1] - 1) < 0.01


def test_constructed_h_condition_holds_past_each_breakpoint(h_pareto):
    P = fam.pareto(alpha=1)
    bp = h_pareto.breakpoints
    for n in (1, 10, 100, 1000):
        x = bp[n - 1] * 1.01
        t = P.sf(x)
        assert abs(P.sf(x + n) - t) <= t / n
        assert abs(P.sf(x - n) - t) <= t / n


def test_exponential_h_stays_bounded():
    h = construct_h(fam.exponential())
    assert h.levels <= 1
    assert h.note


def test_minimum_of_two(h_pareto):
    h2 = construct_h(fam.pareto(alpha=2))
    both = construct_h(fam.pareto(alpha=1), fam.pareto(alpha=2))
    xs = np.geomspace(2.0, 1e7, 400)
    np.testing.assert_array_equal(both(xs), np.minimum(h_pareto(xs), h2(xs)))


def test_check_h_insensitive_examples():
    P = fam.pareto(alpha=1)
    assert check_h_insensitive(P, parse_h("sqrt")).verdict == Verdict.HOLDS
    rep = check_h_insensitive(P, parse_h("half"))
    assert rep.verdict == Verdict.FAILS
    assert rep.probe("minus").trend.limit == pytest.approx(2.0, abs=0.02)
    assert rep.probe("plus").trend.limit == pytest.approx(2 / 3, abs=0.02)


@pytest.mark.parametrize("spec", ["pareto(alpha=1)", "exponential(lambda=1)"])
def test_constant_h_agrees_with_long_tail_test(spec):
    F = fam.parse_family(spec)
    a = check_h_insensitive(F, parse_h("2")).verdict
    b = test_long_tailed(F).verdict
    assert (a == Verdict.HOLDS) == (b == Verdict.HOLDS)


def test_parse_h_names():
    x = 10_000.0
    assert parse_h("sqrt")(x) == 100.0
    assert parse_h("cbrt")(x) == pytest.approx(x ** (1 / 3))
    assert parse_h("quarter")(x) == x / 4
    assert parse_h("log")(x) == pytest.approx(math.log1p(x))
    assert parse_h("pow:0.25")(x) == pytest.approx(10.0)
    assert parse_h("3")(x) == 3.0
    assert h_name(parse_h("sqrt")) == "sqrt"
    with pytest.raises(ValueError):
        parse_h("nonsense")
