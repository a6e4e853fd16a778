import math
import warnings

import numpy as np
import pytest

from convtails import families as fam
from convtails.laws import Mixture, positive_part, shift


def test_closed_form_tails():
    assert fam.pareto(alpha=1).sf(100.0) == pytest.approx(0.01, rel=1e-14)
    assert fam.pareto(alpha=1.5).sf(4.0) == pytest.approx(0.125, rel=1e-14)
    assert fam.exponential(lam=2.0).sf(1.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert fam.weibull(k=0.5).sf(4.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert fam.lognormal().sf(1.0) == pytest.approx(0.5, rel=1e-14)


def test_logsf_far_in_the_tail_is_finite():
    v = fam.exponential().logsf(1e4)
    assert v == pytest.approx(-1e4, rel=1e-12)


def test_regvarying_constant_slowly_varying_part():
    F = fam.regvarying(alpha=1, c=2)
    xs = 2.0 ** np.arange(3, 30)
    np.testing.assert_allclose(F.sf(2 * xs) / F.sf(xs), 0.5, rtol=1e-12)
    np.testing.assert_allclose(F.sf(xs) * xs, 2.0, rtol=1e-12)


def test_regvarying_with_log_factor():
    F = fam.regvarying(alpha=1, beta=0.5)
    x = 1e6
    assert F.sf(x) == pytest.approx(x**-1 * (1 + math.log(x)) ** 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        fam.regvarying(alpha=1, beta=2)


def test_shift_by_zero_and_positive_part():
    P = fam.pareto(alpha=1)
    xs = np.array([0.5, 2.0, 50.0])
    np.testing.assert_array_equal(shift(P, 0.0).sf(xs), P.sf(xs))
    np.testing.assert_array_equal(positive_part(P).sf(xs), P.sf(xs))
    # tail of the shifted law at x is the original tail at x + y
    assert shift(P, 1.0).sf(1.0) == pytest.approx(0.5, rel=1e-14)
    assert shift(P, -2.0).sf(8.0) == pytest.approx(1 / 6, rel=1e-14)
    np.testing.assert_array_equal(shift(shift(P, 3.0), -3.0).sf(xs), P.sf(xs))


@pytest.mark.parametrize("text", [
    "pareto(alpha=1.5)",
    "lognormal(mu=0, sigma=1)",
    "weibull(k=0.5)",
    "exponential(lambda=1)",
    "regvarying(alpha=1, c=2)",
    "counterexample(alpha=1)",
    "shift(pareto(alpha=1.5), y=-2)",
])
def test_parse_round_trip(text):
    F = fam.parse_family(text)
    G = fam.parse_family(F.spec())
    xs = np.array([3.0, 30.0, 3e3])
    np.testing.assert_array_equal(F.sf(xs), G.sf(xs))


def test_parse_mixture():
    M = fam.parse_family("0.5*pareto(alpha=1) + 0.5*lognormal()")
    assert isinstance(M, Mixture)
    x = 20.0
    want = 0.5 * fam.pareto(alpha=1).sf(x) + 0.5 * fam.lognormal().sf(x)
    assert M.sf(x) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("bad", ["nope(a=1)", "pareto", "pareto(alpha=x)", "pareto(beta=1)",
                                 "pareto(alpha=-1)", "shift(pareto(alpha=1))"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        fam.parse_family(bad)


def test_counterexample_breakpoints_follow_the_recurrence():
    G = fam.counterexample(alpha=1)
    x, y = G.breakpoints_at(1)
    assert x == 1.0
    assert y == pytest.approx(math.e, rel=1e-14)
    x2, _ = G.breakpoints_at(2)
    assert x2 == pytest.approx(math.e * 4, rel=1e-13)


def test_counterexample_tail_halves_at_each_jump():
    G = fam.counterexample(alpha=1)
    ys, ms = G.atoms(hi=1e300)
    tails = G.sf(ys)
    assert np.all(tails / (tails + ms) == 0.5)
    # jump relative to x**-1 shrinks like 2**-(n+1)
    rel = ms * ys
    np.testing.assert_allclose(rel, 2.0 ** -(np.arange(len(ys)) + 2), rtol=1e-12)


def test_counterexample_range_error():
    G = fam.counterexample(alpha=1)
    with pytest.raises(fam.RangeError):
        G.breakpoints_at(G.cycles_in_range() + 1)


def test_dump_breakpoints_format():
    text = fam.dump_breakpoints(fam.counterexample(alpha=1), 3)
    lines = text.strip().splitlines()
    assert lines[0] == "n,x_n,y_n,G_tail_at_y_n"
    assert len(lines) == 4
    n, x, y, t = lines[1].split(",")
    assert (n, float(x)) == ("1", 1.0)
    assert float(t) == pytest.approx(math.exp(-1) / 4, rel=1e-14)


def test_discretize_point_mass_and_residual():
    D = fam.discretize(fam.pointmass(0.0), (0.0, 4.0), 1.0)
    assert D.right_residual == 0.0
    assert D.measure.canonical().mass == 1.0
    P = fam.pareto(alpha=1)
    D = fam.discretize(P, (1.0, 20.0), 0.5)
    g = D.measure.positions
    from convtails.lattice import tail
    np.testing.assert_allclose(tail(D.measure, g) + D.right_residual, P.sf(g), atol=1e-15)


def test_discretize_warns_on_incommensurate_step():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        D = fam.discretize(fam.exponential(), (0.0, 1.0), 0.3)
    assert D.warnings and rec
    assert D.measure.positions[-1] == pytest.approx(1.2)


def test_sampling_is_seed_deterministic():
    for spec in ("pareto(alpha=1)", "counterexample(alpha=1)", "0.5*pareto(alpha=1) + 0.5*exponential()"):
        F = fam.parse_family(spec)
        np.testing.assert_array_equal(fam.sample(F, 500, 3), fam.sample(F, 500, 3))


def test_counterexample_sampler_matches_tail():
    G = fam.counterexample(alpha=1)
    s = fam.sample(G, 200_000, 11)
    for x in (2.0, 10.0, 300.0):
        p = float(G.sf(x))
        se = math.sqrt(p * (1 - p) / len(s))
        assert abs(np.mean(s > x) - p) < 5 * se
