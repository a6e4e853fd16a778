import numpy as np
import pytest

from convtails import convolution as cv
from convtails import families as fam
from convtails.probes import Verdict
from convtails.suite import pareto1_conv_tail
from convtails.testers import (conv_ratio_probe, jump_probe, test_long_tailed, test_subexponential,
                               test_tail_equivalence, test_weak_tail_equivalence)

P1 = fam.pareto(alpha=1)


@pytest.mark.parametrize("spec, expect", [
    ("pareto(alpha=1.5)", Verdict.HOLDS),
    ("lognormal(mu=0, sigma=1)", Verdict.HOLDS),
    ("exponential(lambda=1)", Verdict.FAILS),
    ("counterexample(alpha=1)", Verdict.FAILS),
])
def test_long_tailed_examples(spec, expect):
    assert test_long_tailed(fam.parse_family(spec)).verdict == expect


def test_exponential_lag_ratios_are_exact():
    rep = test_long_tailed(fam.exponential())
    for a in (1, 2, 5):
        np.testing.assert_allclose(rep.probe(f"lag{a:g}").ratios, np.exp(-a), rtol=1e-12)


def test_counterexample_caught_by_jump_probe():
    G = fam.counterexample(alpha=1)
    p = jump_probe(G)
    np.testing.assert_array_equal(p.ratios, 0.5)
    assert test_long_tailed(G).probe("jump").verdict == Verdict.FAILS
    assert jump_probe(P1) is None
    mix = fam.parse_family("0.5*pareto(alpha=1) + 0.5*counterexample(alpha=1)")
    assert test_long_tailed(mix).verdict == Verdict.HOLDS


def test_tail_equivalence_examples():
    assert test_tail_equivalence(P1, P1).verdict == Verdict.HOLDS
    two = fam.regvarying(alpha=1, c=2)
    assert test_tail_equivalence(P1, two).verdict == Verdict.FAILS
    assert test_weak_tail_equivalence(P1, two).verdict == Verdict.HOLDS
    P15 = fam.pareto(alpha=1.5)
    assert test_tail_equivalence(P1, P15).verdict == Verdict.FAILS
    assert test_weak_tail_equivalence(P1, P15).verdict == Verdict.FAILS


def test_subexponential_pareto_ratio_at_100():
    rep = test_subexponential(P1)
    p = rep.probe("self-conv")
    i = int(np.argmin(np.abs(p.grid - 100.0)))
    assert p.ratios[i] == pytest.approx(pareto1_conv_tail(100.0) / 0.02, rel=1e-8)
    assert p.ratios[i] == pytest.approx(1.0460, abs=1e-4)
    assert rep.verdict == Verdict.HOLDS


def test_subexponential_exponential_ratio_at_10():
    rep = test_subexponential(fam.exponential())
    p = rep.probe("self-conv")
    assert p.ratios[0] == pytest.approx(5.5, rel=1e-8)
    assert rep.verdict == Verdict.FAILS


def test_subexponential_verdicts_for_classical_families():
    for spec in ("weibull(k=0.5)", "lognormal(mu=0, sigma=1)"):
        rep = test_subexponential(fam.parse_family(spec))
        assert rep.verdict == Verdict.HOLDS
        assert rep.probe("self-conv").ratios[-1] <= 1.05
    assert test_subexponential(fam.weibull(k=1.5)).verdict == Verdict.FAILS


def test_verdict_is_scale_free():
    grid = np.geomspace(10, 1e6, 11)
    L = fam.lognormal()
    a = conv_ratio_probe(P1, L, grid)
    b = conv_ratio_probe(P1, L, grid, den=lambda x: np.log(P1.sf(x) + L.sf(x)) + np.log(3.0))
    np.testing.assert_allclose(a.ratios, 3.0 * b.ratios, rtol=1e-12)


def test_conv_probe_matches_direct_quadrature():
    grid = np.array([10.0, 100.0, 1000.0])
    p = conv_ratio_probe(P1, P1, grid)
    want = cv.conv_tail(P1, P1, grid) / (2 * P1.sf(grid))
    np.testing.assert_allclose(p.ratios, want, rtol=1e-12)
