import numpy as np
import pytest

from convtails.lemmas import LEMMA_IDS, lemma_probe
from convtails.probes import Verdict
from convtails.suite import pareto1_conv_tail
from convtails.theorems import THEOREM_IDS, THEOREMS, verify_theorem


def test_h1_degenerate_F_gives_ratio_one():
    rep = lemma_probe("h1", {"F": "pointmass(a=0)", "G": "pareto(alpha=1)"})
    np.testing.assert_allclose(rep.probe("le_h").ratios, 1.0, rtol=1e-10)
    assert rep.verdict == Verdict.HOLDS


def test_h3_identical_inputs():
    rep = lemma_probe("h3", {"F1": "pareto(alpha=1)", "F2": "pareto(alpha=1)"})
    np.testing.assert_allclose(rep.probe("plain").ratios, 1.0)
    assert rep.verdict == Verdict.HOLDS


def test_h2_pareto_with_exponential():
    assert lemma_probe("h2", {"F": "pareto(alpha=1)", "G": "exponential(lambda=1)"}).verdict == Verdict.HOLDS


def test_lemma_hypothesis_failure_is_a_verdict():
    assert lemma_probe("h3", h="3").verdict == Verdict.PRECONDITION
    rep = lemma_probe("h1", {"F": "pareto(alpha=1)", "G": "exponential(lambda=1)"})
    assert rep.verdict == Verdict.PRECONDITION


def test_unknown_ids_list_the_valid_ones():
    with pytest.raises(KeyError, match="h3plus"):
        lemma_probe("nope")
    with pytest.raises(KeyError, match="closure.S"):
        verify_theorem("nope")


def test_every_theorem_has_a_default_instance():
    assert set(THEOREM_IDS) == set(THEOREMS)
    assert len(THEOREM_IDS) == 13
    assert set(LEMMA_IDS) == {"h1", "h2", "h3", "h3plus", "s1", "eq14"}


def test_nfold_spot_value():
    rep = verify_theorem("nfold.liminf", {"F": "pareto(alpha=1)", "n": 2})
    p = rep.probe("n-fold")
    i = int(np.argmin(np.abs(p.grid - 100.0)))
    assert p.ratios[i] == pytest.approx(100 * pareto1_conv_tail(100.0), rel=1e-9)
    assert p.ratios[i] == pytest.approx(2.0919, abs=1e-3)
    assert rep.verdict == Verdict.HOLDS


def test_long_add_5_precondition():
    rep = verify_theorem("long.add.5", {"F2": "pareto(alpha=2)"})
    assert rep.verdict == Verdict.PRECONDITION


@pytest.mark.parametrize("tid", ["cor.l2", "light.shift"])
def test_theorem_examples(tid):
    assert verify_theorem(tid).verdict == Verdict.HOLDS


def test_closure_pareto_pair_agrees():
    rep = verify_theorem("closure.S", {"F": "pareto(alpha=1)", "G": "pareto(alpha=1)", "p": 0.5})
    assert rep.details["sub_verdicts"] == ["holds"] * 4
    assert rep.details["agree"]
    assert rep.verdict == Verdict.HOLDS
