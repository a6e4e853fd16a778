"""Property-based checks of the exact lattice identities and of invariances."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from convtails import convolution as cv
from convtails import families as fam
from convtails import lattice as lat
from convtails import montecarlo as mc
from convtails.lattice import LatticeMeasure, Window
from convtails.laws import Mixture
from convtails.testers import test_tail_equivalence

STEP = 0.5
masses = st.lists(st.floats(0.0, 3.0, allow_nan=False), min_size=1, max_size=25)
origins = st.integers(-10, 10)


@st.composite
def lattices(draw):
    return LatticeMeasure(STEP * draw(origins), STEP, np.array(draw(masses)))


def close(a, b, scale=1.0):
    return abs(a - b) <= 1e-12 * max(1.0, scale)


@given(lattices(), st.floats(-10, 20))
def test_restriction_partition_is_exact(F, t):
    lo = lat.restrict(F, Window.le(t))
    hi = lat.restrict(F, Window.gt(t))
    assert lat.add(lo, hi) == F


@given(lattices(), lattices())
def test_convolution_mass_multiplies(F, G):
    S = lat.convolve(F, G)
    assert close(S.mass, F.mass * G.mass, F.mass * G.mass)


@given(lattices(), st.floats(-20, 30), st.floats(0.0, 30))
def test_tail_non_increasing(F, x, dx):
    assert lat.tail(F, x + dx) <= lat.tail(F, x) + 1e-15


@settings(max_examples=60)
@given(lattices(), lattices(), st.floats(0.0, 30.0), st.floats(0.0, 1.0))
def test_decomposition_identities(F, G, x, frac):
    h = frac * x
    r = cv.decomposition_report(F, G, h, x)
    s = F.mass * G.mass
    assert close(r.residual_split, 0.0, s)
    assert close(r.residual_upper, 0.0, s)
    assert r.slack_upper >= 0.0
    if h <= x / 2:
        assert r.residual_three is not None and close(r.residual_three, 0.0, s)
        assert r.slack_upper == 0.0


@given(lattices(), lattices(), lattices(), st.floats(0, 1), st.floats(-10, 30))
def test_convolution_is_linear_in_mixtures(F, G, H, p, x):
    M = lat.mixture(p, F, 1 - p, G)
    lhs = lat.tail(lat.convolve(M, H), x)
    rhs = p * lat.tail(lat.convolve(F, H), x) + (1 - p) * lat.tail(lat.convolve(G, H), x)
    assert close(lhs, rhs, (F.mass + G.mass) * H.mass)


@given(lattices(), lattices(), st.floats(0, 1), st.floats(-10, 30))
def test_mixture_tail_is_linear(F, G, p, x):
    lhs = lat.tail(lat.mixture(p, F, 1 - p, G), x)
    assert close(lhs, p * lat.tail(F, x) + (1 - p) * lat.tail(G, x), F.mass + G.mass)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**63 - 1), st.floats(5.0, 200.0))
def test_same_seed_same_estimate(seed, x):
    P = fam.pareto(alpha=1)
    assert mc.mc_conv_tail(P, P, x, 2000, seed) == mc.mc_conv_tail(P, P, x, 2000, seed)


@settings(max_examples=5, deadline=None)
@given(st.floats(0.1, 10.0))
def test_tail_ratio_verdict_is_scale_free(c):
    F = fam.pareto(alpha=1)
    G = fam.regvarying(alpha=1, c=2)
    plain = test_tail_equivalence(F, G)
    scaled = test_tail_equivalence(Mixture([c], [F]), Mixture([c], [G]))
    assert plain.verdict == scaled.verdict
    np.testing.assert_allclose(plain.probes[0].ratios, scaled.probes[0].ratios, rtol=1e-12)
