import math

import numpy as np
import pytest

from convtails import families as fam
from convtails import montecarlo as mc

P1 = fam.pareto(alpha=1)


def test_certain_and_impossible_events():
    e = mc.mc_conv_tail(P1, P1, 0.0, 2000, seed=1)
    assert (e.value, e.std_error) == (1.0, 0.0)
    one = fam.pointmass(1.0)
    assert mc.mc_conv_tail(one, one, 1.5, 1000, seed=1).value == 1.0
    assert mc.mc_conv_tail(one, one, 2.5, 1000, seed=1).value == 0.0


def test_minimum_sample_size():
    with pytest.raises(ValueError):
        mc.mc_conv_tail(P1, P1, 10.0, 999, seed=1)


def test_estimate_close_to_closed_form():
    from convtails.suite import pareto1_conv_tail

    e = mc.mc_conv_tail(P1, P1, 100.0, 10**6, seed=5)
    assert abs(e.value - pareto1_conv_tail(100.0)) < 4 * e.std_error


def test_seed_determinism_and_stream_independence():
    a = mc.mc_conv_tail(P1, P1, 30.0, 50_000, seed=9)
    b = mc.mc_conv_tail(P1, P1, 30.0, 50_000, seed=9)
    c = mc.mc_conv_tail(P1, P1, 30.0, 50_000, seed=10)
    assert a == b
    assert a.hits != c.hits
    assert mc.splitmix64(9, 0) != mc.splitmix64(9, 1)


def test_decomposition_hit_counts_add_up():
    E = fam.exponential()
    d = mc.mc_decomposition(P1, E, lambda x: math.sqrt(x), 50.0, 100_000, seed=3)
    assert d["le_h"].hits + d["gt_h"].hits == d["total"].hits
    assert d["le_h"].hits + d["le_h_other"].hits + d["gt_gt"].hits == d["total"].hits
    assert mc.mc_term(P1, E, math.sqrt, 50.0, 100_000, 3, "gt_gt") == d["gt_gt"]
    with pytest.raises(ValueError):
        mc.mc_term(P1, E, math.sqrt, 50.0, 100_000, 3, "bogus")


def test_big_jump_independent_of_thread_count():
    grid = [10.0, 30.0, 100.0]
    _, one = mc.big_jump_probe(P1, grid, 20_000, seed=4, workers=1)
    _, four = mc.big_jump_probe(P1, grid, 20_000, seed=4, workers=4)
    assert one == four
    assert mc.big_jump_csv(one, {"seed": 4}) == mc.big_jump_csv(four, {"seed": 4})


def test_big_jump_exponential_ratio_at_10():
    x = 10.0
    want = (1 + x) * math.exp(-x) / (2 * math.exp(-x) - math.exp(-2 * x))
    _, pts = mc.big_jump_probe(fam.exponential(), [x], 10**6, seed=2)
    p = pts[0]
    assert abs(p.ratio - want) < 4 * p.ratio_se
    assert p.ratio > 2.5


def test_low_confidence_flag():
    probe, pts = mc.big_jump_probe(P1, [1e4], 1000, seed=1)
    assert pts[0].low_confidence
    assert probe.flags


def test_grid_cap():
    g = mc.big_jump_grid(P1, 10**6)
    tail = P1.sf(g)
    assert np.all(2 * tail - tail**2 >= 1e-4)
    assert g[0] == 1.0


def test_csv_has_header_and_repr_floats():
    e = mc.mc_conv_tail(P1, P1, 100.0, 10_000, seed=7)
    text = mc.estimates_csv([100.0], [e], {"seed": 7, "n": 10_000})
    lines = text.splitlines()
    assert lines[:2] == ["# seed=7", "# n=10000"]
    assert lines[2] == "x,estimate,std_error,n,hits,seed"
    assert float(lines[3].split(",")[1]) == e.value
