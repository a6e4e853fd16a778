import math

import numpy as np
import pytest

from convtails.probes import (RatioProbe, Thresholds, Verdict, VerdictReport, combine, decide,
                              geometric_grid, grid_top, limsup_le, single_index_extrapolate)


GRID = geometric_grid(10.0, 1e6)


def probe(ratios, kind="target", target=1.0):
    return decide(RatioProbe("p", GRID, ratios, kind=kind, target=target))


def test_grid_defaults():
    assert GRID[0] == 10.0
    assert GRID[-1] == pytest.approx(1e6)
    np.testing.assert_allclose(GRID[1:] / GRID[:-1], math.sqrt(10.0))
    with grid_top(1e4):
        from convtails.probes import default_top
        assert default_top(True) == 1e4


def test_constant_probe():
    tr = single_index_extrapolate(GRID, np.ones_like(GRID))
    assert tr.limit == 1.0 and tr.band == 0.0


def test_pareto_subexp_shape_extrapolates_to_one():
    tr = single_index_extrapolate(GRID, 1 + np.log(GRID) / GRID)
    assert abs(tr.limit - 1) < 0.01


def test_diverging_probe_fails():
    p = probe((1 + GRID) / 2)
    assert p.trend.diverging
    assert p.verdict == Verdict.FAILS


def test_monotone_convergence_is_not_divergence():
    # increments first grow then shrink: a finite limit, not a divergence
    p = probe(np.array([0.9, 0.8, 0.74, 0.38, 0.13, 0.081, 0.078, 0.044, 0.028, 0.017, 0.011]), target=0.0)
    assert not p.trend.diverging


def test_too_few_points():
    with pytest.raises(ValueError):
        single_index_extrapolate(GRID[:4], np.ones(4))


def test_settled_on_other_limit_fails():
    assert probe(np.full_like(GRID, 2.0)).verdict == Verdict.FAILS


def test_noisy_probe_is_inconclusive():
    rng = np.random.default_rng(0)
    p = probe(1 + 0.2 * rng.standard_normal(len(GRID)))
    assert p.verdict == Verdict.INCONCLUSIVE


def test_bounded_and_liminf():
    assert probe(2 + np.sin(GRID), kind="bounded").verdict == Verdict.HOLDS
    assert probe(np.sqrt(GRID), kind="bounded").verdict == Verdict.FAILS
    assert probe(2 + 1 / GRID, kind="liminf", target=2.0).verdict == Verdict.HOLDS
    assert probe(1 - 0 * GRID, kind="liminf", target=2.0).verdict == Verdict.FAILS


def test_limsup_comparison():
    a = RatioProbe("a", GRID, 1 + 1 / GRID)
    b = RatioProbe("b", GRID, 2 + 0 * GRID)
    assert limsup_le(a, b) == Verdict.HOLDS
    assert limsup_le(b, a) == Verdict.FAILS


def test_combine_precedence():
    H, F, I, P = Verdict.HOLDS, Verdict.FAILS, Verdict.INCONCLUSIVE, Verdict.PRECONDITION
    assert combine([H, H]) == H
    assert combine([H, I]) == I
    assert combine([I, F]) == F
    assert combine([F, P]) == P
    assert combine([]) == I


def test_probe_validates_grid():
    with pytest.raises(ValueError):
        RatioProbe("bad", [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        RatioProbe("bad", [1.0, 2.0], [1.0])


def test_report_serialisation_round_trip():
    import json

    p = probe(np.ones_like(GRID))
    rep = VerdictReport("demo", Verdict.HOLDS, [p], Thresholds())
    body = json.loads(rep.to_json({"seed": 1}))
    assert body["config"] == {"seed": 1}
    assert body["verdict"] == "holds"
    lines = rep.to_csv({"seed": 1}).splitlines()
    assert lines[0] == "# seed=1"
    assert lines[1] == "probe,x,ratio,target,verdict"
    assert len(lines) == 2 + len(GRID)
    assert rep.probe("p") is p
