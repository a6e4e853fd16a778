import math

import numpy as np
import pytest

from convtails import lattice as lat
from convtails.lattice import LatticeMeasure, Window


def uniform10():
    return LatticeMeasure(1.0, 1.0, np.full(10, 0.1))


def test_total_mass_examples():
    assert lat.total_mass(LatticeMeasure.point_mass(0.0)) == 1.0
    assert lat.total_mass(LatticeMeasure(0.0, 1.0, [0.25, 0.25, 0.5])) == 1.0
    F = LatticeMeasure(0.0, 1.0, [0.5, 0.5])
    G = LatticeMeasure(0.0, 1.0, [0.2, 0.3, 0.5])
    assert lat.total_mass(lat.mixture(0.3, F, 0.7, G)) == pytest.approx(1.0, abs=1e-15)


def test_tail_is_open_on_the_left():
    P = LatticeMeasure.point_mass(5.0)
    assert lat.tail(P, 5.0) == 0.0
    assert lat.tail(P, 4.999) == 1.0


def test_tail_hand_count():
    assert lat.tail(uniform10(), 7.0) == pytest.approx(0.3, abs=1e-15)


def test_mixture_examples():
    F = uniform10()
    G = LatticeMeasure(0.0, 1.0, [1.0])
    assert lat.mixture(1.0, F, 0.0, G).canonical() == F
    assert lat.mixture(0.5, F, 0.5, F) == F
    two = lat.mixture(0.5, LatticeMeasure.point_mass(0.0), 0.5, LatticeMeasure.point_mass(1.0))
    pos, m = two.canonical().atoms()
    np.testing.assert_array_equal(pos, [0.0, 1.0])
    np.testing.assert_array_equal(m, [0.5, 0.5])


def test_mixture_rejects_misaligned_lattices():
    with pytest.raises(lat.LatticeError):
        lat.mixture(0.5, LatticeMeasure(0.0, 1.0, [1.0]), 0.5, LatticeMeasure(0.5, 1.0, [1.0]))


def test_restrict_examples():
    F = uniform10()
    assert lat.restrict(F, Window.le(10.0)) == F
    assert lat.restrict(LatticeMeasure.point_mass(5.0), Window.gt(5.0)).mass == 0.0
    R = lat.restrict(F, Window.gt(7.0)).canonical()
    np.testing.assert_array_equal(R.positions, [8.0, 9.0, 10.0])
    assert R.mass == pytest.approx(0.3, abs=1e-15)


def test_convolution_examples():
    F = uniform10()
    assert lat.convolve(F, LatticeMeasure.point_mass(0.0)) == F
    ab = lat.convolve(LatticeMeasure.point_mass(2.0), LatticeMeasure.point_mass(3.0)).canonical()
    assert ab == LatticeMeasure.point_mass(5.0)
    B = LatticeMeasure(0.0, 1.0, [0.5, 0.5])
    np.testing.assert_allclose(lat.convolve(B, B).masses, [0.25, 0.5, 0.25])


def test_conv_power_matches_repeated_convolution():
    B = LatticeMeasure(0.0, 1.0, [0.5, 0.5])
    np.testing.assert_allclose(lat.conv_power(B, 4).masses, np.array([1, 4, 6, 4, 1]) / 16)


def test_invalid_measures_rejected():
    with pytest.raises(ValueError):
        LatticeMeasure(0.0, 1.0, [0.5, -0.1])
    with pytest.raises(ValueError):
        LatticeMeasure(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        Window(2.0, 1.0)


def test_tail_vectorised():
    xs = np.array([-math.inf, 0.5, 7.0, 10.0])
    np.testing.assert_allclose(lat.tail(uniform10(), xs), [1.0, 1.0, 0.3, 0.0], atol=1e-15)
