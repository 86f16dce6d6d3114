"""Twisted trigonometric coefficients: algebra, calculus, and resonance guards."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geodesicnf import KERNEL_BACKEND
from geodesicnf.fourier import PeriodicCoefficient, ResonanceError, real_band_limited

L = 2.0 * np.pi
SAMPLES = np.linspace(0.0, 2.0 * L, 17)


def _dict_strategy(max_freq: int = 3):
    amp = st.complex_numbers(max_magnitude=3.0, allow_nan=False,
                             allow_infinity=False)
    return st.dictionaries(st.integers(-max_freq, max_freq), amp, max_size=5)


def test_backend_is_reported():
    assert KERNEL_BACKEND in {"cython", "numpy"}


def test_from_dict_round_trip():
    modes = {-2: 1.0 - 0.5j, 0: 0.25, 3: 2.0j}
    pc = PeriodicCoefficient.from_dict(modes, L)
    assert pc.fourier == modes
    assert pc.bandwidth() == 3


def test_from_function_recovers_band_limited_modes():
    modes = {-1: 0.3 + 0.1j, 0: -1.0, 2: 0.7j}
    target = PeriodicCoefficient.from_dict(modes, L)
    sampled = PeriodicCoefficient.from_function(lambda s: target(s), L,
                                                bandwidth=4)
    assert (sampled - target).max_abs() < 1e-12


def test_evaluation_matches_fourier_sum():
    modes = {-2: 0.5j, 1: 1.0, 4: -0.25}
    pc = PeriodicCoefficient.from_dict(modes, L)
    direct = sum(a * np.exp(2j * np.pi * f * SAMPLES / L)
                 for f, a in modes.items())
    assert np.max(np.abs(pc(SAMPLES) - direct)) < 1e-13


@settings(deadline=None, max_examples=60)
@given(_dict_strategy(), _dict_strategy())
def test_product_is_pointwise_multiplication(da, db):
    a = PeriodicCoefficient.from_dict(da, L)
    b = PeriodicCoefficient.from_dict(db, L)
    prod = a * b
    assert np.max(np.abs(prod(SAMPLES) - a(SAMPLES) * b(SAMPLES))) < 1e-9


@settings(deadline=None, max_examples=40)
@given(_dict_strategy(), _dict_strategy(), _dict_strategy())
def test_product_is_associative_and_distributive(da, db, dc):
    a = PeriodicCoefficient.from_dict(da, L)
    b = PeriodicCoefficient.from_dict(db, L)
    c = PeriodicCoefficient.from_dict(dc, L)
    assert ((a * b) * c - a * (b * c)).max_abs() < 1e-8
    assert (a * (b + c) - (a * b + a * c)).max_abs() < 1e-8


def test_conjugate_is_pointwise_conjugation():
    pc = PeriodicCoefficient.from_dict({-1: 1.0 + 2.0j, 2: -0.5j}, L)
    assert np.max(np.abs(pc.conjugate()(SAMPLES) - np.conj(pc(SAMPLES)))) < 1e-13


def test_twisted_values_are_quasi_periodic():
    theta = 0.77
    pc = PeriodicCoefficient.from_dict({0: 1.0, 1: 0.5j}, L, twist_angle=theta)
    assert pc.quasi_periodicity_defect() < 1e-12
    assert np.allclose(pc(SAMPLES + L), np.exp(1j * theta) * pc(SAMPLES))


def test_derivative_by_finite_differences():
    pc = PeriodicCoefficient.from_dict({1: 1.0, -3: 0.5j}, L, twist_angle=1.3)
    h = 1e-6
    fd = (pc(SAMPLES + h) - pc(SAMPLES - h)) / (2 * h)
    assert np.max(np.abs(pc.derivative()(SAMPLES) - fd)) < 1e-7


def test_mean_matches_quadrature():
    pc = PeriodicCoefficient.from_dict({0: 0.3, 1: 1.0 - 1.0j}, L,
                                       twist_angle=0.9)
    s = np.linspace(0.0, L, 20001)
    quad = np.trapezoid(pc(s), s) / L
    assert abs(pc.mean() - quad) < 1e-8


@pytest.mark.parametrize("theta", [0.0, 2.1])
def test_twisted_antiderivative_inverts_derivative(theta):
    modes = {1: 1.0 - 0.3j, -2: 0.6j} if theta == 0.0 else {0: 1.0, 2: -0.4}
    pc = PeriodicCoefficient.from_dict(modes, L, twist_angle=theta)
    anti = pc.antiderivative_twisted(resonance_tol=1e-8)
    assert (anti.derivative() - pc).max_abs() < 1e-12


def test_untwisted_nonzero_mean_is_not_integrable():
    pc = PeriodicCoefficient.from_dict({0: 1.0, 1: 0.5}, L)
    with pytest.raises(ValueError):
        pc.antiderivative_twisted(resonance_tol=1e-8)


def test_near_resonant_twist_raises():
    pc = PeriodicCoefficient.from_dict({0: 1.0}, L, twist_angle=1e-4)
    with pytest.raises(ResonanceError):
        pc.antiderivative_twisted(resonance_tol=1e-3)


def test_real_band_limited_is_real(rng):
    pc = real_band_limited(rng, L, base=2.0, amplitude=0.3, max_freq=4)
    assert pc.is_real_function()
    assert np.max(np.abs(pc(SAMPLES).imag)) < 1e-12
