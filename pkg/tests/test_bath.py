import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import dawsn

from localme.bath import (BathSpec, QuadratureError, correlation, d_zero, dawson_D,
                          dawson_D_prime, decay_time, spectral_density, t_cut)

# independent mpmath values for beta = 1, t_b = 0.25, N = 1/(2 pi)
D_REF = {0.0: -0.825212879398771, 1.0: -0.760413437295803, -2.0: -0.650926797344256}
C0_REF = 3.06725258552748
C03_REF = 0.775427300949820 - 1.99451658997911j


def test_defaults():
    s = BathSpec(1.0)
    assert s.t_b == 0.25 and np.isclose(s.norm, 1 / (2 * np.pi))
    assert BathSpec(0.0).t_b == 0.25
    assert BathSpec(2.0).t_b == 0.5
    with pytest.raises(ValueError):
        BathSpec(-1.0)
    with pytest.raises(ValueError):
        BathSpec(1.0, t_b=0.0)


def test_spectral_density_examples():
    assert spectral_density(BathSpec(1.0, 0.25, 1.0), 0.0) == 1.0
    s = BathSpec(1.0)
    assert np.isclose(spectral_density(s, 1.0) / spectral_density(s, -1.0), np.exp(-1.0),
                      rtol=1e-14)
    s0 = BathSpec(0.0)
    for w in (0.3, 1.7):
        assert spectral_density(s0, w) == spectral_density(s0, -w)


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 3.0])
def test_kms_law_random_frequencies(beta):
    s = BathSpec(beta)
    w = np.random.default_rng(7).uniform(-8 / s.t_b, 8 / s.t_b, 200)
    lhs = spectral_density(s, w) * np.exp(beta * w)
    assert np.allclose(lhs, spectral_density(s, -w), rtol=1e-12, atol=0)


def test_correlation_frozen_values():
    s = BathSpec(1.0)
    assert np.isclose(correlation(s, 0.0), C0_REF, rtol=1e-13)
    assert np.isclose(correlation(s, 0.3), C03_REF, rtol=1e-13)
    amp = s.norm * np.sqrt(np.pi) / s.t_b * np.exp(s.beta ** 2 / (16 * s.t_b ** 2))
    assert np.isclose(abs(correlation(s, 0.0)), amp, rtol=1e-14)


def test_correlation_real_at_infinite_temperature():
    t = np.linspace(-3, 3, 61)
    assert np.all(correlation(BathSpec(0.0), t).imag == 0)


def test_correlation_hermitian_in_time():
    s = BathSpec(1.3)
    t = np.random.default_rng(1).uniform(-5, 5, 100)
    assert np.allclose(correlation(s, -t), np.conj(correlation(s, t)), rtol=1e-14)


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
def test_correlation_matches_fourier_quadrature(beta):
    s = BathSpec(beta)
    w = np.linspace(-40 / s.t_b, 40 / s.t_b, 40001)
    sw = spectral_density(s, w)
    for t in np.linspace(-5 * decay_time(s), 5 * decay_time(s), 11):
        quad = np.trapezoid(sw * np.exp(1j * w * t), w)
        assert abs(quad - correlation(s, t)) < 1e-8


def test_dawson_D_frozen_and_pv_quadrature():
    s = BathSpec(1.0)
    for e, ref in D_REF.items():
        assert np.isclose(dawson_D(s, e), ref, rtol=1e-12)
    # symmetric-excision p.v.: int (S(E+u) - S(E-u)) / u du
    for e in (0.0, 1 / s.t_b, -1 / s.t_b):
        val = integrate.quad(lambda u: (spectral_density(s, e + u) - spectral_density(s, e - u)) / u,
                             0, 60 / s.t_b, limit=400)[0]
        assert abs(val - dawson_D(s, e)) < 1e-6


def test_dawson_D_infinite_temperature():
    s = BathSpec(0.0, 1.0, 1.0)
    assert dawson_D(s, 0.0) == 0.0
    e = np.array([0.2, 1.1, 4.0])
    assert np.allclose(dawson_D(s, e), -dawson_D(s, -e), rtol=1e-15)


def test_dawson_D_prime_matches_finite_difference():
    s = BathSpec(1.0)
    e, h = np.array([-2.0, 0.0, 0.7, 3.0]), 1e-5
    fd = (dawson_D(s, e + h) - dawson_D(s, e - h)) / (2 * h)
    assert np.allclose(dawson_D_prime(s, e), fd, rtol=1e-7)


def test_scipy_dawson_accuracy():
    mp.mp.dps = 30
    for x in (-30.0, -4.0, -0.3, 0.0, 1e-3, 3.9, 4.1, 12.0, 30.0):
        ref = float(mp.sqrt(mp.pi) / 2 * mp.exp(-x * x) * mp.erfi(x))
        assert abs(dawsn(x) - ref) <= 1e-10 * max(abs(ref), 1e-300) + 1e-300


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 2.0])
def test_d_zero_matches_dawson(beta):
    s = BathSpec(beta)
    assert abs(d_zero(s) - dawson_D(s, 0.0)) < 1e-6


def test_d_zero_examples():
    assert d_zero(BathSpec(0.0)) == 0.0
    a, b = BathSpec(1.0, 0.25, 1.0), BathSpec(1.0, 0.25, 2.0)
    assert np.isclose(d_zero(b), 2 * d_zero(a), rtol=1e-10)
    assert np.isclose(d_zero(a), dawson_D(a, 0.0), rtol=1e-9)


def test_d_zero_rejects_tiny_cutoff(monkeypatch):
    import localme.bath as bath
    monkeypatch.setattr(bath, "t_cut", lambda spec, rel=1e-12: 0.1 * spec.t_b)
    with pytest.raises(QuadratureError):
        bath.d_zero(BathSpec(1.0))


def test_t_cut():
    s = BathSpec(1.0)
    tc = t_cut(s)
    assert np.isclose(abs(correlation(s, tc)) / abs(correlation(s, 0.0)), 1e-12, rtol=1e-8)


def test_decay_time_examples():
    sigma = np.e / np.pi
    s = BathSpec(0.0, t_b=1 / np.sqrt(sigma))
    assert np.isclose(decay_time(s), np.sqrt(2 / sigma), rtol=1e-14)
    assert np.isclose(decay_time(BathSpec(4.0, 1.0)), np.sqrt(2 * np.log(np.pi) + 16), rtol=1e-14)
    assert abs(decay_time(BathSpec(100.0, 1.0)) / 100 - 1) < 0.01
    assert np.isclose(decay_time(BathSpec(1.0)), 1.2205182612362455, rtol=1e-14)


@given(st.floats(0.0, 5.0), st.floats(0.05, 3.0), st.floats(-20, 20))
@settings(max_examples=60, deadline=None)
def test_kms_property(beta, tb, w):
    s = BathSpec(beta, tb)
    a, b = spectral_density(s, w), spectral_density(s, -w) * np.exp(-beta * w)
    assert np.isclose(a, b, rtol=1e-12, atol=0) or (a == 0 and b == 0)
