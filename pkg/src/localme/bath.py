"""Thermal Gaussian bath: spectral density, correlation function, Lamb-shift kernel.

Conventions::

    S(w) = N exp(-(w t_b)^2 - beta w / 2)
    C(t) = int S(w) exp(i w t) dw            (no 1/2pi)
    D(E) = p.v. int S(w) / (w - E) dw

so that ``int_0^inf C(t) exp(-i E t) dt = pi S(E) + i D(E)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import dawsn


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class BathSpec:
    """Gaussian bath at inverse temperature ``beta``.

    ``t_b`` defaults to ``beta / 4`` (0.25 at infinite temperature) and the
    normalisation to ``1 / (2 pi)``, the value at which the two-sided
    integral of ``C`` has unit weight at zero frequency.
    """

    beta: float = 1.0
    t_b: float | None = None
    norm: float | None = None

    def __post_init__(self):
        if self.t_b is None:
            object.__setattr__(self, "t_b", self.beta / 4 if self.beta > 0 else 0.25)
        if self.norm is None:
            object.__setattr__(self, "norm", 1.0 / (2 * np.pi))
        if self.beta < 0 or self.t_b <= 0 or self.norm <= 0:
            raise ValueError(f"invalid bath parameters {self}")

    @property
    def shift(self):
        # beta / (4 t_b): centre offset of S in units of 1/t_b
        return self.beta / (4 * self.t_b)


def spectral_density(spec, omega):
    omega = np.asarray(omega, dtype=float)
    return spec.norm * np.exp(-(omega * spec.t_b) ** 2 - spec.beta * omega / 2)


def correlation(spec, t):
    t = np.asarray(t, dtype=float)
    tb2 = spec.t_b ** 2
    return (spec.norm * np.sqrt(np.pi) / spec.t_b
            * np.exp((spec.beta ** 2 / 4 - t ** 2 - 1j * spec.beta * t) / (4 * tb2)))


def dawson_D(spec, energy):
    """Principal-value Hilbert transform of the spectral density."""
    e = np.asarray(energy, dtype=float)
    x = e * spec.t_b + spec.shift
    return -2 * np.sqrt(np.pi) * spec.norm * np.exp(spec.shift ** 2) * dawsn(x)


def dawson_D_prime(spec, energy):
    """dD/dE, using F'(x) = 1 - 2 x F(x)."""
    e = np.asarray(energy, dtype=float)
    x = e * spec.t_b + spec.shift
    dfdx = 1 - 2 * x * dawsn(x)
    return -2 * np.sqrt(np.pi) * spec.norm * np.exp(spec.shift ** 2) * dfdx * spec.t_b


def t_cut(spec, rel=1e-12):
    """Time beyond which |C(t)| < rel * |C(0)|."""
    return 2 * spec.t_b * np.sqrt(-np.log(rel))


def d_zero(spec, tail_tol=1e-10):
    """-(i/2) int sgn(t) C(t) dt by direct quadrature (real-valued)."""
    tc = t_cut(spec)
    if abs(correlation(spec, tc)) > tail_tol * max(1.0, abs(correlation(spec, 0.0))):
        raise QuadratureError("correlation tail not negligible at cutoff")
    # sgn(t) C(t) + sgn(-t) C(-t) = C(t) - C(t)^* = 2i Im C(t) for t > 0
    val, err = integrate.quad(lambda t: float(correlation(spec, t).imag), 0, tc,
                              limit=400, epsabs=1e-13, epsrel=1e-12)
    if err > 1e-9:
        raise QuadratureError(f"d_zero quadrature error estimate {err:.2e}")
    return float((-0.5j * 2j * val).real)


def decay_time(spec):
    sigma = 1.0 / spec.t_b ** 2
    log_term = max(0.0, 2 * np.log(np.pi * sigma) / sigma)
    return float(np.sqrt(log_term + spec.beta ** 2))
