import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from localme.bath import BathSpec, correlation, dawson_D, decay_time, spectral_density, t_cut
from localme.filtered import (CouplingChannel, SpectralDecomposition, filter_factor, filtered,
                              filtered_multi, heisenberg, truncated_filtered)
from localme.linalg import SX, SY, SZ, dag, pauli_string, site_operator

from conftest import random_hermitian


def test_spectral_decomposition_roundtrip():
    h = random_hermitian(np.random.default_rng(0), 5)
    sd = SpectralDecomposition.of(h)
    assert np.allclose(dag(sd.basis) @ sd.basis, np.eye(5), atol=1e-12)
    assert np.allclose(sd.hamiltonian(), h, atol=1e-11)
    assert np.allclose(sd.gaps, sd.energies[:, None] - sd.energies[None, :])
    x = random_hermitian(np.random.default_rng(1), 5)
    assert np.allclose(sd.from_eigen(sd.to_eigen(x)), x, atol=1e-12)
    assert np.allclose(sd.propagator(0.7), __import__("scipy.linalg").linalg.expm(-0.7j * h),
                       atol=1e-12)


def test_channel_validation():
    with pytest.raises(ValueError):
        CouplingChannel(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        CouplingChannel(SZ, mode="bogus")
    with pytest.raises(ValueError):
        CouplingChannel(SZ, mode="finite_window")


def test_heisenberg_examples():
    assert np.allclose(heisenberg(SZ, SX, 0.0), SZ)
    for t in (0.1, 0.8, 2.5):
        assert np.allclose(heisenberg(SZ, SX, t), np.cos(2 * t) * SZ + np.sin(2 * t) * SY,
                           atol=1e-13)


@given(st.integers(0, 2 ** 31 - 1), st.floats(-5, 5))
@settings(max_examples=20, deadline=None)
def test_heisenberg_preserves_hermiticity(seed, t):
    rng = np.random.default_rng(seed)
    h, a = random_hermitian(rng, 4), random_hermitian(rng, 4)
    x = heisenberg(a, h, t)
    assert np.max(np.abs(x - dag(x))) < 1e-12


def test_filter_zero_hamiltonian_is_scalar():
    s = BathSpec(1.0)
    c = integrate.quad(lambda t: correlation(s, t).real, 0, t_cut(s))[0] + 1j * integrate.quad(
        lambda t: correlation(s, t).imag, 0, t_cut(s))[0]
    af = filtered(CouplingChannel(SX, s), h=np.zeros((2, 2)))
    assert np.allclose(af, c * SX, atol=1e-10)


def test_filtered_norm_single_qubit(qubit_half):
    h, ch = qubit_half
    af = filtered(ch, h=h)
    # frozen: complete filter pi S + i D under the default normalisation
    assert np.isclose(np.sqrt(np.trace(af @ dag(af)).real), 0.704865855271224, rtol=1e-12)


def test_half_line_matches_time_quadrature(qubit_half):
    h, ch = qubit_half
    tc = t_cut(ch.bath)
    ref = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            def f(tau, part):
                v = correlation(ch.bath, tau) * heisenberg(ch.A, h, -tau)[i, j]
                return v.real if part == 0 else v.imag
            ref[i, j] = (integrate.quad(f, 0, tc, args=(0,), limit=200, epsabs=1e-12)[0]
                         + 1j * integrate.quad(f, 0, tc, args=(1,), limit=200, epsabs=1e-12)[0])
    assert np.max(np.abs(filtered(ch, h=h) - ref)) < 1e-6


def test_full_line_is_gibbs_preserving_real_part(qubit_full):
    h, ch = qubit_full
    sd = SpectralDecomposition.of(h)
    ae = sd.to_eigen(ch.A)
    expect = np.pi * spectral_density(ch.bath, sd.gaps) * ae
    assert np.allclose(sd.to_eigen(filtered(ch, h=h)), expect, atol=1e-14)
    half = filtered(ch.with_mode("half_line"), h=h)
    assert np.allclose(sd.to_eigen(filtered(ch, h=h)), np.pi * spectral_density(
        ch.bath, sd.gaps) * sd.to_eigen(ch.A))
    assert not np.allclose(half, filtered(ch, h=h))


def test_full_line_at_infinite_temperature_is_half_of_A():
    # pi S(0) = 1/2 under N = 1/(2 pi)
    ch = CouplingChannel(SX, BathSpec(0.0), "full_line")
    assert np.allclose(filtered(ch, h=np.zeros((2, 2))), 0.5 * SX, atol=1e-15)


def test_adjoint_flips_energy(qubit_half):
    h, ch = qubit_half
    sd = SpectralDecomposition.of(h)
    af_dag = sd.to_eigen(dag(filtered(ch, h=h)))
    ae = sd.to_eigen(ch.A)
    g = sd.gaps.T                                       # E_nm for element (m, n)
    expect = ae * (np.pi * spectral_density(ch.bath, g) - 1j * dawson_D(ch.bath, g))
    assert np.allclose(af_dag, expect, atol=1e-13)


def test_linearity():
    rng = np.random.default_rng(4)
    h, a1, a2 = (random_hermitian(rng, 3) for _ in range(3))
    s = BathSpec(0.7)
    f = lambda a: filtered(CouplingChannel(a, s), h=h)
    assert np.allclose(f(2.5 * a1 + a2), 2.5 * f(a1) + f(a2), atol=1e-12)


def test_finite_window_converges_to_half_line(qubit_half):
    h, ch = qubit_half
    win = filtered(ch.with_mode("finite_window", 10 * decay_time(ch.bath)), h=h)
    assert np.max(np.abs(win - filtered(ch, h=h))) < 1e-8
    zero = filtered(ch.with_mode("finite_window", 0.0), h=h)
    assert np.allclose(zero, 0)


def test_filter_factor_degenerate_gap_uses_zero_frequency():
    s = BathSpec(1.0)
    f = filter_factor(s, np.zeros((2, 2)))
    assert np.allclose(f, np.pi * spectral_density(s, 0.0) + 1j * dawson_D(s, 0.0))


def _chain(n):
    h = sum(pauli_string("".join("Z" if k in (i, i + 1) else "I" for k in range(n)), 0.4)
            for i in range(n - 1))
    return h + sum(site_operator(SX, i, n) for i in range(n))


def test_filtered_multi_independent_and_radius():
    n = 3
    h = _chain(n)
    ops = [site_operator(SZ, i, n) for i in range(n)]
    s = BathSpec(1.0)
    all_pairs = {(i, j): s for i in range(n) for j in range(n)}
    diag = {(i, i): s for i in range(n)}
    out = filtered_multi(ops, diag, h)
    assert set(out) == {(0, 0), (1, 1), (2, 2)}
    assert np.allclose(out[(1, 1)], filtered(CouplingChannel(ops[1], s), h=h))
    assert len(filtered_multi(ops, all_pairs, h, radius=1, sites=[0, 1, 2])) == 3
    full = filtered_multi(ops, all_pairs, h)
    capped = filtered_multi(ops, all_pairs, h, radius=n, sites=[0, 1, 2])
    assert full.keys() == capped.keys()
    assert all(np.array_equal(full[k], capped[k]) for k in full)
    assert len(filtered_multi(ops, all_pairs, h, independent=True)) == n
    with pytest.raises(ValueError):
        filtered_multi(ops, all_pairs, h, radius=1)


def test_truncated_filtered_full_block_is_exact():
    n = 3
    h = _chain(n)
    ch = CouplingChannel(site_operator(SZ, 1, n), BathSpec(1.0))
    af_c, eps = truncated_filtered(ch, h, n, [0, 1, 2], [1])
    assert np.allclose(af_c, filtered(ch, h=h), atol=1e-12)
    assert np.isfinite(eps)


def test_truncated_filtered_bound_holds():
    n = 4
    h = _chain(n)
    ch = CouplingChannel(site_operator(SZ, 1, n), BathSpec(1.0))
    af_c, eps = truncated_filtered(ch, h, n, [1, 2], [1])
    err = np.linalg.norm(af_c - filtered(ch, h=h), 2)
    assert err <= eps


def test_truncated_filtered_x_scaling():
    n = 4
    h = _chain(n)
    ch = CouplingChannel(site_operator(SZ, 1, n), BathSpec(1.0))
    # block of 4 with support 1 and v = 1: T_x = 1.5 - x; vary x at fixed T_x by moving v
    _, e_small = truncated_filtered(ch, h, n, [0, 1, 2, 3], [1], v=1.0, x=0.0, c=1.0)
    _, e_zero_c = truncated_filtered(ch, h, n, [0, 1, 2, 3], [1], v=1.0, x=0.0, c=50.0)
    assert e_zero_c <= e_small
    with pytest.raises(ValueError):
        truncated_filtered(ch, h, n, [2, 3], [1])
