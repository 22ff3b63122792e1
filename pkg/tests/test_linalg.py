import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localme.linalg import (SX, SY, SZ, ConditioningWarning, as_operator, commutator, dag,
                            devectorize, eig_general, eig_hermitian, is_hermitian, kron,
                            partial_trace, pauli_string, site_operator, vectorize)

from conftest import random_hermitian


def test_pauli_algebra():
    assert np.allclose(SX @ SY, 1j * SZ)
    assert np.allclose(commutator(SX, SY), 2j * SZ)
    assert np.allclose(pauli_string("XZ", 2.0), 2.0 * np.kron(SX, SZ))
    with pytest.raises(ValueError):
        pauli_string("XQ")


def test_site_operator_places_factor():
    op = site_operator(SZ, 1, 3)
    assert np.allclose(op, kron(np.eye(2), SZ, np.eye(2)))


def test_as_operator_rejects_non_square():
    with pytest.raises(ValueError):
        as_operator(np.zeros((2, 3)))


@given(st.integers(1, 4), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_vectorize_roundtrip_and_sandwich(d, seed):
    rng = np.random.default_rng(seed)
    x, y, r = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3))
    assert np.array_equal(devectorize(vectorize(r), d), r)
    # row-major identity vec(X R Y) = (X kron Y^T) vec(R)
    assert np.allclose(vectorize(x @ r @ y), np.kron(x, y.T) @ vectorize(r), atol=1e-12)


def test_devectorize_checks_length():
    with pytest.raises(ValueError):
        devectorize(np.zeros(5), 2)


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_partial_trace_matches_basis_sum(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    e = np.eye(2)
    oracle_a = sum(np.kron(np.eye(2), e[k]) @ m @ np.kron(np.eye(2), e[k]).T for k in range(2))
    oracle_b = sum(np.kron(e[k], np.eye(2)) @ m @ np.kron(e[k], np.eye(2)).T for k in range(2))
    assert np.allclose(partial_trace(m, [2, 2], [0]), oracle_a, atol=1e-14)
    assert np.allclose(partial_trace(m, [2, 2], [1]), oracle_b, atol=1e-14)


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(3)
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 3)
    full = np.kron(a, b)
    assert np.allclose(partial_trace(full, [2, 3], [0]), a * np.trace(b), atol=1e-13)
    assert np.allclose(partial_trace(full, [2, 3], [1]), b * np.trace(a), atol=1e-13)
    assert np.isclose(partial_trace(full, [2, 3], []).item(), np.trace(full))


def test_partial_trace_validates():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), [2, 3], [0])
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), [2, 2], [2])


def test_eig_hermitian_resolves_tiny_mixing():
    eps = np.exp(-50.0)
    h = pauli_string("ZI", 100.0) + pauli_string("IZ", 1.0) + pauli_string("XX", eps)
    w, v = eig_hermitian(h)
    assert np.allclose(dag(v) @ v, np.eye(4), atol=1e-14)
    assert np.allclose(v @ np.diag(w) @ dag(v), h, atol=1e-12)
    # the off-diagonal amplitude ~ eps / gap survives rather than rounding to 0
    amp = np.sort(np.abs(v[np.abs(v) > 0].ravel()))[0]
    assert 0 < amp < 1e-20


@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_eig_hermitian_dense(d, seed):
    h = random_hermitian(np.random.default_rng(seed), d)
    w, v = eig_hermitian(h)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v @ np.diag(w) @ dag(v), h, atol=1e-10)
    assert is_hermitian(h)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_eig_general_warns_on_defective():
    m = np.array([[1.0, 1.0], [0.0, 1.0]])
    m[1, 0] = 1e-30
    with pytest.warns(ConditioningWarning):
        eig_general(m, rtol=1e-20)
