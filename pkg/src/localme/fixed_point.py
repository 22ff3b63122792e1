"""Fixed points: isolated Gibbs state, its O(A^2) correction, reduced total Gibbs state.

With ``rho_G = exp(-beta H)/Z`` and eigen-energies ``E_k`` the stationary
state of the half-line equation is ``rho_G + drho + O(A^4)`` where the
off-diagonal part of ``drho`` solves ``i[H, drho] = D(rho_G)`` (``D`` the
dissipator) and the diagonal part is fixed one order later by the
population-sector rates.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import bath as _bath
from . import master as _master
from .filtered import SpectralDecomposition
from .linalg import ConditioningWarning, as_operator, dag, is_hermitian, kron, partial_trace


class DegenerateSpectrumError(ValueError):
    """The perturbative formulas assume a non-degenerate spectrum."""


class ReducibleDynamicsError(RuntimeError):
    """Population rates have more than one stationary vector."""


@dataclass
class FixedPointReport:
    gibbs: np.ndarray
    delta_rho_offdiag: np.ndarray
    delta_rho_diag: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def corrected(self):
        return self.gibbs + self.delta_rho_offdiag + self.delta_rho_diag


def gibbs_state(h, beta):
    h = as_operator(h)
    if not is_hermitian(h, 1e-10):
        raise ValueError("Hamiltonian must be Hermitian")
    sd = SpectralDecomposition.of(h)
    w = np.exp(-beta * (sd.energies - sd.energies.min()))
    return sd.from_eigen(np.diag(w / w.sum()).astype(complex))


def stationarity_residual(rho, rhs_builder):
    """Max-norm of ``rhs_builder(rho)``."""
    return float(np.max(np.abs(rhs_builder(np.asarray(rho, dtype=complex)))))


def stationary_state(L, dim):
    """Unit-trace kernel vector of a row-major Liouvillian matrix."""
    w, v = np.linalg.eig(L)
    k = int(np.argmin(np.abs(w)))
    rho = v[:, k].reshape(dim, dim)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + dag(rho))


def _check_gaps(sd, gap_tol):
    g = np.abs(sd.gaps)
    off = ~np.eye(sd.dim, dtype=bool)
    if np.any(g[off] < gap_tol):
        raise DegenerateSpectrumError(
            f"spectrum has degenerate levels (gap < {gap_tol:g}); perturbative "
            "fixed-point formulas need a non-degenerate Hamiltonian")


def _averaging_factor(gaps, tprime, avg_points):
    m = (avg_points - 1) // 2
    return sum(np.exp(1j * gaps * k * tprime) for k in range(-m, m + 1)) / avg_points


def perturbative_correction(h, ch, beta=None, gap_tol=1e-9, pole_tol=None, tprime=0.0,
                            avg_points=1):
    """Off-diagonal O(A^2) shift of the stationary state away from Gibbs.

    Returned in the computational basis.  ``tprime``/``avg_points`` select the
    time-averaged equation (each element picks up the mean of
    ``exp(i E_nm t_k)`` over the shifts).  Gaps below ``pole_tol`` (default
    ``1e-6 |H|``) use the analytic ``E_nm -> 0`` limit.
    """
    h = as_operator(h)
    spec = ch.bath
    beta = spec.beta if beta is None else beta
    sd = SpectralDecomposition.of(h)
    _check_gaps(sd, gap_tol)
    if pole_tol is None:
        pole_tol = 1e-6 * max(np.linalg.norm(h, 2), 1e-300)
    e = sd.energies
    a = sd.to_eigen(ch.A)
    boltz = np.exp(-beta * (e - e.min()))
    z = boltz.sum()
    g = sd.gaps                                 # g[n, k] = E_n - E_k
    dg = _bath.dawson_D(spec, g)                # D(E_nk)
    dp = _bath.dawson_D_prime(spec, g)
    d = sd.dim
    out = np.zeros((d, d), dtype=complex)
    for n in range(d):
        for m in range(d):
            if n == m:
                continue
            prod = a[n, :] * a[:, m]            # A_nk A_km
            if abs(g[n, m]) >= pole_tol:
                num = (boltz * (dg[n] - dg[m]) - boltz[m] * dg[:, m] + boltz[n] * dg[:, n])
                out[n, m] = np.sum(prod * num) / (z * g[n, m])
            else:
                warnings.warn(f"gap E_{n}{m} = {g[n, m]:.2e} below pole_tol; using the "
                              "analytic limit", ConditioningWarning, stacklevel=2)
                num = (boltz * dp[n] - beta * boltz[n] * dg[:, n] - boltz[n] * dp[:, n])
                out[n, m] = np.sum(prod * num) / z
    out *= _averaging_factor(g, tprime, avg_points)
    # the limit branch is Hermitian only up to O(E_nm)
    return sd.from_eigen(0.5 * (out + dag(out)))


def _dissipator_matrix(h, ch, tprime, avg_points):
    terms = _master.coupling_terms(h, [ch], tprime, avg_points)
    return _master.superoperator(np.zeros_like(h), terms)


def second_order_diagonal(h, ch, beta=None, delta_offdiag=None, tprime=0.0, avg_points=1,
                          zero_tol=1e-10):
    """Diagonal correction fixed by the population rates.

    Solves ``M x = -diag(D(drho_off))`` where ``M_nk = D(|k><k|)_nn`` is the
    population-sector generator, on the complement of its Gibbs zero mode,
    and returns the traceless diagonal operator ``x``.
    """
    h = as_operator(h)
    beta = ch.bath.beta if beta is None else beta
    sd = SpectralDecomposition.of(h)
    d = sd.dim
    if delta_offdiag is None:
        delta_offdiag = perturbative_correction(h, ch, beta, tprime=tprime, avg_points=avg_points)
    dis = _dissipator_matrix(h, ch, tprime, avg_points)
    basis = sd.basis
    pops = np.zeros((d, d))
    for k in range(d):
        proj = np.outer(basis[:, k], basis[:, k].conj())
        out = (dis @ proj.reshape(-1)).reshape(d, d)
        pops[:, k] = np.diag(sd.to_eigen(out)).real
    sv = np.linalg.svd(pops, compute_uv=False)
    scale = max(sv[0], 1e-300)
    if np.count_nonzero(sv < zero_tol * scale) > 1:
        raise ReducibleDynamicsError("population rates have a degenerate zero mode")
    src = (dis @ np.asarray(delta_offdiag, dtype=complex).reshape(-1)).reshape(d, d)
    rhs = -np.diag(sd.to_eigen(src)).real
    x = np.linalg.lstsq(pops, rhs, rcond=zero_tol)[0]
    x -= _zero_mode_component(pops, x)
    return sd.from_eigen(np.diag(x).astype(complex))


def _zero_mode_component(pops, x):
    # remove the stationary (Gibbs-population) direction so that sum(x) = 0
    w, v = np.linalg.eig(pops)
    p = v[:, int(np.argmin(np.abs(w)))].real
    p = p / p.sum()
    return x.sum() * p


def fixed_point_report(h, ch, beta=None, tprime=0.0, avg_points=1):
    h = as_operator(h)
    beta = ch.bath.beta if beta is None else beta
    g = gibbs_state(h, beta)
    off = perturbative_correction(h, ch, beta, tprime=tprime, avg_points=avg_points)
    diag = second_order_diagonal(h, ch, beta, off, tprime, avg_points)
    terms = _master.coupling_terms(h, [ch], tprime, avg_points)
    L = _master.superoperator(h, terms)
    steady = stationary_state(L, h.shape[0])
    full = _master.coupling_terms(h, [ch], tprime, avg_points, "full_line")
    davies = _master._davies_terms(h, [ch])
    res = {
        "half_line_at_gibbs": stationarity_residual(
            g, lambda r: -1j * (h @ r - r @ h) + _master.dissipator(r, terms)),
        "full_line_at_gibbs": stationarity_residual(
            g, lambda r: -1j * (h @ r - r @ h) + _master.dissipator(r, full)),
        "davies_at_gibbs": stationarity_residual(
            g, lambda r: -1j * (h @ r - r @ h) + _master.davies_dissipator(r, davies)),
        "steady_vs_gibbs": float(np.max(np.abs(steady - g))),
        "steady_vs_corrected": float(np.max(np.abs(steady - (g + off + diag)))),
    }
    return FixedPointReport(g, off, diag, res)


def reduced_gibbs(h_s, a, h_b, b, g, beta, max_dim=2 ** 12):
    """``tr_b exp(-beta (H_s + H_b + g A (x) B)) / Z`` by dense exponentiation."""
    h_s, a, h_b, b = map(as_operator, (h_s, a, h_b, b))
    ds, db = h_s.shape[0], h_b.shape[0]
    if ds * db > max_dim:
        raise ValueError(f"total dimension {ds * db} exceeds {max_dim}")
    eye_s, eye_b = np.eye(ds), np.eye(db)
    h = kron(h_s, eye_b) + kron(eye_s, h_b) + g * kron(a, b)
    w, v = scipy.linalg.eigh(h)
    p = np.exp(-beta * (w - w.min()))
    rho = (v * (p / p.sum())) @ dag(v)
    red = partial_trace(rho, [ds, db], [0])
    return 0.5 * (red + dag(red))


def coupling_exponent(gs, deviations):
    """Least-squares slope of log(deviation) against log(g)."""
    return float(np.polyfit(np.log(gs), np.log(deviations), 1)[0])
