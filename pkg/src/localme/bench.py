"""Exact benchmarks: an explicit spin bath and the powder-of-sympathy scenario.

The explicit bath is a set of free spins ``H_b = sum (w_i/2) Z_i`` coupled
through ``B = sum g_i X_i``.  In its Gibbs state spin ``i`` contributes
``g_i^2 (p_up e^{i w_i t} + p_down e^{-i w_i t})`` to the correlation function,
so the bath realises the spectral weights ``g_i^2 p_up`` at ``+w_i`` and
``g_i^2 p_down`` at ``-w_i``, which obey the thermal law exactly.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import bath as _bath
from . import master as _master
from .filtered import CouplingChannel, SpectralDecomposition, filter_factor
from .linalg import SX, SZ, dag, kron, pauli_string, partial_trace, site_operator

log = logging.getLogger(__name__)

MAX_DIM = 2 ** 12


class InsufficientBathError(ValueError):
    pass


@dataclass
class ExplicitBath:
    n_spins: int
    frequencies: np.ndarray
    couplings: np.ndarray
    beta: float
    residual: float = 0.0

    @property
    def dim(self):
        return 2 ** self.n_spins

    @property
    def H_b(self):
        return sum(site_operator(0.5 * w * SZ, i, self.n_spins)
                   for i, w in enumerate(self.frequencies))

    @property
    def B(self):
        return sum(site_operator(g * SX, i, self.n_spins)
                   for i, g in enumerate(self.couplings))

    def weights(self):
        """Spectral weights ``(w_plus, w_minus)`` at ``+w_i`` and ``-w_i``."""
        x = self.beta * self.frequencies / 2
        p_up = 0.5 * (1 - np.tanh(x))          # e^{-x} / (e^x + e^{-x})
        g2 = self.couplings ** 2
        return g2 * p_up, g2 * (1 - p_up)

    def correlation(self, t):
        t = np.asarray(t, dtype=float)
        wp, wm = self.weights()
        ph = np.exp(1j * np.multiply.outer(t, self.frequencies))
        return ph @ wp + ph.conj() @ wm

    def gibbs(self):
        out = np.array([1.0 + 0j])
        for w in self.frequencies:
            p = np.exp(-self.beta * w / 2 * np.array([1.0, -1.0]))
            out = np.kron(out, p / p.sum())
        return np.diag(out)


def _midpoint_bath(target, n_spins, spacing):
    w = (np.arange(n_spins) + 0.5) * spacing
    g2 = spacing * (_bath.spectral_density(target, w) + _bath.spectral_density(target, -w))
    return ExplicitBath(n_spins, w, np.sqrt(g2), target.beta)


def build_bath(target, n_spins=8, horizon=None, n_scan=281, check=True):
    """Explicit spin bath whose correlation function approximates ``target``.

    Frequencies sit on a midpoint grid ``w_i = (i + 1/2) dw`` with
    ``g_i^2 = dw (S(w_i) + S(-w_i))``.  A discrete bath correlation recurs
    near ``t = 2 pi / dw``, so ``dw`` is scanned and the value with the
    smallest ``residual = max |C_bath(t) - C(t)|`` over ``|t| <= horizon``
    (default three decay times) is kept.  With ``check`` a residual above
    ``0.2 |C(0)|`` raises :class:`InsufficientBathError`.
    """
    if not 4 <= n_spins <= 10:
        raise ValueError("n_spins must lie in [4, 10]")
    if horizon is None:
        horizon = 3 * _bath.decay_time(target)
    t = np.linspace(-horizon, horizon, 1201)
    c_target = _bath.correlation(target, t)
    best = None
    for dw in np.linspace(0.05, 0.75, n_scan) / target.t_b:
        bath = _midpoint_bath(target, n_spins, dw)
        res = float(np.max(np.abs(bath.correlation(t) - c_target)))
        if best is None or res < best.residual:
            bath.residual = res
            best = bath
    c0 = abs(_bath.correlation(target, 0.0))
    if check and best.residual > 0.2 * c0:
        raise InsufficientBathError(
            f"fit residual {best.residual:.3g} exceeds 0.2|C(0)| = {0.2 * c0:.3g}; "
            "use more spins")
    return best


@dataclass
class ExactRun:
    times: np.ndarray
    rhos: np.ndarray
    energy: np.ndarray = field(default=None)

    def element(self, i, j):
        return self.rhos[:, i, j]


def exact_evolve(h_s, a, bath, g_overall, rho0_s, T, dt, max_dim=MAX_DIM):
    """Reduced system dynamics of ``H_s + H_b + g A (x) B`` from ``rho0_s (x) rho_Gb``."""
    h_s = np.asarray(h_s, dtype=complex)
    ds = h_s.shape[0]
    if ds * bath.dim > max_dim:
        raise ValueError(f"total dimension {ds * bath.dim} exceeds {max_dim}")
    h = (kron(h_s, np.eye(bath.dim)) + kron(np.eye(ds), bath.H_b)
         + g_overall * kron(np.asarray(a, dtype=complex), bath.B))
    e, r = scipy.linalg.eigh(h)
    rho0 = kron(np.asarray(rho0_s, dtype=complex), bath.gibbs())
    rt = dag(r) @ rho0 @ r
    n = int(round(T / dt))
    times = np.arange(n + 1) * dt
    gaps = e[:, None] - e[None, :]
    out = np.empty((n + 1, ds, ds), dtype=complex)
    energy = np.empty(n + 1)
    for k, t in enumerate(times):
        full = r @ (rt * np.exp(-1j * gaps * t)) @ dag(r)
        out[k] = partial_trace(full, [ds, bath.dim], [0])
        energy[k] = np.einsum("ij,ji->", full, h).real
    return ExactRun(times, out, energy)


# --------------------------------------------------------------------------
# powder of sympathy

POWDER_MIXING = np.exp(-50.0)


@dataclass
class PowderReport:
    t_b: float
    T: float
    spin1_survival: float
    spin2_T1: float
    spin2_T1_golden: float
    spin1_secular_rate: float
    filtered_norm: float
    diverged: bool = False
    divergence: str = ""
    times: np.ndarray = field(default=None, repr=False)
    spin1: np.ndarray = field(default=None, repr=False)
    spin2: np.ndarray = field(default=None, repr=False)

    @property
    def spurious_rate(self):
        """Spin-1 relaxation rate seen by the local equation (inf if it blew up)."""
        if self.diverged:
            return float("inf")
        return max(0.0, 1.0 - self.spin1_survival) / self.T


def powder_hamiltonian(mixing=POWDER_MIXING):
    return (pauli_string("ZI", 100.0) + pauli_string("IZ", 1.0)
            + pauli_string("XX", mixing))


def _t1_fit(times, pop, fixed):
    # slope of log|p - p_inf| over the span where it is resolvable
    y = np.abs(pop - fixed)
    mask = y > 1e-9 * max(y[0], 1e-300)
    slope = np.polyfit(times[mask], np.log(y[mask]), 1)[0]
    return -1.0 / slope if slope < 0 else float("inf")


def powder_scenario(t_b=None, T=1000.0, dt=0.01, beta=1.0, coupling=0.01, sample_every=100):
    """Run the powder-of-sympathy check.

    Two spins, ``H = 100 Z_1 + Z_2 + e^{-50} X_1 X_2``, only spin 2 coupled
    (``A = coupling * X_2``).  Spin 1 starts excited and should stay so;
    spin 2 starts excited and relaxes.  The e^{-50} term is kept through a
    block-wise eigen-solver so the tiny spin-1 mixing is represented.
    """
    spec = _bath.BathSpec(beta, t_b)
    h = powder_hamiltonian()
    a = pauli_string("IX", coupling)
    ch = CouplingChannel(a, spec, "half_line")
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0                                    # |00>: both spins excited
    p1 = kron(np.diag([1.0, 0.0]), np.eye(2)).astype(complex)
    p2 = kron(np.eye(2), np.diag([1.0, 0.0])).astype(complex)

    sd = SpectralDecomposition.of(h)
    with np.errstate(over="ignore", invalid="ignore"):
        # narrow t_b puts weight exp(beta^2 / 16 t_b^2) far below zero frequency
        f = filter_factor(spec, sd.gaps, "half_line")
        ae = sd.to_eigen(a)
        fa = f * ae
        af_norm = float(np.linalg.norm(fa, 2)) if np.all(np.isfinite(fa)) else float("inf")
    # largest secular transition rate |A_nm|^2 2 Re f(E_nm) that flips spin 1
    rates = 2 * np.pi * _bath.spectral_density(spec, sd.gaps) * np.abs(ae) ** 2
    s1 = sd.to_eigen(p1).diagonal().real
    flips = np.abs(s1[:, None] - s1[None, :]) > 0.5
    spin1_rate = float(np.max(np.where(flips, rates, 0.0)))
    # spin 2 alone: gap 2, golden rule with both directions
    golden = coupling ** 2 * 2 * np.pi * (_bath.spectral_density(spec, 2.0)
                                          + _bath.spectral_density(spec, -2.0))
    report = PowderReport(spec.t_b, T, float("nan"), float("nan"), float(1 / golden),
                          spin1_rate, af_norm)
    cfg = _master.EvolutionConfig("local_me", dt, T, 0.3, 3, sample_every=sample_every)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            run = _master.evolve(cfg, h, [ch], rho0)
    except _master.EvolutionError as exc:
        report.diverged = True
        report.divergence = str(exc)
        return report
    pop1 = np.einsum("tij,ji->t", run.rhos, p1).real
    pop2 = np.einsum("tij,ji->t", run.rhos, p2).real
    report.spin1_survival = float(pop1[-1])
    report.times, report.spin1, report.spin2 = run.times, pop1, pop2
    p2_inf = np.exp(-beta) / (np.exp(-beta) + np.exp(beta))    # excited, thermal
    report.spin2_T1 = float(_t1_fit(run.times, pop2, p2_inf))
    return report
