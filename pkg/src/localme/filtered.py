"""Filtered coupling operators.

The filtered operator of a Hermitian coupling ``A`` is the bath-weighted
history of its Heisenberg trajectory,

    A^f = int_0^inf C(tau) A(-tau) dtau,    A(t) = exp(iHt) A exp(-iHt),

which in the eigenbasis of ``H`` reads ``A^f_mn = A_mn (pi S(E_mn) + i D(E_mn))``
with ``E_mn = E_m - E_n``.  Three variants are built here:

``half_line``      the expression above;
``full_line``      the principal-value part removed, ``A_mn pi S(E_mn)``; this is
                   the Gibbs-preserving filter (half the two-sided integral);
``finite_window``  ``int_0^t`` instead of ``int_0^inf``, used while a bath is
                   being switched on.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, roots_legendre

from . import bath as _bath
from .linalg import as_operator, dag, eig_hermitian, is_hermitian, kron, partial_trace

MODES = ("half_line", "full_line", "finite_window")


@dataclass(frozen=True)
class SpectralDecomposition:
    energies: np.ndarray
    basis: np.ndarray

    @classmethod
    def of(cls, h):
        if isinstance(h, cls):
            return h
        e, u = eig_hermitian(as_operator(h))
        return cls(e, u)

    @property
    def gaps(self):
        """``gaps[m, n] = E_m - E_n``."""
        return self.energies[:, None] - self.energies[None, :]

    @property
    def dim(self):
        return self.energies.size

    def to_eigen(self, op):
        return dag(self.basis) @ op @ self.basis

    def from_eigen(self, op):
        return self.basis @ op @ dag(self.basis)

    def hamiltonian(self):
        return self.from_eigen(np.diag(self.energies).astype(complex))

    def propagator(self, t):
        """exp(-iHt)."""
        return self.basis @ (np.exp(-1j * self.energies * t)[:, None] * dag(self.basis))


@dataclass(frozen=True)
class CouplingChannel:
    """One system operator ``A`` coupled to its own Gaussian bath."""

    A: np.ndarray
    bath: _bath.BathSpec = field(default_factory=_bath.BathSpec)
    mode: str = "half_line"
    window: float | None = None
    site: int | None = None

    def __post_init__(self):
        a = as_operator(self.A)
        if not is_hermitian(a):
            raise ValueError("coupling operator must be Hermitian")
        object.__setattr__(self, "A", a)
        if self.mode not in MODES:
            raise ValueError(f"unknown filter mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "finite_window" and (self.window is None or self.window < 0):
            raise ValueError("finite_window mode needs a non-negative window")

    def with_mode(self, mode, window=None):
        return CouplingChannel(self.A, self.bath, mode, window, self.site)


def heisenberg(a, h, t):
    """exp(iHt) A exp(-iHt)."""
    sd = SpectralDecomposition.of(h)
    ae = sd.to_eigen(as_operator(a))
    return sd.from_eigen(np.exp(1j * sd.gaps * t) * ae)


def filter_factor(spec, gaps, mode="half_line", window=None):
    """Elementwise factor ``f(E_mn)`` with ``A^f_mn = A_mn f(E_mn)``."""
    gaps = np.asarray(gaps, dtype=float)
    if mode == "half_line":
        return np.pi * _bath.spectral_density(spec, gaps) + 1j * _bath.dawson_D(spec, gaps)
    if mode == "full_line":
        return np.pi * _bath.spectral_density(spec, gaps) + 0j
    if mode == "finite_window":
        return _window_factor(spec, gaps, window)
    raise ValueError(f"unknown filter mode {mode!r}")


def _window_factor(spec, gaps, window, panels=64, order=16):
    # composite Gauss-Legendre on [0, min(window, t_cut)]
    upper = min(float(window), _bath.t_cut(spec))
    if upper <= 0:
        return np.zeros_like(gaps, dtype=complex)
    x, w = roots_legendre(order)
    edges = np.linspace(0.0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    nodes = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    c = _bath.correlation(spec, nodes) * weights
    return np.exp(-1j * gaps[..., None] * nodes) @ c


def filtered(ch, spec=None, h=None):
    """Filtered operator of a channel in the computational basis.

    ``spec`` is the :class:`SpectralDecomposition` of the system Hamiltonian
    (or pass the Hamiltonian as ``h``).
    """
    sd = SpectralDecomposition.of(spec if spec is not None else h)
    f = filter_factor(ch.bath, sd.gaps, ch.mode, ch.window)
    return sd.from_eigen(f * sd.to_eigen(ch.A))


def filtered_multi(ops, correlators, spec, radius=np.inf, sites=None, independent=False):
    """Cross-filtered operators ``A^f_ij = int_0^inf C_ij(tau) A_i(-tau) dtau``.

    ``correlators`` maps ``(i, j)`` to the :class:`BathSpec` describing the
    correlation of ``B_i`` with ``B_j``; missing pairs are uncorrelated.
    Pairs with ``|site_i - site_j| >= radius`` are dropped.  Returns a dict
    keyed by ``(i, j)``; the master-equation term pairs ``A^f_ij`` with ``A_j``.
    """
    sd = SpectralDecomposition.of(spec)
    n = len(ops)
    if np.isfinite(radius) and sites is None:
        raise ValueError("a finite truncation radius needs site metadata")
    if sites is None:
        sites = list(range(n))
    if len(sites) != n:
        raise ValueError("one site index per operator required")
    out = {}
    for i in range(n):
        for j in range(n):
            if independent and i != j:
                continue
            if abs(sites[i] - sites[j]) >= radius:
                continue
            cspec = correlators.get((i, j))
            if cspec is None:
                continue
            f = filter_factor(cspec, sd.gaps, "half_line")
            out[(i, j)] = sd.from_eigen(f * sd.to_eigen(as_operator(ops[i])))
    return out


def _embed(op_block, block, n_sites, local_dim=2):
    """Tensor ``op_block`` (acting on sorted ``block``) with identities elsewhere."""
    block = sorted(block)
    rest = [s for s in range(n_sites) if s not in block]
    full = kron(op_block, np.eye(local_dim ** len(rest), dtype=complex))
    order = block + rest
    perm = np.argsort(order)
    n = n_sites
    t = full.reshape([local_dim] * (2 * n))
    t = t.transpose(list(perm) + [p + n for p in perm])
    return t.reshape(local_dim ** n, local_dim ** n)


def abs_correlation_integral(spec, a, b):
    """int_a^b |C(t)| dt for 0 <= a <= b (b may be inf)."""
    amp = spec.norm * np.sqrt(np.pi) / spec.t_b * np.exp(spec.beta ** 2 / (16 * spec.t_b ** 2))
    s = 2 * spec.t_b
    return float(amp * spec.t_b * np.sqrt(np.pi) * (erf(b / s) - erf(a / s)))


def truncated_filtered(ch, h_full, n_sites, block, support, v=None, c=1.0, x=0.0,
                       local_norm=1.0):
    """Filtered operator computed with the Hamiltonian restricted to ``block``.

    Returns ``(A^f_c, eps_bound)`` where the bound combines the correlation
    tail beyond ``T_x`` with a Lieb-Robinson leakage term ``exp(-c x)``;
    ``T_x`` solves ``|block|/2 - |support|/2 - v T_x = x``.
    """
    block = sorted(set(block))
    support = sorted(set(support))
    if not set(support) <= set(block):
        raise ValueError("block must contain the support of A")
    if v is None:
        v = 2.0 * local_norm
    dims = [2] * n_sites
    comp_dim = 2 ** (n_sites - len(block))
    h_c = partial_trace(h_full, dims, block) / comp_dim
    a_c = partial_trace(ch.A, dims, block) / comp_dim
    local = CouplingChannel(a_c, ch.bath, ch.mode, ch.window)
    af_c = _embed(filtered(local, h=h_c), block, n_sites)

    t_x = max(0.0, (len(block) / 2 - len(support) / 2 - x) / v)
    a_norm = np.linalg.norm(ch.A, 2)
    eps1 = a_norm * abs_correlation_integral(ch.bath, t_x, np.inf)
    eps2 = a_norm * abs_correlation_integral(ch.bath, 0.0, t_x) * np.exp(-c * x)
    return af_c, float(eps1 + eps2)
