"""Complete-positivity diagnostic for one integration step.

Over a step ``dt`` the averaged equation maps ``rho`` to

    V rho V+ + (dt/3) sum_k (A_k rho A^f_k+ + A^f_k rho A_k+),

with ``A_k = A(t_k)``, ``A^f_k = A^f(t_k)`` at the shifts ``t_k`` and
``V = exp(-iH dt - K dt)``, ``K = (1/3) sum_k A_k A^f_k``.  The map is
completely positive iff its dual state ``sum_ij W_ij |V_i><V_j|`` is
positive; its non-zero spectrum is that of ``W O`` with the overlap matrix
``O_jk = Tr(V_j+ V_k)``.
"""
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .filtered import SpectralDecomposition, filter_factor
from .linalg import ConditioningWarning, expm


@dataclass
class StepMapVectors:
    V: np.ndarray
    pairs: list            # [(A(t_k), A^f(t_k)), ...]
    shifts: list

    @property
    def vectors(self):
        out = [self.V]
        for a, af in self.pairs:
            out += [a, af]
        return out


@dataclass
class PositivityReport:
    Tprime: float
    eigenvalues: np.ndarray        # sorted by |lambda|, largest first
    rank_of_most_negative: int     # 1-based position in that ordering
    threshold_flag: bool
    imag_residue: float = 0.0

    @property
    def by_value(self):
        return np.sort(self.eigenvalues)[::-1]

    @property
    def min_eigenvalue(self):
        return float(self.eigenvalues.min())


@dataclass
class SweepResult:
    reports: list
    threshold: float | None
    resolution: float
    found: bool = field(init=False)

    def __post_init__(self):
        self.found = self.threshold is not None


def gram_matrix(vectors):
    """``G_ij = Tr(V_i V_j+)``."""
    vs = np.array([np.asarray(v, dtype=complex) for v in vectors])
    if len({v.shape for v in vs}) > 1:
        raise ValueError("all vectors must have the same shape")
    flat = vs.reshape(len(vs), -1)
    return flat @ flat.conj().T


def weight_matrix(dt, n_pairs=3):
    w = np.zeros((1 + 2 * n_pairs, 1 + 2 * n_pairs))
    w[0, 0] = 1.0
    for k in range(n_pairs):
        w[1 + 2 * k, 2 + 2 * k] = w[2 + 2 * k, 1 + 2 * k] = dt / n_pairs
    return w


def step_vectors(h, ch, dt, tprime, avg_points=3):
    sd = SpectralDecomposition.of(h)
    f = filter_factor(ch.bath, sd.gaps, ch.mode, ch.window)
    ae = sd.to_eigen(ch.A)
    m = (avg_points - 1) // 2
    # order: 0, +T', -T', then further shells
    shifts = [0.0]
    for k in range(1, m + 1):
        shifts += [k * tprime, -k * tprime]
    pairs = []
    for s in shifts:
        ph = np.exp(1j * sd.gaps * s)
        pairs.append((sd.from_eigen(ph * ae), sd.from_eigen(ph * f * ae)))
    k_avg = sum(a @ af for a, af in pairs) / len(pairs)
    v = expm(-1j * sd.hamiltonian() * dt - k_avg * dt)
    return StepMapVectors(v, pairs, shifts)


def _spectrum(vecs, dt):
    o = gram_matrix(vecs.vectors).T          # O_jk = Tr(V_j+ V_k)
    w = weight_matrix(dt, len(vecs.pairs))
    lam, c = np.linalg.eig(w @ o)
    scale = max(np.max(np.abs(lam)), 1e-300)
    res = np.linalg.norm(w @ o @ c - c * lam, axis=0)
    if np.any(res > 1e-8 * max(scale, 1.0)):
        warnings.warn(f"eigen residual {res.max():.2e}", ConditioningWarning, stacklevel=3)
    return lam, scale


def rho_prime_spectrum(h, ch, dt, tprime, avg_points=3):
    vecs = step_vectors(h, ch, dt, tprime, avg_points)
    lam, scale = _spectrum(vecs, dt)
    imag = float(np.max(np.abs(lam.imag)) / scale)
    lam = lam.real[np.argsort(-np.abs(lam.real), kind="stable")]
    # eigenvalues at round-off level count as zero, not as negative
    tol = 1e-12 * scale
    neg = lam < -tol
    rank = int(np.argmin(lam)) + 1 if np.any(neg) else 0
    flag = (not np.any(neg)) or rank >= 4
    return PositivityReport(float(tprime), lam, rank, bool(flag), imag)


def sweep_Tprime(h, ch, dt=0.01, tprimes=None, steps=61, t_range=(0.0, 0.6), workers=1,
                 avg_points=3):
    """Smallest ``T'`` on the grid whose most negative eigenvalue ranks >= 4th."""
    if tprimes is None:
        lo, hi = t_range
        if lo < 0 or hi > 1:
            raise ValueError("T' range must lie within [0, 1]")
        tprimes = np.linspace(lo, hi, steps)
    tprimes = np.asarray(tprimes, dtype=float)

    def one(tp):
        return rho_prime_spectrum(h, ch, dt, tp, avg_points)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(one, tprimes))
    else:
        reports = [one(tp) for tp in tprimes]
    threshold = next((r.Tprime for r in reports if r.threshold_flag), None)
    resolution = float(np.min(np.diff(tprimes))) if tprimes.size > 1 else 0.0
    return SweepResult(reports, threshold, resolution)
