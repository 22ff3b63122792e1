"""Master-equation right-hand sides and the fixed-step integrator.

Variants (``EvolutionConfig.variant``):

``local_me``        time-averaged local equation, each channel's own filter
``local_me_gibbs``  same, with every channel switched to the full-line filter
``davies``          secular (rotating-wave) Lindblad generator from the same bath
``integral``        non-Markovian form driven by the stored history of rho
``exact_unitary``   closed-system evolution, channels ignored

All variants share the coupling term ``[A^f rho, A] + [A, rho A^f+]``
averaged over Heisenberg shifts ``A(t_k)``, ``t_k in {-m T', ..., m T'}``.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import argrelmax

from . import bath as _bath
from .filtered import SpectralDecomposition, filter_factor
from .linalg import commutator, dag, is_hermitian

log = logging.getLogger(__name__)

VARIANTS = ("local_me", "local_me_gibbs", "davies", "integral", "exact_unitary")


class EvolutionError(RuntimeError):
    """Raised when a run leaves the trace/Hermiticity tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class EvolutionConfig:
    variant: str = "local_me"
    dt: float = 0.01
    T: float = 10.0
    T_prime: float = 0.3
    avg_points: int = 3
    history_span: float | None = None
    counterterm: bool = False
    lamb_shift: bool = False
    warmup: str = "finite_window"
    sample_every: int = 1
    memory: str = "operator"
    trace_tol: float = 1e-6
    herm_tol: float = 1e-8

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not self.dt > 0 or self.T < self.dt:
            raise ValueError("need dt > 0 and T >= dt")
        if self.T_prime < 0:
            raise ValueError("T_prime must be non-negative")
        if self.avg_points < 1 or self.avg_points % 2 == 0:
            raise ValueError("avg_points must be an odd positive integer")
        if self.warmup not in ("finite_window", "constant_past"):
            raise ValueError("warmup must be 'finite_window' or 'constant_past'")
        if self.memory not in ("operator", "propagated"):
            raise ValueError("memory must be 'operator' or 'propagated'")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


@dataclass
class Evolution:
    times: np.ndarray
    rhos: np.ndarray
    config: EvolutionConfig = None

    def element(self, i, j):
        return self.rhos[:, i, j]

    def expectation(self, op):
        return np.einsum("tij,ji->t", self.rhos, op).real


# --------------------------------------------------------------------------
# coupling terms

def shifts(tprime, avg_points):
    m = (avg_points - 1) // 2
    return [k * tprime for k in range(-m, m + 1)]


def coupling_terms(h, channels, tprime=0.0, avg_points=1, mode=None):
    """List of ``(weight, A(t_k), A^f(t_k))`` over channels and averaging shifts."""
    sd = SpectralDecomposition.of(h)
    terms = []
    w = 1.0 / avg_points
    for ch in channels:
        f = filter_factor(ch.bath, sd.gaps, mode or ch.mode, ch.window)
        ae = sd.to_eigen(ch.A)
        for s in shifts(tprime, avg_points):
            phase = np.exp(1j * sd.gaps * s)
            terms.append((w, sd.from_eigen(phase * ae), sd.from_eigen(phase * f * ae)))
    return terms


def dissipator(rho, terms):
    out = np.zeros_like(rho, dtype=complex)
    for w, a, af in terms:
        x = af @ rho
        y = rho @ dag(af)
        out += w * (x @ a - a @ x + a @ y - y @ a)
    return out


def lamb_shift(ch):
    """Lamb-shift correction D(0) A^2 for one channel."""
    return _bath.dawson_D(ch.bath, 0.0) * (ch.A @ ch.A)


def effective_hamiltonian(h, channels, lamb=False, counterterm=False):
    h = np.asarray(h, dtype=complex)
    shift = sum((lamb_shift(ch) for ch in channels), np.zeros_like(h))
    if lamb:
        h = h + shift
    if counterterm:
        h = h - shift
    return h


def rhs_local_me(rho, h, channels, tprime=0.3, avg_points=3, filter_mode=None):
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    terms = coupling_terms(h, channels, tprime, avg_points, filter_mode)
    return -1j * commutator(h, rho) + dissipator(rho, terms)


def _davies_terms(h, channels, gap_tol=1e-9):
    """Per-Bohr-frequency pieces ``(A_w, A^f_w)`` of every channel."""
    sd = SpectralDecomposition.of(h)
    gaps = sd.gaps
    flat = np.sort(gaps.ravel())
    # cluster Bohr frequencies closer than gap_tol
    edges = np.flatnonzero(np.diff(flat) > gap_tol)
    starts = np.concatenate([[0], edges + 1])
    reps = flat[starts]
    ends = np.concatenate([flat[edges], [flat[-1]]])
    out = []
    for ch in channels:
        ae = sd.to_eigen(ch.A)
        fe = filter_factor(ch.bath, gaps, ch.mode, ch.window) * ae
        for lo, hi in zip(reps, ends):
            mask = (gaps >= lo - 0.5 * gap_tol) & (gaps <= hi + 0.5 * gap_tol)
            if not np.any(mask & (ae != 0)):
                continue
            out.append((sd.from_eigen(np.where(mask, ae, 0)),
                        sd.from_eigen(np.where(mask, fe, 0))))
    return out


def davies_dissipator(rho, pieces):
    out = np.zeros_like(rho, dtype=complex)
    for a_w, af_w in pieces:
        a_wd = dag(a_w)
        afd = dag(af_w)
        out += af_w @ rho @ a_wd - a_wd @ af_w @ rho + a_w @ rho @ afd - rho @ afd @ a_w
    return out


def rhs_davies(rho, h, channels, gap_tol=1e-9):
    """Secular generator: cross terms between distinct Bohr frequencies dropped."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    return -1j * commutator(h, rho) + davies_dissipator(rho, _davies_terms(h, channels, gap_tol))


# --------------------------------------------------------------------------
# superoperators (row-major vectorisation: vec(X rho Y) = kron(X, Y.T) vec(rho))

def _unitary_part(h):
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def superoperator(h, terms):
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    L = _unitary_part(h)
    for w, a, af in terms:
        afd = dag(af)
        L += w * (np.kron(af, a.T) - np.kron(a @ af, eye)
                  + np.kron(a, afd.T) - np.kron(eye, (afd @ a).T))
    return L


def davies_superoperator(h, channels, gap_tol=1e-9):
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    L = _unitary_part(h)
    for a_w, af_w in _davies_terms(h, channels, gap_tol):
        a_wd, afd = dag(a_w), dag(af_w)
        L += (np.kron(af_w, a_wd.T) - np.kron(a_wd @ af_w, eye)
              + np.kron(a_w, afd.T) - np.kron(eye, (afd @ a_w).T))
    return L


def generator(cfg, h, channels):
    """Liouvillian matrix of a Markovian variant."""
    h = effective_hamiltonian(h, channels, cfg.lamb_shift, cfg.counterterm)
    if cfg.variant == "exact_unitary":
        return _unitary_part(h)
    if cfg.variant == "davies":
        return davies_superoperator(h, channels)
    mode = "full_line" if cfg.variant == "local_me_gibbs" else None
    return superoperator(h, coupling_terms(h, channels, cfg.T_prime, cfg.avg_points, mode))


def rk4_step_matrix(L, dt):
    """One classical RK4 step of d(vec rho)/dt = L vec rho, as a matrix."""
    z = L * dt
    out = np.eye(L.shape[0], dtype=complex)
    term = np.eye(L.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ z / k
        out = out + term
    return out


# --------------------------------------------------------------------------
# history for the integral equation

@dataclass
class HistoryBuffer:
    """Ring of density matrices on a uniform time grid."""

    dt: float
    depth: int
    dim: int
    _data: np.ndarray = field(init=False, repr=False)
    _count: int = field(init=False, default=0)
    _t_last: float = field(init=False, default=np.nan)

    def __post_init__(self):
        self._data = np.zeros((self.depth + 1, self.dim, self.dim), dtype=complex)

    def push(self, t, rho):
        if self._count and not np.isclose(t, self._t_last + self.dt, rtol=0, atol=1e-9 * self.dt + 1e-12):
            raise ValueError(f"history samples must be spaced by dt; got t={t} after {self._t_last}")
        self._data[self._count % (self.depth + 1)] = rho
        self._count += 1
        self._t_last = t

    @property
    def t_last(self):
        return self._t_last

    @property
    def t_first(self):
        return self._t_last - (min(self._count, self.depth + 1) - 1) * self.dt

    def latest(self, k):
        """Sample ``k`` steps before the newest one (k = 0 is newest)."""
        if k < 0 or k >= min(self._count, self.depth + 1):
            raise IndexError(f"history holds {min(self._count, self.depth + 1)} samples")
        return self._data[(self._count - 1 - k) % (self.depth + 1)]

    def sample(self, times):
        """Linear interpolation at ``times`` within the stored span."""
        times = np.asarray(times, dtype=float)
        lag = (self._t_last - times) / self.dt
        held = min(self._count, self.depth + 1)
        if np.any(lag < -1e-9) or np.any(lag > held - 1 + 1e-9):
            raise ValueError(f"query outside stored span [{self.t_first}, {self.t_last}]")
        lag = np.clip(lag, 0, held - 1)
        k0 = np.floor(lag + 1e-9).astype(int)
        k0 = np.minimum(k0, held - 1)
        frac = lag - k0
        k1 = np.minimum(k0 + 1, held - 1)
        idx0 = (self._count - 1 - k0) % (self.depth + 1)
        idx1 = (self._count - 1 - k1) % (self.depth + 1)
        f = frac[:, None, None]
        return (1 - f) * self._data[idx0] + f * self._data[idx1]


@dataclass
class IntegralKernel:
    """Operator weights for ``int_0^L A(s - tau) C(tau) rho(t - delta - tau) dtau``.

    ``rho`` is treated as piecewise linear on the ``dt`` grid and the kernel is
    integrated exactly against each hat function, so a constant history
    reproduces the half-line filtered operator to quadrature precision.
    ``left[k, j]`` / ``right[k, j]`` are the halves of hat ``j`` for shift ``k``.
    """

    dt: float
    shifts: list
    delays: list
    weights: list
    left: np.ndarray
    right: np.ndarray
    shifted_a: list
    sd: SpectralDecomposition = None
    elem_left: np.ndarray = None
    elem_right: np.ndarray = None

    @classmethod
    def build(cls, h, ch, dt, span, tprime, avg_points, order=8):
        sd = SpectralDecomposition.of(h)
        n = int(np.ceil(span / dt))
        x, w = np.polynomial.legendre.leggauss(order)
        u = 0.5 * (x + 1)                      # nodes on [0, 1]
        wu = 0.5 * w
        tau = (np.arange(n)[:, None] + u[None, :]) * dt          # (n, order)
        c = _bath.correlation(ch.bath, tau) * wu * dt
        gaps = sd.gaps
        # phase[n, order, d, d] would be large; contract node axis per interval
        ph = np.exp(-1j * gaps[None, None] * tau[..., None, None])
        # hat on interval [j, j+1]: right half of node j weighs (1-u), left half of node j+1 weighs u
        r_int = np.einsum("no,noab->nab", c * (1 - u), ph)
        l_int = np.einsum("no,noab->nab", c * u, ph)
        ae = sd.to_eigen(ch.A)
        sh = shifts(tprime, avg_points)
        delays = [tprime if s < 0 else 0.0 for s in sh]
        left = np.zeros((len(sh), n + 1) + gaps.shape, dtype=complex)
        right = np.zeros_like(left)
        shifted_a = []
        for k, s in enumerate(sh):
            base = np.exp(1j * gaps * s) * ae
            right[k, :n] = [sd.from_eigen(base * r) for r in r_int]
            left[k, 1:] = [sd.from_eigen(base * lft) for lft in l_int]
            shifted_a.append(sd.from_eigen(base))
        weights = [1.0 / avg_points] * len(sh)
        elem_left = np.zeros((n + 1,) + gaps.shape, dtype=complex)
        elem_right = np.zeros_like(elem_left)
        elem_left[1:] = l_int
        elem_right[:n] = r_int
        return cls(dt, sh, delays, weights, left, right, shifted_a, sd, elem_left, elem_right)

    @property
    def nodes(self):
        return self.left.shape[1]


def rhs_integral(history, t, h, channels, tprime=0.3, counterterm=True, avg_points=3,
                 rho_now=None, kernels=None, warmup="finite_window", t0=0.0, rho0=None,
                 memory="operator"):
    """Right-hand side of the non-Markovian equation at time ``t``.

    ``history`` holds rho on the grid up to ``history.t_last <= t``; when
    ``t`` is past the last sample, ``rho_now`` is the value at ``t`` and the gap
    is bridged linearly.  With ``warmup='finite_window'`` the memory integral is
    cut at ``t0`` (bath switched on then); ``'constant_past'`` uses ``rho0``
    before ``t0``.
    """
    h = np.asarray(h, dtype=complex)
    if rho_now is None:
        rho_now = history.sample([t])[0]
    if kernels is None:
        span = history.depth * history.dt
        kernels = [IntegralKernel.build(h, ch, history.dt, span, tprime, avg_points)
                   for ch in channels]
    out = -1j * commutator(h, rho_now)
    for ch, ker in zip(channels, kernels):
        n = ker.nodes
        tau = np.arange(n) * ker.dt
        for k, (s, delay, w) in enumerate(zip(ker.shifts, ker.delays, ker.weights)):
            times = t - delay - tau
            lw, rw = ker.left[k], ker.right[k]
            keep = times >= t0 - 1e-9
            if memory == "propagated":
                lw, rw = ker.elem_left, ker.elem_right
            if warmup == "finite_window":
                n_keep = int(np.count_nonzero(keep))
                if n_keep == 0:
                    continue
                wts = lw[:n_keep] + rw[:n_keep]
                wts[n_keep - 1] = lw[n_keep - 1]
                times = times[:n_keep]
            else:
                wts = lw + rw
            rhos = _history_values(history, times, t, rho_now, t0, rho0)
            a = ker.shifted_a[k]
            if memory == "propagated":
                u = ker.sd.basis
                rho_e = dag(u) @ rhos @ u
                kmat = ker.sd.from_eigen(np.einsum("jab,jab->ab", wts,
                                                   ker.sd.to_eigen(a) @ rho_e))
            else:
                kmat = np.einsum("jab,jbc->ac", wts, rhos)
            out += w * (kmat @ a - a @ kmat + a @ dag(kmat) - dag(kmat) @ a)
        if counterterm:
            d0 = _bath.dawson_D(ch.bath, 0.0)
            for a, w in zip(ker.shifted_a, ker.weights):
                a2 = a @ a
                out += -1j * d0 * w * (rho_now @ a2 - a2 @ rho_now)
    return out


def _history_values(history, times, t, rho_now, t0, rho0):
    vals = np.empty((times.size,) + rho_now.shape, dtype=complex)
    past = times < t0 - 1e-9
    future = times > history.t_last + 1e-9
    inside = ~(past | future)
    if np.any(inside):
        vals[inside] = history.sample(times[inside])
    if np.any(future):
        # bridge between the newest stored sample and the current stage value
        span = t - history.t_last
        frac = ((times[future] - history.t_last) / span)[:, None, None]
        vals[future] = (1 - frac) * history.latest(0) + frac * rho_now
    if np.any(past):
        if rho0 is None:
            raise ValueError("history before t0 requested without rho0")
        vals[past] = rho0
    return vals


# --------------------------------------------------------------------------
# integration

def _check(rho, t, cfg):
    tr = np.trace(rho).real
    herm = np.max(np.abs(rho - dag(rho)))
    if not np.isfinite(tr) or abs(tr - 1) > cfg.trace_tol or not herm <= cfg.herm_tol:
        raise EvolutionError(
            f"{cfg.variant} run left tolerance at t={t:.6g}: trace {tr:.3e}, "
            f"Hermiticity defect {herm:.3e}",
            {"t": float(t), "trace": float(tr), "hermiticity": float(herm)})


def evolve(cfg, h, channels, rho0):
    """Fixed-step RK4 integration; returns an :class:`Evolution`."""
    rho0 = np.asarray(rho0, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(rho0, 1e-10) or abs(np.trace(rho0) - 1) > 1e-9:
        raise ValueError("rho0 must be a Hermitian unit-trace matrix")
    if cfg.variant == "integral":
        return _evolve_integral(cfg, h, channels, rho0)
    d = h.shape[0]
    n = cfg.n_steps
    if cfg.variant == "exact_unitary":
        sd = SpectralDecomposition.of(h)
        times = np.arange(0, n + 1, cfg.sample_every) * cfg.dt
        us = np.array([sd.propagator(t) for t in times])
        rhos = us @ rho0 @ dag(us)
        return Evolution(times, rhos, cfg)
    step = rk4_step_matrix(generator(cfg, h, channels), cfg.dt)
    v = rho0.reshape(-1)
    keep_t, keep_r = [0.0], [rho0.copy()]
    check_every = max(1, min(100, n // 10 or 1))
    for i in range(1, n + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            # a blow-up surfaces as EvolutionError from _check
            v = step @ v
        if i % check_every == 0 or i == n:
            _check(v.reshape(d, d), i * cfg.dt, cfg)
        if i % cfg.sample_every == 0:
            keep_t.append(i * cfg.dt)
            keep_r.append(v.reshape(d, d).copy())
    return Evolution(np.array(keep_t), np.array(keep_r), cfg)


def default_history_span(channels):
    spans = [max(5 * _bath.decay_time(ch.bath), _bath.t_cut(ch.bath)) for ch in channels]
    return max(spans) if spans else 0.0


def _evolve_integral(cfg, h, channels, rho0):
    dt = cfg.dt
    span = cfg.history_span or default_history_span(channels)
    for ch in channels:
        need = 5 * _bath.decay_time(ch.bath)
        if span < need - 1e-12:
            raise ValueError(f"history_span {span} shorter than 5 decay times ({need:.4g})")
    if cfg.avg_points > 1 and cfg.T_prime > 0:
        ratio = cfg.T_prime / dt
        if abs(ratio - round(ratio)) > 1e-6 or ratio < 10 - 1e-9:
            raise ValueError("integral variant needs T_prime a multiple of dt with dt <= T_prime/10")
    h_eff = effective_hamiltonian(h, channels, cfg.lamb_shift, False)
    kernels = [IntegralKernel.build(h_eff, ch, dt, span, cfg.T_prime, cfg.avg_points)
               for ch in channels]
    m = (cfg.avg_points - 1) // 2
    depth = int(np.ceil(span / dt)) + int(round(m * cfg.T_prime / dt)) + 2
    hist = HistoryBuffer(dt, depth, h.shape[0])
    hist.push(0.0, rho0)

    def f(t, r):
        return rhs_integral(hist, t, h_eff, channels, cfg.T_prime, cfg.counterterm,
                            cfg.avg_points, rho_now=r, kernels=kernels,
                            warmup=cfg.warmup, t0=0.0, rho0=rho0, memory=cfg.memory)

    rho = rho0.copy()
    keep_t, keep_r = [0.0], [rho0.copy()]
    for i in range(cfg.n_steps):
        t = i * dt
        k1 = f(t, rho)
        k2 = f(t + dt / 2, rho + dt / 2 * k1)
        k3 = f(t + dt / 2, rho + dt / 2 * k2)
        k4 = f(t + dt, rho + dt * k3)
        rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        _check(rho, t + dt, cfg)
        hist.push(t + dt, rho)
        if (i + 1) % cfg.sample_every == 0:
            keep_t.append(t + dt)
            keep_r.append(rho.copy())
    return Evolution(np.array(keep_t), np.array(keep_r), cfg)


def relaxation_time(times, values, fixed, t_min=1.0, t_max=40.0):
    """1/e time of ``|values - fixed|`` from an exponential fit to its envelope.

    The deviation oscillates while it decays; the fit uses its local maxima
    inside ``(t_min, t_max)`` (all points when it decays monotonically).
    """
    times = np.asarray(times, dtype=float)
    dev = np.abs(np.asarray(values) - fixed)
    window = (times > t_min) & (times < t_max) & (dev > 1e-12)
    peaks = argrelmax(dev)[0]
    peaks = peaks[window[peaks]]
    idx = peaks if peaks.size >= 3 else np.flatnonzero(window)
    if idx.size < 2:
        raise ValueError("not enough resolvable deviation to fit a relaxation time")
    slope = np.polyfit(times[idx], np.log(dev[idx]), 1)[0]
    return float(-1.0 / slope) if slope < 0 else float("inf")
