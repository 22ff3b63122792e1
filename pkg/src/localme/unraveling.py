"""Quantum-jump unraveling of the averaged step map.

One step of the averaged equation is the map ``rho -> sum_ij W_ij V_i rho V_j+``
over the vectors of :mod:`localme.positivity`.  Diagonalising that form gives
jump operators ``C_l = sqrt(l) sum_i c_i V_i`` with
``sum_l C_l rho C_l+`` equal to the step; negative eigenvalues (absent for a
large enough averaging window) are dropped and their mass recorded.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import dag
from .positivity import gram_matrix, step_vectors, weight_matrix

BLOCK = 256     # trajectories per independent random stream


class NegativeMassError(ValueError):
    pass


@dataclass(frozen=True)
class JumpSet:
    ops: tuple
    weights: tuple
    dropped_negative_mass: float
    dt: float

    @property
    def stacked(self):
        return np.array(self.ops)

    def completeness_defect(self):
        """max |sum C+ C - I|."""
        ops = self.stacked
        s = np.einsum("kji,kjl->il", ops.conj(), ops)
        return float(np.max(np.abs(s - np.eye(s.shape[0]))))

    def apply(self, rho):
        ops = self.stacked
        return np.einsum("kij,jl,kml->im", ops, rho, ops.conj())


def jump_operators(h, ch, dt, tprime=0.3, negativity_tol=None, avg_points=3, rank_tol=1e-12):
    """Jump operators of one averaged step (default tolerance ``0.02 dt``)."""
    if negativity_tol is None:
        negativity_tol = 0.02 * dt
    vecs = step_vectors(h, ch, dt, tprime, avg_points)
    ops_in = vecs.vectors
    o = gram_matrix(ops_in).T               # O_jk = Tr(V_j+ V_k)
    w = weight_matrix(dt, len(vecs.pairs))
    # orthonormalise the span, then diagonalise the Hermitian restriction
    lo, r = np.linalg.eigh(o)
    keep = lo > rank_tol * lo.max()
    b = r[:, keep] / np.sqrt(lo[keep])
    m = dag(b) @ o @ w @ o @ b
    mu, y = np.linalg.eigh(0.5 * (m + dag(m)))
    c = b @ y
    neg = mu < 0
    dropped = float(-mu[neg].sum())
    if dropped > negativity_tol:
        raise NegativeMassError(
            f"step map has negative mass {dropped:.3e} > {negativity_tol:.3e}; "
            "increase T' (see positivity.sweep_Tprime)")
    order = np.argsort(-mu)
    ops, weights = [], []
    stack = np.array(ops_in)
    for k in order:
        if mu[k] <= 0:
            continue
        ops.append(np.sqrt(mu[k]) * np.einsum("i,iab->ab", c[:, k], stack))
        weights.append(float(mu[k]))
    return JumpSet(tuple(ops), tuple(weights), dropped, dt)


def explicit_step(h, ch, dt, tprime=0.3, avg_points=3):
    """The step map written out: ``V rho V+ + (dt/n) sum_k (A^f_k rho A_k + A_k rho A^f_k+)``."""
    vecs = step_vectors(h, ch, dt, tprime, avg_points)
    n = len(vecs.pairs)

    def step(rho):
        out = vecs.V @ rho @ dag(vecs.V)
        for a, af in vecs.pairs:
            out = out + dt / n * (af @ rho @ a + a @ rho @ dag(af))
        return out

    return step


@dataclass
class TrajectoryEnsemble:
    seed: int
    n_traj: int
    states: np.ndarray                      # (n_traj, d) at the final time
    jump_log: np.ndarray                    # (n_traj, n_steps) branch indices
    dt: float
    snapshots: dict = field(default_factory=dict)   # step -> (n_traj, d)
    sampler: str = "normalized"

    def at(self, t):
        step = int(round(t / self.dt))
        if step not in self.snapshots:
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots[step]


def _run_block(ops, psi0, n_steps, rng, sampler, record):
    n = psi0.shape[0]
    k = ops.shape[0]
    psi = psi0.copy()
    log = np.empty((n, n_steps), dtype=np.int8 if k < 128 else np.int16)
    snaps = {}
    if 0 in record:
        snaps[0] = psi.copy()
    rows = np.arange(n)
    for step in range(1, n_steps + 1):
        branches = np.einsum("kab,nb->nka", ops, psi)
        if sampler == "normalized":
            p = np.sum(np.abs(branches) ** 2, axis=2)
            tot = p.sum(axis=1)
            if np.any(tot < 1e-30):
                raise FloatingPointError("all branch norms underflowed")
            cum = np.cumsum(p, axis=1)
            u = rng.random(n) * tot
            pick = np.minimum((cum < u[:, None]).sum(axis=1), k - 1)
            psi = branches[rows, pick] / np.sqrt(p[rows, pick])[:, None]
        else:
            pick = rng.integers(0, k, size=n)
            psi = np.sqrt(k) * branches[rows, pick]
        log[:, step - 1] = pick
        if step in record:
            snaps[step] = psi.copy()
    return psi, log, snaps


def sample_trajectories(jumps, psi0, n_steps, n_traj, seed=0, sampler="normalized",
                        record_times=(), threads=1):
    """Sample ``n_traj`` trajectories in blocks of independent random streams.

    Results depend only on ``seed`` (not on ``threads``): block ``b`` always
    uses child ``b`` of ``SeedSequence(seed)``.

    ``sampler='normalized'`` picks branch ``l`` with probability
    ``|C_l psi|^2`` and renormalises.  ``'uniform'`` picks a branch uniformly
    and keeps the unnormalised state scaled by ``sqrt(k)``; it is unbiased but
    its weight variance grows geometrically with the number of steps, so it is
    only useful over short horizons.
    """
    if sampler not in ("normalized", "uniform"):
        raise ValueError("sampler must be 'normalized' or 'uniform'")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("psi0 must be normalised")
    ops = jumps.stacked
    record = {int(round(t / jumps.dt)) for t in record_times}
    n_blocks = -(-n_traj // BLOCK)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [min(BLOCK, n_traj - b * BLOCK) for b in range(n_blocks)]

    def block(b):
        rng = np.random.default_rng(children[b])
        start = np.repeat(psi0[None, :], sizes[b], axis=0)
        return _run_block(ops, start, n_steps, rng, sampler, record)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(block, range(n_blocks)))
    else:
        parts = [block(b) for b in range(n_blocks)]
    states = np.concatenate([p[0] for p in parts])
    log = np.concatenate([p[1] for p in parts])
    snaps = {s: np.concatenate([p[2][s] for p in parts]) for s in sorted(record)}
    return TrajectoryEnsemble(seed, n_traj, states, log, jumps.dt, snaps, sampler)


def sample_trajectory(jumps, psi0, n_steps, rng):
    """Single trajectory driven by ``rng``; returns ``(psi, jump_log)``."""
    psi, log, _ = _run_block(jumps.stacked, np.asarray(psi0, dtype=complex)[None, :],
                             n_steps, rng, "normalized", set())
    return psi[0], log[0]


def estimate_observable(ensemble, op, t=None):
    """Trajectory mean of ``<psi|O|psi>`` and its jackknife standard error."""
    states = ensemble.states if t is None else ensemble.at(t)
    vals = np.einsum("na,ab,nb->n", states.conj(), op, states).real
    n = vals.size
    mean = float(vals.mean())
    if n < 2:
        return mean, float("nan")
    loo = (vals.sum() - vals) / (n - 1)
    err = float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))
    return mean, err


def ensemble_density(states):
    return np.einsum("na,nb->ab", states, states.conj()) / states.shape[0]
