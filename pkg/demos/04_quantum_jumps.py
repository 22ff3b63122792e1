"""Unravel the averaged equation into quantum-jump trajectories.

Run: python3 demos/04_quantum_jumps.py   (about 2 s)
"""
# %%
import numpy as np

from localme import (BathSpec, CouplingChannel, EvolutionConfig, estimate_observable, evolve,
                     jump_operators, sample_trajectories)
from localme.linalg import SX, SZ

h = 0.5 * SZ + SX
ch = CouplingChannel(0.5 * SZ, BathSpec(1.0), "full_line")
dt = 0.01

# %% Jump operators of one step at T' = 0.3, where the step map is positive enough.
jumps = jump_operators(h, ch, dt, 0.3)
print("jump operators:", len(jumps.ops), " weights:", np.round(jumps.weights, 6))
print("dropped negative mass:", jumps.dropped_negative_mass)
print("|sum C+C - I|:", jumps.completeness_defect())

# %% 4000 trajectories from |+>, sampled with per-block seeds so the result does not
# depend on the thread count.
psi0 = np.array([1.0, 1.0]) / np.sqrt(2)
ens = sample_trajectories(jumps, psi0, 2000, 4000, seed=1, record_times=(1, 5, 20), threads=4)
ref = evolve(EvolutionConfig("local_me", dt, 20.0), h, [ch], np.outer(psi0, psi0))
p = np.diag([1.0, 0.0])
for t in (1, 5, 20):
    mean, err = estimate_observable(ens, p, t)
    exact = ref.rhos[int(round(t / dt)), 0, 0].real
    print(f"t = {t:2d}  trajectories {mean:.4f} +- {err:.4f}   density matrix {exact:.4f}")
