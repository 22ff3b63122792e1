"""Three equations for the same qubit: local, secular (Davies) and non-Markovian integral.

Run: python3 demos/02_davies_and_integral.py   (about 5 s)
"""
# %%
import numpy as np

from localme import BathSpec, CouplingChannel, EvolutionConfig, evolve, gibbs_state
from localme.linalg import SX, SZ
from localme.master import rhs_davies

h = 0.5 * SZ + SX
excited = np.diag([1.0, 0.0]).astype(complex)

# %% Davies keeps only transitions at matching Bohr frequencies. It fixes the same
# thermal state but misses the coherent oscillations before equilibrium.
ch = CouplingChannel(0.5 * SZ, BathSpec(1.0), "full_line")
local = evolve(EvolutionConfig("local_me", 0.01, 40.0), h, [ch], excited)
davies = evolve(EvolutionConfig("davies", 0.01, 40.0), h, [ch], excited)
print("Davies rhs at Gibbs:", np.max(np.abs(rhs_davies(gibbs_state(h, 1.0), h, [ch]))))
print("max |rho11 local - Davies|:", np.max(np.abs(local.rhos[:, 0, 0] - davies.rhos[:, 0, 0])))

# %% The integral equation keeps the memory of rho over the bath correlation time.
# For weak coupling it stays close to the Markovian solution.
weak = CouplingChannel(0.1 * SZ, BathSpec(1.0))
markov = evolve(EvolutionConfig("local_me", 0.01, 20.0), h, [weak], excited)
for memory in ("operator", "propagated"):
    integral = evolve(EvolutionConfig("integral", 0.01, 20.0, memory=memory), h, [weak], excited)
    d = np.abs(integral.rhos[:, 0, 0] - markov.rhos[:, 0, 0])
    print(f"memory={memory:10s} max |rho11 integral - local| for t >= 1: {d[100:].max():.4f}")
