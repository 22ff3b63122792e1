"""How long must the time average be for one step to be completely positive?

Run: python3 demos/03_positivity_sweep.py
"""
# %%
import numpy as np

from localme import BathSpec, CouplingChannel, rho_prime_spectrum, sweep_Tprime
from localme.linalg import SX, SZ, kron

I2 = np.eye(2)
h1 = 0.5 * SZ + SX
ch1 = CouplingChannel(0.5 * SZ, BathSpec(1.0), "full_line")

# %% Spectrum of the dual state of one step. Without averaging the most negative
# eigenvalue is among the three largest in magnitude; averaging pushes it down.
for tp in (0.0, 0.2, 0.3, 0.5):
    rep = rho_prime_spectrum(h1, ch1, 0.01, tp)
    print(f"T' = {tp:.2f}  rank of most negative = {rep.rank_of_most_negative}  "
          f"min eigenvalue = {rep.min_eigenvalue:+.2e}")

# %% The sweep reports the smallest T' on its grid where that rank reaches 4.
res1 = sweep_Tprime(h1, ch1, dt=0.01)
h2 = 0.5 * kron(SZ, I2) - 0.7 * kron(I2, SZ) + 0.3 * kron(SZ, SZ) + kron(SX, I2) + kron(I2, SX)
res2 = sweep_Tprime(h2, CouplingChannel(0.5 * kron(SZ, I2), BathSpec(1.0), "full_line"),
                    dt=0.01, workers=4)
print(f"threshold, 1 qubit:  {res1.threshold:.2f} (grid {res1.resolution:.2f})")
print(f"threshold, 2 qubits: {res2.threshold:.2f}")
