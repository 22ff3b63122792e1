"""A single qubit relaxing to its thermal state under the local master equation.

Run: python3 demos/01_single_qubit_relaxation.py
"""
# %% Setup: H = 0.5 Z + X coupled through A = 0.5 Z to a bath at beta = 1.
import numpy as np

from localme import BathSpec, CouplingChannel, EvolutionConfig, evolve, filtered, gibbs_state
from localme.linalg import SX, SZ
from localme.master import relaxation_time

h = 0.5 * SZ + SX
bath = BathSpec(beta=1.0)                     # t_b = beta/4, N = 1/(2 pi)
channel = CouplingChannel(0.5 * SZ, bath, "full_line")

# %% The filtered coupling. The full-line filter keeps only pi S(E), which makes the
# thermal state exactly stationary; the complete filter pi S + i D also carries the
# principal-value part.
af_full = filtered(channel, h=h)
af_complete = filtered(channel.with_mode("half_line"), h=h)
print("sqrt Tr A^f A^f+ (complete filter):", np.sqrt(np.trace(af_complete @ af_complete.conj().T).real))
print("sqrt Tr A^f A^f+ (full-line part): ", np.sqrt(np.trace(af_full @ af_full.conj().T).real))

# %% Evolve |+><+| for T = 100 with dt = 0.01 and a three-point time average (T' = 0.3).
plus = np.full((2, 2), 0.5, dtype=complex)
run = evolve(EvolutionConfig("local_me", dt=0.01, T=100.0, T_prime=0.3), h, [channel], plus)
gibbs = gibbs_state(h, 1.0)
print("max |rho(100) - Gibbs|:", np.max(np.abs(run.rhos[-1] - gibbs)))

# %% Relaxation time of the excited population toward its fixed point.
tau = relaxation_time(run.times, run.rhos[:, 0, 0].real, gibbs[0, 0].real)
print(f"1/e relaxation time: {tau:.3f}")
for t in (0, 1, 2, 5, 10, 20):
    k = int(round(t / 0.01))
    print(f"  t = {t:4.1f}  rho11 = {run.rhos[k, 0, 0].real:.6f}")
