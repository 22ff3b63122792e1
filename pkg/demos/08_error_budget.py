"""A-priori error rates for the Lindblad, local and integral equations.

Run: python3 demos/08_error_budget.py
"""
# %%
from localme import error_budget

for n in (1, 5):
    eb = error_budget(n_qubits=n, A_norm=0.1, beta=1.0, T_prime=0.3, t=10.0)
    print(f"n = {n}:  eps_mkv {eb.eps_mkv:.2e}  eps_ave {eb.eps_ave:.2e}  "
          f"eps_born {eb.eps_born:.2e}  eps_rwa {eb.eps_rwa_opt:.2e}")
    for table, eq, born, other in eb.rows():
        if table == "n_qubits":
            print(f"    {eq:9s} born {born:.2e}  other {other:.2e}")
