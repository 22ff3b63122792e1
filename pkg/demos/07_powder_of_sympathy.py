"""A frozen spin next to a relaxing one: why the bath bandwidth must stay moderate.

Run: python3 demos/07_powder_of_sympathy.py
"""
# %%
from localme import powder_scenario

# %% Spin 1 has a large gap (200) and no direct coupling; spin 2 (gap 2) relaxes.
# With the default t_b = 1/4 the filter has no weight at the spin-1 transitions.
ok = powder_scenario()
print(f"default t_b = {ok.t_b}: spin-1 survival {ok.spin1_survival:.12f}, "
      f"spin-2 T1 {ok.spin2_T1:.0f} (golden rule {ok.spin2_T1_golden:.0f})")

# %% Forcing a very narrow t_b makes the Gaussian filter weight exp(beta^2 / 16 t_b^2)
# explode. The equation loses trace and the guard reports the failure.
bad = powder_scenario(t_b=0.005)
print(f"forced t_b = {bad.t_b}: diverged = {bad.diverged}, spurious rate = {bad.spurious_rate}")
print("  ", bad.divergence)
