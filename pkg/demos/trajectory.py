"""Rumor against truth on a homogeneous network: one mean-field run.

Run with ``python3 demos/trajectory.py``.
"""
# %%
import numpy as np

from rumorsim import FIG2_PARAMS, StateVector, integrate

params = FIG2_PARAMS
traj = integrate(params, StateVector.two_seed(params.n))
print(f"terminated by {traj.terminated_by} at t = {traj.t_final:.2f}")

# %% Both spreader classes rise once and die out.
for name in ("S1", "S2", "H"):
    col = traj.column(name)
    j = int(np.argmax(col))
    print(f"{name:>2}: peak {col[j]:.4f} at t = {traj.times[j]:.2f}")

# %% Where everybody ends up.
fin = traj.final
print(f"ignorant {fin.i:.4f}, believed rumor {fin.r1:.4f}, believed truth {fin.r2:.4f}")

# %% A coarse text plot of the spreaders.
for t, row in zip(traj.times[:100:5], traj.states[:100:5]):
    bar1 = "#" * int(row[1] * 400)
    bar2 = "+" * int(row[2] * 400)
    print(f"t={t:6.2f} |{bar1}{bar2}")
