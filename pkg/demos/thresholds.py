"""Spreading thresholds and the final-size law.

Run with ``python3 demos/thresholds.py``.
"""
# %%
from rumorsim import FIG2_PARAMS, FIG11_PARAMS, StateVector, integrate
from rumorsim.analysis import (
    epsilon,
    solve_final_size,
    spreading_condition,
    threshold_report,
)

print(threshold_report(FIG11_PARAMS).as_text())

# %% Below and above the rumor threshold, starting from one rumor spreader.
rumor = FIG11_PARAMS.with_(theta2=0.0)
for lam in (0.05, 0.1, 0.2, 0.3):
    tr = integrate(rumor.with_(lambda1=lam), StateVector.rumor_seed(rumor.n))
    print(f"lambda1 = {lam:.2f}: final r = {tr.final.r:.4f}")

# %% The closed-form final size for the rumor on its own.
p = FIG2_PARAMS.with_(theta2=0.0)
eps = epsilon(p)
tr = integrate(p, StateVector.rumor_seed(p.n))
print(f"eps = {eps:.4f}: root R = {solve_final_size(eps):.6f}, ODE R = {tr.final.r:.6f}")

# %% The joint condition for both messages together.
for l1, l2 in [(0.1, 0.05), (0.2, 0.1), (0.0, 0.2)]:
    v = spreading_condition(FIG11_PARAMS.with_(lambda1=l1, lambda2=l2))
    print(f"({l1}, {l2}): spreads={v.spreads}, margin {v.margin:+.3f}")
