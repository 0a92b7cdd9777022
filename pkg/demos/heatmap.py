"""Final size over the (lambda1, lambda2) square, against the analytic line.

Run with ``python3 demos/heatmap.py`` (about 10 s).
"""
# %%
import numpy as np

from rumorsim import FIG11_PARAMS
from rumorsim.experiments import boundary_mismatches, heatmap, unit_grid

grid = unit_grid(21)
hm = heatmap(grid, grid, FIG11_PARAMS)

# %% Rows are lambda1, columns lambda2. '#' means r >= 0.05; '.' means below.
# A lower-case 'x' or 'o' marks cells where the analytic condition disagrees.
print("lambda1 \\ lambda2 ->")
for a, l1 in enumerate(grid):
    row = ""
    for b in range(len(grid)):
        emp, ana = hm.r[a, b] >= 0.05, hm.analytic_spreads[a, b]
        row += ("#" if emp else ".") if emp == ana else ("x" if emp else "o")
    print(f"{l1:4.2f} {row}")

# %%
print("cells off by more than one grid step:", len(boundary_mismatches(hm)))
print("largest r in the corner block:", np.round(hm.r[:4, :4].max(), 4))
