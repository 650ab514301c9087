"""
The (theta, lambda) landscape
=============================

A coarse grid over both parameters, shown as a text heat map of the
ranking score. The theta=1 row is the original mass diffusion / heat
conduction hybrid; the best cell elsewhere is the preferential hybrid.
"""

import io

from _data import load
from spdiff import GridSpec, run_grid

links, nu, ni, label = load()
grid = GridSpec(theta_values=(0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 3.0),
                lambda_values=(0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0), seeds=(0,), L=20)
sweep = run_grid(links, nu, ni, grid, full=False)

buf = io.StringIO()
sweep.write_heatmap(buf, "RS")
for line in buf.getvalue().splitlines():
    cells = line.split("\t")
    print(cells[0].ljust(14) + "".join(c[:7].rjust(9) for c in cells[1:]))

###############################################################################
# Best cell overall against the best cell of the theta=1 row.

theta, lam, rs = sweep.best
_, lam1, rs1 = sweep.argmin(theta=1.0)
print(f"\n{label}")
print(f"preferential hybrid: theta={theta} lambda={lam} RS={rs:.4f}")
print(f"original hybrid:     theta=1 lambda={lam1} RS={rs1:.4f}")
