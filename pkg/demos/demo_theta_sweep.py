"""
How much similarity preference helps
====================================

Sweep theta with lambda pinned at 1 (preferential mass diffusion) on one
90/10 split and compare every theta to plain mass diffusion at theta=1.
"""

import numpy as np

from _data import load
from spdiff import sweep_theta

links, nu, ni, label = load()
print(f"{label}: {len(links)} links, {nu} users x {ni} items")

thetas = tuple(round(0.2 * k, 10) for k in range(1, 21))
sweep = sweep_theta(links, nu, ni, thetas, lambda_fixed=1.0, seeds=(0,), L=20)

###############################################################################
# Ranking score is lower-is-better; precision higher-is-better.

rs = sweep.mean("RS")[:, 0]
prec = sweep.mean("P")[:, 0]
base = rs[thetas.index(1.0)]
for theta, r, p in zip(thetas, rs, prec):
    bar = "#" * int(round(400 * (base - r) / base)) if r < base else ""
    print(f"theta={theta:3.1f}  RS={r:.4f}  P={p:.4f}  {bar}")

k = int(np.argmin(rs))
print(f"best theta={thetas[k]} improves RS by {100 * (base - rs[k]) / base:.1f}% over theta=1")
