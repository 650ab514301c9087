"""
Optimal parameters as data gets sparser
=======================================

Train on a fraction p of the links and evaluate on the rest, re-tuning
both hybrids at every p. The preferential hybrid can never do worse than
the original one on the grid, because theta=1 is one of its cells.
"""

from _data import load
from spdiff import GridSpec, sparsity_study

links, nu, ni, label = load()
grid = GridSpec(theta_values=(0.6, 1.0, 1.6, 2.2, 2.8),
                lambda_values=(0.0, 0.1, 0.2, 0.4, 0.6, 1.0), seeds=(0,), L=20)
curve = sparsity_study(links, nu, ni, (0.1, 0.3, 0.5, 0.7, 0.9), grid)

print(label)
print("   p   RS*_pref  RS*_orig  theta*  lambda*")
for p, rs_pref, rs_orig, theta, lam, *_ in curve.rows():
    print(f"{p:4.1f}   {rs_pref:.4f}    {rs_orig:.4f}   {theta:4.1f}    {lam:4.2f}")
print("Spearman correlation with p:", {k: round(v, 2) for k, v in curve.trends().items()})
