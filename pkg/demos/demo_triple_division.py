"""
Tuning without peeking at the probe set
=======================================

Split links 80/10/10 into training, testing and probe. Parameters are chosen
on the testing links only; the probe links are touched once, at the end,
with training and testing links together as history.
"""

from _data import load
from spdiff import GridSpec, SplitSpec, tune_compare

links, nu, ni, label = load()
grid = GridSpec(theta_values=(0.6, 1.0, 1.6, 2.2, 2.8),
                lambda_values=(0.0, 0.1, 0.2, 0.3, 0.5, 1.0), seeds=(0,), L=20)
out = tune_compare(links, nu, ni, SplitSpec(0.1, 0.1, seed=0), grid)

print(label)
for name, res in out.items():
    t, p = res.testing, res.probe
    print(f"{name:12s} theta={res.params.theta} lambda={res.params.lam}  "
          f"testing RS={t.ranking_score:.4f}  probe RS={p.ranking_score:.4f} P={p.precision:.4f}")
