"""
Effect of the epsilon-insensitive tube
======================================

A wider tube lets more rank-k instances sit at zero loss, so fewer dual
variables end up nonzero. Ratios are relative to eps = 0.
"""
from lnpsvor import SolverConfig, stratified_split
from lnpsvor.bench import bench_epsilon, render_table
from lnpsvor.synthetic import sparse_ordinal

data = sparse_ordinal(n=20000, m=5000, seed=3)
tr, te = stratified_split(data, 0.3, seed=0)
rows = bench_epsilon(tr, te, (0.0, 0.1, 0.2, 0.3, 0.4, 0.5), SolverConfig(C1=1.0), repeats=3)
print(render_table(rows, ["eps", "mae", "mse", "nsv", "mae_ratio", "time_ratio", "nsv_ratio"]))
