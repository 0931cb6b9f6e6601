"""
Comparison with linear baselines
================================

One-vs-all SVC, epsilon-SVR rounded to the nearest rank, and RedSVM (one
shared direction plus p - 1 thresholds), each tuned by 5-fold CV over
C = 2^-5 .. 2^5 and scored on a held-out split.
"""
import warnings

import numpy as np

from lnpsvor import stratified_split
from lnpsvor.baselines import extend_redsvm
from lnpsvor.bench import average_ranks, bench_methods, render_table
from lnpsvor.synthetic import fan_clusters, sparse_ordinal

# RedSVM turns each instance into p - 1 binary rows with one extra coordinate
small = fan_clusters(n_per_rank=2)
ext = extend_redsvm(small)
print("extended rows for the first instance (label %d):" % small.y[0])
print(np.round(ext.X[:2].toarray(), 2), ext.signs[:2])

sets = {
    "sparse": stratified_split(sparse_ordinal(n=3000, m=1000, seed=4), 0.3, seed=0),
    "fan": stratified_split(fan_clusters(seed=7), 0.3, seed=0),
}
# the largest C cells can hit max_sweeps; CV still scores them
warnings.simplefilter("ignore")
recs = bench_methods(sets, solvers=("svc", "svr", "redsvm", "npsvor-dcd2"))
print(render_table(recs, ["dataset", "solver", "C1", "mae", "mse", "train_time"]))
print("average MAE rank:", average_ranks(recs, "mae"))
