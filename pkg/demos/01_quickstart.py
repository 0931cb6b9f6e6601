"""
Quick start: train, predict, evaluate, save
===========================================

Fits one proximal hyperplane per rank on a reproducible sparse synthetic set,
then scores a held-out split with both rank rules.
"""
import tempfile
from pathlib import Path

import numpy as np

from lnpsvor import SolverConfig, evaluate, load_model, save_model, stratified_split, train
from lnpsvor.synthetic import sparse_ordinal

# 5000 text-like rows, 5 ranks, bias column appended
data = sparse_ordinal(n=5000, m=2000, seed=1)
print(data)

train_set, test_set = stratified_split(data, 0.3, seed=0)

# C1 weighs the epsilon-tube loss on rank k, C2 the hinge loss on the others
model = train(train_set, SolverConfig(C1=1.0, eps=0.1))
print("sweeps per rank:", model.sweeps, " solver CPU s: %.3f" % model.solve_time)

for rule in ("old", "new"):
    rep = evaluate(test_set.y, model.predict(test_set, rule), data.p)
    print(f"r_{rule}: MAE {rep.mae:.3f}  MSE {rep.mse:.3f}")

print(evaluate(test_set.y, model.predict(test_set), data.p).to_text())

# plain-text model files round-trip exactly
path = Path(tempfile.mkdtemp()) / "model.txt"
save_model(model, path)
again = load_model(path)
assert np.array_equal(again.predict(test_set), model.predict(test_set))
print("model file:", path, path.stat().st_size, "bytes")
