"""
From review text to ranks
=========================

Tokenise, drop stopwords, add bigrams, prune rare/ubiquitous terms, weight by
smoothed TF-IDF and L2-normalise. The resulting sparse rows go straight into
the ordinal trainer.
"""
import numpy as np

from lnpsvor import SolverConfig, cross_validate
from lnpsvor.text import TextOptions, build_vocab, featurize, vectorize

rng = np.random.default_rng(0)
words = {1: ["awful", "boring", "dull", "waste"], 2: ["flat", "uneven", "okay", "forgettable"],
         3: ["solid", "enjoyable", "decent", "fun"], 4: ["brilliant", "superb", "moving", "masterpiece"]}
filler = ["film", "plot", "acting", "story", "scenes", "cast", "ending", "director"]

labels, docs = [], []
for _ in range(200):
    r = int(rng.integers(1, 5))
    near = [w for k in (r - 1, r, r + 1) for w in words.get(k, [])]
    toks = list(rng.choice(filler, 6)) + list(rng.choice(words[r], 2)) + list(rng.choice(near, 1))
    rng.shuffle(toks)
    labels.append(r)
    docs.append("The " + " ".join(toks) + ".")

vocab = build_vocab(docs, TextOptions())
print(len(vocab), "terms, e.g.", vocab.terms[:8])
v = vectorize(docs[0], vocab)
print("doc 0:", docs[0])
print("  ", {vocab.terms[i]: round(float(x), 3) for i, x in zip(v.indices, v.values)})

data = featurize(docs, labels, vocab).with_bias(1.0)
res = cross_validate(data, "npsvor-dcd2", SolverConfig(C1=1.0), folds=5, seed=0)
print(f"5-fold CV: MAE {res.mae_mean:.3f} +/- {res.mae_std:.3f}, MSE {res.mse_mean:.3f}")
