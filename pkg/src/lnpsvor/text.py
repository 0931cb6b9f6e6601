"""Text to sparse TF-IDF features over unigrams and bigrams.

Pipeline per document: lowercase, split on non-alphanumeric runs, optional
Porter stemming, stopword removal, drop tokens shorter than ``min_len``, then
emit unigrams and adjacent-token bigrams (joined with ``_``, which never
occurs inside a token). The vocabulary keeps terms seen at least
``min_count`` times whose document frequency is at most ``max_df``.
"""
from __future__ import annotations

import functools
import math
import re
from collections import Counter
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .sparse import SparseDataset, SparseVector

_TOKEN = re.compile(r"[^\W_]+")
BIGRAM_SEP = "_"


@functools.lru_cache(maxsize=1)
def english_stopwords() -> frozenset:
    text = resources.files("lnpsvor").joinpath("data/stopwords_en.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


@functools.lru_cache(maxsize=1)
def _stemmer():
    try:
        from nltk.stem import PorterStemmer
    except ImportError as exc:  # optional extra
        raise ImportError("stemming needs nltk: pip install lnpsvor[stem]") from exc
    return functools.lru_cache(maxsize=None)(PorterStemmer().stem)


@dataclass(frozen=True)
class TextOptions:
    stem: bool = False
    stopwords: bool = True
    min_len: int = 2
    min_count: int = 3
    max_df: float = 0.5
    bigrams: bool = True


def tokenize(doc: str, opts: TextOptions = TextOptions()) -> list[str]:
    toks = _TOKEN.findall(doc.lower())
    if opts.stem:
        stem = _stemmer()
        toks = [stem(t) for t in toks]
    stop = english_stopwords() if opts.stopwords else frozenset()
    return [t for t in toks if len(t) >= opts.min_len and t not in stop]


def analyze(doc: str, opts: TextOptions = TextOptions()) -> list[str]:
    toks = tokenize(doc, opts)
    if opts.bigrams:
        toks = toks + [a + BIGRAM_SEP + b for a, b in zip(toks, toks[1:])]
    return toks


@dataclass
class Vocabulary:
    index: dict        # term -> column
    df: np.ndarray     # document frequency per column
    n_docs: int
    options: TextOptions

    def __len__(self):
        return len(self.index)

    @property
    def terms(self) -> list[str]:
        return sorted(self.index, key=self.index.get)

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_docs) / (1.0 + self.df)) + 1.0

    def save(self, path):
        opts = " ".join(f"{k}={int(v) if isinstance(v, bool) else v}" for k, v in asdict(self.options).items())
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#lnpsvor-vocab 1 n_docs={self.n_docs} {opts}\n")
            for t in self.terms:
                fh.write(f"{t} {self.index[t]} {int(self.df[self.index[t]])}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            head = fh.readline().split()
            if head[:2] != ["#lnpsvor-vocab", "1"]:
                raise ValueError(f"{path}: not a vocabulary file")
            meta = dict(kv.split("=", 1) for kv in head[2:])
            types = {"stem": lambda s: bool(int(s)), "stopwords": lambda s: bool(int(s)),
                     "bigrams": lambda s: bool(int(s)), "min_len": int, "min_count": int,
                     "max_df": float}
            opts = TextOptions(**{k: types[k](meta[k]) for k in types if k in meta})
            index, df = {}, []
            for line in fh:
                term, idx, d = line.split()
                index[term] = int(idx)
                df.append((int(idx), int(d)))
        dfa = np.zeros(len(index), dtype=np.int64)
        for i, d in df:
            dfa[i] = d
        return cls(index, dfa, int(meta["n_docs"]), opts)


def build_vocab(docs, opts: TextOptions = TextOptions()) -> Vocabulary:
    docs = list(docs)
    if not docs:
        raise ValueError("empty corpus")
    count, df = Counter(), Counter()
    for doc in docs:
        terms = analyze(doc, opts)
        count.update(terms)
        df.update(set(terms))
    n = len(docs)
    kept = sorted(t for t, c in count.items() if c >= opts.min_count and df[t] <= opts.max_df * n)
    if not kept:
        raise ValueError("vocabulary is empty after pruning")
    return Vocabulary({t: i for i, t in enumerate(kept)},
                      np.array([df[t] for t in kept], dtype=np.int64), n, opts)


def _tfidf_row(doc: str, vocab: Vocabulary, idf: np.ndarray):
    tf = Counter(t for t in analyze(doc, vocab.options) if t in vocab.index)
    if not tf:
        return np.empty(0, np.int64), np.empty(0)
    cols = np.array(sorted(vocab.index[t] for t in tf), dtype=np.int64)
    inv = {vocab.index[t]: c for t, c in tf.items()}
    vals = np.array([inv[c] for c in cols], dtype=float) * idf[cols]
    return cols, vals / math.sqrt(float(vals @ vals))


def vectorize(doc: str, vocab: Vocabulary) -> SparseVector:
    cols, vals = _tfidf_row(doc, vocab, vocab.idf)
    return SparseVector(cols, vals)


def featurize(docs, labels, vocab: Vocabulary, label_map=None) -> SparseDataset:
    """TF-IDF rows for ``docs``; labels are mapped to ranks like :func:`load_libsvm`."""
    idf = vocab.idf
    indptr, indices, values = [0], [], []
    for doc in docs:
        c, v = _tfidf_row(doc, vocab, idf)
        indices.append(c)
        values.append(v)
        indptr.append(indptr[-1] + c.size)
    X = sp.csr_matrix((np.concatenate(values) if values else np.empty(0),
                       np.concatenate(indices) if indices else np.empty(0, np.int64),
                       np.array(indptr)), shape=(len(indptr) - 1, len(vocab)))
    raw = np.asarray(labels)
    if label_map is None:
        label_map = np.unique(raw)
        check = True
    else:
        label_map = np.asarray(label_map)
        check = False
    y = np.searchsorted(label_map, raw) + 1
    return SparseDataset(X, y, label_map, check_ranks=check)


def read_corpus(path):
    """Read ``label<TAB>text`` lines into (labels, docs)."""
    labels, docs = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            lab, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'label<TAB>text'")
            labels.append(int(lab))
            docs.append(text)
    return labels, docs


def load_scale_corpus(root):
    """Movie-review "scale dataset v1.0" layout: per-reviewer ``subj.*`` and ``label.4class.*`` files."""
    root = Path(root)
    labels, docs = [], []
    subj_files = sorted(root.rglob("subj.*"))
    if not subj_files:
        raise FileNotFoundError(f"no subj.* files under {root}")
    for subj in subj_files:
        reviewer = subj.name[len("subj."):]
        lab = subj.with_name(f"label.4class.{reviewer}")
        texts = subj.read_text(encoding="latin-1").splitlines()
        labs = [int(t) for t in lab.read_text().split()]
        if len(texts) != len(labs):
            raise ValueError(f"{subj}: {len(texts)} documents but {len(labs)} labels")
        docs.extend(texts)
        labels.extend(labs)
    return labels, docs
