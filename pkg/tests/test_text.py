import math

import numpy as np
import pytest

from lnpsvor.text import (BIGRAM_SEP, TextOptions, Vocabulary, analyze, build_vocab, featurize,
                          load_scale_corpus, read_corpus, tokenize, vectorize)

PLAIN = TextOptions(stopwords=False, min_count=1, max_df=1.0, bigrams=False)


def test_tokenize_lowercases_and_splits():
    assert tokenize("Great,  MOVIE!it's x2 a", PLAIN) == ["great", "movie", "it", "x2"]


def test_bigrams_joined_with_separator():
    terms = analyze("good plot twist", PLAIN.__class__(**{**PLAIN.__dict__, "bigrams": True}))
    assert terms == ["good", "plot", "twist", f"good{BIGRAM_SEP}plot", f"plot{BIGRAM_SEP}twist"]
    assert all(BIGRAM_SEP not in t for t in tokenize("snake_case word", PLAIN))


def test_stopwords_removed():
    assert tokenize("the film and the plot", TextOptions()) == ["film", "plot"]


def test_max_df_prunes_universal_term():
    docs = ["good film here", "good plot there", "good acting again"]
    vocab = build_vocab(docs, TextOptions(min_count=1, bigrams=False))
    assert "good" not in vocab.index
    assert "film" in vocab.index


def test_short_token_pruned():
    docs = ["a zz a zz", "a qq a qq", "a ww a ww", "x y z"] * 3
    vocab = build_vocab(docs, TextOptions(stopwords=False, min_count=1, bigrams=False))
    assert "a" not in vocab.index and "zz" in vocab.index


def test_min_count_prunes_rare_term():
    docs = ["rare word", "rare word", "common word", "common thing", "common stuff", "other"]
    vocab = build_vocab(docs, TextOptions(bigrams=False, max_df=1.0))
    assert "rare" not in vocab.index      # two occurrences
    assert "common" in vocab.index        # three occurrences


def test_indices_contiguous_and_lexicographic():
    vocab = build_vocab(["beta alpha", "gamma beta", "alpha delta"], PLAIN)
    assert vocab.terms == sorted(vocab.terms)
    assert sorted(vocab.index.values()) == list(range(len(vocab)))


def test_empty_vocabulary_rejected():
    with pytest.raises(ValueError):
        build_vocab(["the and", "a an"], TextOptions())
    with pytest.raises(ValueError):
        build_vocab([], TextOptions())


def _vocab():
    return build_vocab(["alpha beta", "gamma delta", "alpha gamma", "beta delta"], PLAIN)


def test_vectorize_empty_doc():
    v = vectorize("nothing known here", _vocab())
    assert v.indices.size == 0


def test_vectorize_single_term_is_unit():
    v = vectorize("alpha", _vocab())
    assert v.indices.size == 1 and v.values[0] == pytest.approx(1.0)


def test_vectorize_symmetric_terms():
    v = vectorize("alpha beta", _vocab())  # equal tf, equal df
    np.testing.assert_allclose(v.values, [1 / math.sqrt(2)] * 2, rtol=1e-12)


def test_tfidf_formula():
    vocab = build_vocab(["alpha beta", "alpha gamma", "delta beta", "gamma gamma"], PLAIN)
    v = vectorize("alpha alpha gamma", vocab)
    n = 4
    raw = {"alpha": 2 * (math.log((1 + n) / (1 + 2)) + 1), "gamma": 1 * (math.log((1 + n) / (1 + 2)) + 1)}
    norm = math.sqrt(sum(x * x for x in raw.values()))
    got = dict(zip((vocab.terms[i] for i in v.indices), v.values))
    for t, x in raw.items():
        assert got[t] == pytest.approx(x / norm, rel=1e-12)


def test_rows_unit_norm_and_order_independent():
    docs = ["the plot was good and the acting was good", "bad plot", "acting acting plot", "", "good bad"]
    vocab = build_vocab(docs * 3, TextOptions(min_count=1, max_df=0.9))
    d1 = featurize(docs, [1, 2, 3, 1, 2], vocab)
    d2 = featurize(docs[::-1], [2, 1, 3, 2, 1], vocab)
    norms = np.sqrt(np.asarray(d1.X.multiply(d1.X).sum(axis=1)).ravel())
    assert np.allclose(norms[norms > 0], 1.0) and norms[3] == 0
    assert (d1.X[::-1] != d2.X).nnz == 0


def test_duplicated_corpus_same_terms():
    # with min_count = 1 the count rule cannot separate the two builds
    docs = ["the plot was good", "bad acting and plot", "good acting", "weird film", "plot plot"]
    opts = TextOptions(min_count=1)
    assert build_vocab(docs, opts).terms == build_vocab(docs * 2, opts).terms


def test_vocabulary_round_trip(tmp_path):
    vocab = build_vocab(["alpha beta", "gamma delta", "alpha gamma", "beta delta"] * 2,
                        TextOptions(min_count=2, stopwords=False, max_df=0.75))
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    back = Vocabulary.load(path)
    assert back.index == vocab.index and np.array_equal(back.df, vocab.df)
    assert back.n_docs == vocab.n_docs and back.options == vocab.options
    (tmp_path / "bad.txt").write_text("junk\n")
    with pytest.raises(ValueError):
        Vocabulary.load(tmp_path / "bad.txt")


def test_stemming_merges_inflections():
    pytest.importorskip("nltk")
    opts = TextOptions(stem=True, stopwords=False, bigrams=False)
    assert tokenize("running runs", opts) == ["run", "run"]


def test_featurize_labels():
    vocab = _vocab()
    d = featurize(["alpha", "beta", "gamma"], [7, 3, 9], vocab)
    assert d.labels.tolist() == [3, 7, 9] and d.y.tolist() == [2, 1, 3]
    assert d.m == len(vocab)


def test_read_corpus(tmp_path):
    path = tmp_path / "c.tsv"
    path.write_text("3\tnice film\n\n1\tawful\n")
    assert read_corpus(path) == ([3, 1], ["nice film", "awful"])
    path.write_text("3 no tab\n")
    with pytest.raises(ValueError, match=":1"):
        read_corpus(path)


def test_scale_corpus_layout(tmp_path):
    a = tmp_path / "scaledata" / "Alice"
    a.mkdir(parents=True)
    (a / "subj.Alice").write_text("great movie\nterrible movie\n")
    (a / "label.4class.Alice").write_text("3\n0\n")
    assert load_scale_corpus(tmp_path) == ([3, 0], ["great movie", "terrible movie"])
    with pytest.raises(FileNotFoundError):
        load_scale_corpus(tmp_path / "scaledata" / "missing")
