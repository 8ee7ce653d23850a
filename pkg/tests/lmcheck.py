"""Corpus generators and invariant checks shared by LM tests."""
import itertools
import math

from oracles import MKNOracle
from subcorpus.ngram_lm import NGramModel, count_ngrams, estimate_mkn


def random_corpus(rng, vocab=5, sentences=(5, 40), length=(1, 12)):
    words = [f"w{i}" for i in range(vocab)]
    return [[rng.choice(words) for _ in range(rng.randint(*length))]
            for _ in range(rng.randint(*sentences))]


def normalization_error(model: NGramModel):
    """Largest |sum_w P(w|c) - 1| over all contexts with continuations."""
    vocab = model.predicted_vocab()
    worst = 0.0
    for ctx in model.contexts():
        s = math.fsum(model.prob(w, ctx) for w in vocab)
        worst = max(worst, abs(s - 1.0))
    return worst


def binary_corpora(max_tokens):
    """Every token string over {a, b} up to ``max_tokens``, cut into sentences every possible way."""
    for n in range(1, max_tokens + 1):
        for toks in itertools.product("ab", repeat=n):
            for cuts in itertools.product((0, 1), repeat=n - 1):
                sents, cur = [], [toks[0]]
                for t, c in zip(toks[1:], cuts):
                    if c:
                        sents.append(cur)
                        cur = [t]
                    else:
                        cur.append(t)
                sents.append(cur)
                yield sents


def oracle_gap(sents, order):
    """Largest |P_model - P_oracle| over every observed context and word."""
    model = estimate_mkn(count_ngrams(sents, order), order)
    ref = MKNOracle(sents, order)
    worst = 0.0
    for ctx in ref.contexts():
        for w in model.predicted_vocab():
            worst = max(worst, abs(model.prob(w, ctx) - ref.prob(w, ctx)))
    return worst
