import io
import math
import random

import pytest

from lmcheck import binary_corpora, normalization_error, oracle_gap, random_corpus
from subcorpus.ngram_lm import (BOS, EOS, UNK, ArpaFormatError, DiscountFallbackWarning, NGramModel,
                                build_biased_lm, count_ngrams, estimate_mkn, interpolate_em, perplexity,
                                prune, read_arpa, sequence_log10prob, write_arpa)


def test_count_examples():
    c = count_ngrams([["a", "b"]], 2)
    assert c[("a", "b")] == 1 and c[(BOS, "a")] == 1 and c[("b", EOS)] == 1
    assert count_ngrams([["a"]], 1)[("a",)] == 1
    assert count_ngrams([["a", "a", "a"]], 2)[("a", "a")] == 2


def test_count_errors():
    with pytest.raises(ValueError):
        count_ngrams([["a"]], 0)
    with pytest.raises(ValueError):
        count_ngrams([], 2)


def test_count_consistency():
    rng = random.Random(1)
    for _ in range(20):
        order = rng.randint(1, 4)
        c = count_ngrams(random_corpus(rng), order)
        for g, n in c.items():
            if len(g) < order:
                ext = sum(v for h, v in c.items() if len(h) == len(g) + 1 and h[:-1] == g)
                assert n == (n if g[-1] == EOS else 0) + ext


def test_mkn_matches_oracle_on_larger_corpora():
    # these corpora have full count-of-counts, exercising the Chen-Goodman discounts
    rng = random.Random(2)
    for _ in range(15):
        sents = random_corpus(rng, vocab=rng.randint(3, 8), sentences=(30, 80))
        for order in (1, 2, 3, 4):
            assert oracle_gap(sents, order) < 1e-12


def test_mkn_matches_oracle_small_exhaustive():
    for sents in binary_corpora(4):
        for order in (1, 2, 3):
            assert oracle_gap(sents, order) < 1e-12


def test_normalization_random():
    rng = random.Random(3)
    for _ in range(25):
        order = rng.randint(1, 4)
        m = estimate_mkn(count_ngrams(random_corpus(rng), order), order)
        assert normalization_error(m) < 1e-9


def test_discounts_and_probabilities_in_range():
    rng = random.Random(4)
    m = estimate_mkn(count_ngrams(random_corpus(rng, sentences=(80, 80)), 3), 3)
    for k, (d1, d2, d3) in m.discounts.items():
        assert 0 <= d1 < 1 and 0 <= d2 < 2 and 0 <= d3 < 3
    for g, (lp, bo) in m.entries.items():
        if g != (BOS,):
            assert lp <= 0.0 and 10 ** lp > 0


def test_discount_fallback_warns():
    with pytest.warns(DiscountFallbackWarning):
        estimate_mkn(count_ngrams([["a", "b", "a", "b"]], 1), 1)


def test_unigram_example_abab():
    m = estimate_mkn(count_ngrams([["a", "b", "a", "b"]], 1), 1)
    assert m.prob("a") == pytest.approx(m.prob("b"))
    assert set(m.predicted_vocab()) == {"a", "b", EOS, UNK}
    assert normalization_error(m) < 1e-12


def test_beats_uniform():
    rng = random.Random(5)
    sents = random_corpus(rng, vocab=5, sentences=(100, 100))
    m = estimate_mkn(count_ngrams(sents, 3), 3)
    assert perplexity(m, sents) < len(m.predicted_vocab())


def test_oov_maps_to_unk_and_sequence_scores():
    m = estimate_mkn(count_ngrams([["a", "b", "c"], ["a", "c"]], 2), 2)
    assert m.log10prob("zzz", ["a"]) == m.log10prob(UNK, ["a"])
    assert sequence_log10prob(m, []) == pytest.approx(m.log10prob(EOS, [BOS]))
    lp = sequence_log10prob(m, ["x", "y"])
    expect = m.log10prob(UNK, [BOS]) + m.log10prob(UNK, [UNK]) + m.log10prob(EOS, [UNK])
    assert lp == pytest.approx(expect)
    own = sequence_log10prob(m, ["a", "b", "c"])
    assert -math.inf < own < 0


def test_prune_rules():
    rng = random.Random(6)
    sents = random_corpus(rng, sentences=(40, 40))
    m = estimate_mkn(count_ngrams(sents, 3), 3)
    assert prune(m, 1e-30) is m
    p = prune(m, 1 - 1e-9)
    assert all(len(g) == 1 for g in p.entries)
    assert normalization_error(p) < 1e-9
    for thr in (0.05, 0.1, 0.2):
        q = prune(m, thr)
        assert normalization_error(q) < 1e-9
        for g, (lp, _) in q.entries.items():
            assert lp == m.entries[g][0]
            if len(g) > 1:
                assert 10 ** lp >= thr or any(h[:len(g)] == g for h in q.entries if len(h) > len(g))
    with pytest.raises(ValueError):
        prune(m, 0.0)
    with pytest.raises(ValueError):
        prune(m, 1.0)


def test_prune_removes_tiny_entry():
    m = estimate_mkn(count_ngrams([["a", "b"], ["b", "a"], ["a", "a", "b"]], 2), 2)
    entries = dict(m.entries)
    entries[("b", "b")] = (-9.0, None)
    p = prune(NGramModel(2, entries, m.discounts), 1e-8)
    assert ("b", "b") not in p.entries


def test_arpa_roundtrip_fixed_point():
    rng = random.Random(7)
    sents = random_corpus(rng, sentences=(30, 30))
    m = estimate_mkn(count_ngrams(sents, 3), 3)
    text = write_arpa(m)
    m1 = read_arpa(text)
    assert write_arpa(m1) == text
    assert read_arpa(io.StringIO(text).readlines()).entries == m1.entries
    assert round(perplexity(m, sents), 6) == round(perplexity(m1, sents), 6)


@pytest.mark.parametrize("bad", ["", "\\data\\\nngram 1=2\n\n\\1-grams:\n-1.0\ta\n\\end\\\n",
                                 "\\1-grams:\n-1\ta\n", "\\data\\\nngram 1=1\n\\1-grams:\n-1.0\ta b\n\\end\\\n"])
def test_arpa_errors(bad):
    with pytest.raises(ArpaFormatError):
        read_arpa(bad)


def _unigram(pa, pb, pe=0.05):
    e = {("a",): (math.log10(pa), None), ("b",): (math.log10(pb), None), (EOS,): (math.log10(pe), None),
         (BOS,): (-99.0, None)}
    return NGramModel(1, e)


def test_em_one_sided():
    res = interpolate_em(_unigram(0.9, 0.05), _unigram(0.1, 0.85), [["a", "a", "a"]] * 5)
    assert res.lam >= 0.999


def test_em_symmetric():
    res = interpolate_em(_unigram(0.8, 0.15), _unigram(0.15, 0.8), [["a", "b"]], init=0.2)
    assert abs(res.lam - 0.5) < 1e-4


def test_em_identical_models_fixed_point():
    m = _unigram(0.6, 0.35)
    res = interpolate_em(m, m, [["a", "b"]], init=0.3)
    assert res.lam == pytest.approx(0.3)


def test_em_monotone_random():
    rng = random.Random(8)
    for _ in range(10):
        a = estimate_mkn(count_ngrams(random_corpus(rng), 2), 2)
        b = estimate_mkn(count_ngrams(random_corpus(rng), 3), 3)
        res = interpolate_em(a, b, random_corpus(rng, sentences=(3, 10)), init=rng.random())
        tr = res.heldout_ll_trace
        assert all(y >= x - 1e-10 * abs(x) for x, y in zip(tr, tr[1:]))
        assert 0.0 <= res.lam <= 1.0


def test_em_errors():
    m = _unigram(0.6, 0.35)
    with pytest.raises(ValueError):
        interpolate_em(m, m, [])


def test_biased_lm_examples():
    m = build_biased_lm([["こん", "にち", "は"]], 3)
    v = [w for w in m.predicted_vocab()]
    assert max(v, key=lambda w: m.prob(w, ["こん", "にち"])) == "は"
    with pytest.raises(ValueError):
        build_biased_lm([], 3)


def test_segment_lm_prefers_its_segment():
    rng = random.Random(9)
    program = random_corpus(rng, vocab=30, sentences=(60, 60))
    seg = program[10:14]
    pm = build_biased_lm(program, 3)
    sm = build_biased_lm(seg, 3)
    n = sum(len(s) + 1 for s in seg)
    assert sum(sequence_log10prob(sm, s) for s in seg) / n >= sum(sequence_log10prob(pm, s) for s in seg) / n
