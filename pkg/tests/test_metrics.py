import random

import pytest
from hypothesis import given, strategies as st

from oracles import edit_distance_oracle
from subcorpus.corpusio import AudioRef, ProgramRecording, SubtitleCue
from subcorpus.extract import Segment
from subcorpus.metrics import (GENRES, UndefinedRateError, UnknownProgramError, canonical_genre, cer,
                               edit_distance, extraction_rate, genre_stats)
from subcorpus.textnorm import Token

# (raw K words, extracted K words, reported rate %)
PUBLISHED = {
    "news_report": (9380, 8436, 89.9),
    "variety_show": (6330, 3368, 53.2),
    "information_tabloid": (4812, 3604, 74.9),
    "drama": (3175, 2304, 72.6),
    "documentary_culture": (2158, 1780, 82.5),
    "hobby_education": (1613, 1092, 67.7),
    "sports": (1140, 726, 63.7),
    "animation_special_effects": (801, 430, 53.7),
    "music": (281, 184, 65.6),
    "welfare": (286, 212, 74.0),
    "movies": (121, 72, 59.4),
    "theatre_performance": (150, 118, 78.5),
    "total": (30253, 22331, 73.8),
}


def test_cer_examples():
    assert cer("abc", "abc") == 0.0
    assert cer("abc", "axc") == pytest.approx(1 / 3)
    assert cer("abc", "") == 1.0
    assert cer("a b c", "abc") == 0.0
    with pytest.raises(UndefinedRateError):
        cer(" \n", "abc")


def test_cer_matches_oracle():
    rng = random.Random(0)
    alphabet = "あいうアイウ漢字ab "
    for _ in range(300):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 50)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 50)))
        ra, rb = a.replace(" ", ""), b.replace(" ", "")
        if not ra:
            continue
        assert cer(a, b) == edit_distance_oracle(ra, rb) / len(ra)


def test_cer_counts_scalars_not_graphemes():
    # a base letter plus combining mark is two scalar values
    assert cer("é", "e") == 0.5


@given(st.text(min_size=1, max_size=20), st.text(max_size=20), st.text(max_size=20))
def test_cer_triangle(a, b, c):
    if not "".join(a.split()):
        return
    n = len("".join(a.split()))
    assert cer(a, a) == 0.0
    assert cer(a, c) <= (edit_distance(a, b) + edit_distance(b, c)) / n + 1e-12


def test_extraction_rate_examples():
    assert extraction_rate(9380000, 8436000) == pytest.approx(0.899, abs=5e-4)
    assert extraction_rate(30253000, 22331000) == pytest.approx(0.738, abs=5e-4)
    assert extraction_rate(7, 7) == 1.0
    for bad in ((0, 0), (5, 6), (5, -1)):
        with pytest.raises(ValueError):
            extraction_rate(*bad)


def test_published_rates_consistent_with_rounded_counts():
    # the printed counts are rounded to thousands; the printed rate must be
    # reachable by some unrounded counts within half a thousand of them
    for raw, ext, pct in PUBLISHED.values():
        lo = extraction_rate(raw * 1000 + 500, ext * 1000 - 500)
        hi = extraction_rate(raw * 1000 - 500, ext * 1000 + 500)
        assert lo * 100 - 0.05 <= pct <= hi * 100 + 0.05


def test_published_columns_sum():
    rows = [v for k, v in PUBLISHED.items() if k != "total"]
    assert abs(sum(r[0] for r in rows) - PUBLISHED["total"][0]) <= len(rows)
    assert abs(sum(r[1] for r in rows) - PUBLISHED["total"][1]) <= len(rows)


def program(pid, genre, words, duration=60000):
    toks = tuple(Token(f"t{i}") for i in range(words))
    return ProgramRecording(pid, pid, (genre,), AudioRef("x", duration), (SubtitleCue(0, 1000, toks),))


def segment(pid, start, end, n):
    return Segment(f"{pid}-{start:010d}", pid, start, end, tuple(Token("t") for _ in range(n)), (3, 0))


def test_genre_stats():
    progs = [program("a", "drama", 100, 60000), program("b", "News, report", 50, 120000),
             program("c", "drama", 20, 30000)]
    segs = [segment("a", 0, 5000, 40), segment("b", 0, 9000, 50), segment("c", 0, 1000, 5)]
    st_ = genre_stats(progs, segs)
    assert [r.genre for r in st_.rows] == ["news_report", "drama"]
    drama = st_.rows[1]
    assert (drama.raw_words, drama.extracted_words, drama.raw_ms, drama.extracted_ms) == (120, 45, 90000, 6000)
    assert st_.total.raw_words == 170 and st_.total.extracted_words == 95
    tsv = st_.to_tsv().splitlines()
    assert tsv[0].split("\t") == ["genre", "raw_hours", "extracted_hours", "extracted_pct", "raw_words",
                                  "extracted_words", "extraction_rate_pct"]
    assert tsv[-1].split("\t")[0] == "total" and tsv[-1].endswith("\t55.9")


def test_genre_stats_edge_cases():
    progs = [program("a", "music", 10)]
    st_ = genre_stats(progs, [])
    assert st_.rows[0].extracted_words == 0 and st_.total.extracted_ms == 0
    full = genre_stats(progs, [segment("a", 0, 1000, 10)])
    assert full.rows[0].rate == 1.0
    with pytest.raises(UnknownProgramError):
        genre_stats(progs, [segment("zz", 0, 1000, 1)])
    with pytest.raises(ValueError):
        canonical_genre("cooking")
    assert len(GENRES) == 12
