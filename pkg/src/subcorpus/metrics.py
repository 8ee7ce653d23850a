"""Character error rate, word extraction rate and per-genre tables."""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np

from . import kernels

# first genre tag of a recording; order and labels follow the broadcaster EPG
GENRES = (
    "news_report",
    "variety_show",
    "information_tabloid",
    "drama",
    "documentary_culture",
    "hobby_education",
    "sports",
    "animation_special_effects",
    "music",
    "welfare",
    "movies",
    "theatre_performance",
)

GENRE_LABELS = {
    "news_report": "News, report",
    "variety_show": "Variety show",
    "information_tabloid": "Information/tabloid show",
    "drama": "Drama",
    "documentary_culture": "Documentary/culture",
    "hobby_education": "Hobby/education",
    "sports": "Sports",
    "animation_special_effects": "Animation/special effect movies",
    "music": "Music",
    "welfare": "Welfare",
    "movies": "Movies",
    "theatre_performance": "Theatre/public performance",
}

_ALIASES = {v.lower(): k for k, v in GENRE_LABELS.items()}


class UndefinedRateError(ValueError):
    pass


class UnknownProgramError(KeyError):
    pass


def canonical_genre(name: str) -> str:
    if name in GENRE_LABELS:
        return name
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown genre {name!r}") from None


def _codepoints(s):
    return np.array([ord(c) for c in s if not c.isspace()], dtype=np.int64)


def edit_distance(reference: str, hypothesis: str) -> int:
    """Levenshtein distance between the two strings with whitespace removed."""
    return int(kernels.levenshtein_ids(_codepoints(reference), _codepoints(hypothesis)))


def cer(reference: str, hypothesis: str) -> float:
    """Character error rate over Unicode scalar values, whitespace ignored.

    Fillers and disfluencies are scored like any other characters.
    """
    ref = _codepoints(reference)
    if ref.size == 0:
        raise UndefinedRateError("reference has no characters")
    return int(kernels.levenshtein_ids(ref, _codepoints(hypothesis))) / ref.size


def extraction_rate(raw_words: int, extracted_words: int) -> float:
    if raw_words <= 0:
        raise ValueError("raw_words must be > 0")
    if not 0 <= extracted_words <= raw_words:
        raise ValueError("extracted_words must lie in [0, raw_words]")
    return extracted_words / raw_words


@dataclass
class GenreRow:
    genre: str
    raw_ms: int = 0
    extracted_ms: int = 0
    raw_words: int = 0
    extracted_words: int = 0

    @property
    def rate(self):
        return self.extracted_words / self.raw_words if self.raw_words else 0.0


@dataclass
class ExtractionStats:
    rows: List[GenreRow]
    total: GenreRow

    def to_tsv(self) -> str:
        head = ["genre", "raw_hours", "extracted_hours", "extracted_pct",
                "raw_words", "extracted_words", "extraction_rate_pct"]
        lines = ["\t".join(head)]
        denom = self.total.extracted_ms
        for r in self.rows + [self.total]:
            share = 100.0 * r.extracted_ms / denom if denom else 0.0
            lines.append("\t".join([
                r.genre,
                f"{r.raw_ms / 3.6e6:.3f}",
                f"{r.extracted_ms / 3.6e6:.3f}",
                f"{share:.1f}",
                str(r.raw_words),
                str(r.extracted_words),
                f"{100.0 * r.rate:.1f}",
            ]))
        return "\n".join(lines) + "\n"


def genre_stats(programs: Iterable, segments: Iterable) -> ExtractionStats:
    """Per-genre hours and word counts keyed by each program's first genre tag.

    Raw words count every cue token; extracted words count the transcript
    tokens of the given (final) segments.  Rows are sorted by raw audio
    length, longest first.
    """
    rows: Dict[str, GenreRow] = {}
    genre_of = {}
    for p in programs:
        g = canonical_genre(p.genre_tags[0])
        genre_of[p.program_id] = g
        row = rows.setdefault(g, GenreRow(g))
        row.raw_ms += p.audio.duration_ms
        row.raw_words += sum(len(c.tokens) for c in p.cues)
    for s in segments:
        try:
            g = genre_of[s.program_id]
        except KeyError:
            raise UnknownProgramError(s.program_id) from None
        rows[g].extracted_ms += s.end_ms - s.start_ms
        rows[g].extracted_words += len(s.tokens)
    ordered = sorted(rows.values(), key=lambda r: (-r.raw_ms, GENRES.index(r.genre)))
    total = GenreRow("total")
    for r in ordered:
        if r.extracted_words > r.raw_words:
            raise ValueError(f"genre {r.genre}: more extracted than raw words")
        total.raw_ms += r.raw_ms
        total.extracted_ms += r.extracted_ms
        total.raw_words += r.raw_words
        total.extracted_words += r.extracted_words
    return ExtractionStats(ordered, total)


def corpus_extraction_rate(programs: Sequence, segments: Sequence) -> float:
    st = genre_stats(programs, segments)
    return extraction_rate(st.total.raw_words, st.total.extracted_words)
