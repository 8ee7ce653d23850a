"""Subtitle token normalisation and Kanji numerals."""
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

POS_TAGS = frozenset({
    "noun", "verb", "adjective", "adverb", "particle", "auxiliary",
    "symbol", "interjection", "number", "other",
})

KANJI_DIGITS = "〇一二三四五六七八九"
_SMALL_UNITS = (("千", 1000), ("百", 100), ("十", 10))
_BIG_UNITS = (("兆", 10 ** 12), ("億", 10 ** 8), ("万", 10 ** 4))
NUMERAL_CHARS = frozenset(KANJI_DIGITS + "十百千万億兆" + "0123456789" + "０１２３４５６７８９")

MAX_NUMERAL = 10 ** 16


class KanjiNumeralError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    surface: str
    reading: Optional[str] = None
    pos: str = "other"

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"invalid token surface {self.surface!r}")
        if self.pos not in POS_TAGS:
            raise ValueError(f"unknown part of speech {self.pos!r}")


@dataclass(frozen=True)
class NormalizationConfig:
    convert_numerals: bool = True
    strip_symbols: frozenset = field(default_factory=frozenset)
    lowercase_latin: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strip_symbols", frozenset(self.strip_symbols))
        bad = sorted(c for c in self.strip_symbols if c in NUMERAL_CHARS)
        if bad:
            raise ValueError(f"strip_symbols may not contain numeral characters: {bad}")


def arabic_to_kanji(n: int) -> str:
    """Positional Kanji numeral with myriad grouping (万, 億, 兆).

    >>> arabic_to_kanji(12345)
    '一万二千三百四十五'
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError("expected an int")
    if n < 0 or n >= MAX_NUMERAL:
        raise ValueError(f"{n} outside [0, 10^16)")
    if n == 0:
        return KANJI_DIGITS[0]
    out = []
    for name, size in _BIG_UNITS + (("", 1),):
        group, n = divmod(n, size)
        if group:
            out.append(_group_to_kanji(group) + name)
    return "".join(out)


def _group_to_kanji(g):
    s = []
    for name, size in _SMALL_UNITS:
        q, g = divmod(g, size)
        if q:
            # 十/百/千 drop a leading 一
            s.append(("" if q == 1 else KANJI_DIGITS[q]) + name)
    if g:
        s.append(KANJI_DIGITS[g])
    return "".join(s)


def kanji_to_int(s: str) -> int:
    """Parse a well-formed Kanji numeral.

    Accepts the forms produced by :func:`arabic_to_kanji` and also an explicit
    一 before 十/百/千.  Anything else (positional digit strings, repeated or
    out-of-order units, bare 万) raises :class:`KanjiNumeralError`.
    """
    if not s:
        raise KanjiNumeralError("empty numeral")
    if s == KANJI_DIGITS[0]:
        return 0
    total = 0
    pos = 0
    last_big = None
    for name, size in _BIG_UNITS + (("", 1),):
        if name:
            idx = s.find(name, pos)
            if idx < 0:
                continue
            chunk = s[pos:idx]
            if not chunk:
                raise KanjiNumeralError(f"{name} without a coefficient in {s!r}")
            value = _parse_group(chunk, s)
            pos = idx + 1
        else:
            chunk = s[pos:]
            if not chunk:
                break
            value = _parse_group(chunk, s)
            pos = len(s)
        total += value * size
        last_big = name
    if pos != len(s) or last_big is None:
        raise KanjiNumeralError(f"malformed numeral {s!r}")
    return total


def _parse_group(chunk, whole):
    value = 0
    i = 0
    prev_size = 10 ** 4
    while i < len(chunk):
        c = chunk[i]
        digit = KANJI_DIGITS.find(c)
        if digit > 0:
            nxt = chunk[i + 1] if i + 1 < len(chunk) else ""
            size = dict(_SMALL_UNITS).get(nxt)
            if size is None:
                if i + 1 != len(chunk):
                    raise KanjiNumeralError(f"misplaced digit in {whole!r}")
                size = 1
                i += 1
            else:
                i += 2
            coeff = digit
        else:
            size = dict(_SMALL_UNITS).get(c)
            if size is None:
                raise KanjiNumeralError(f"unexpected character {c!r} in {whole!r}")
            coeff = 1
            i += 1
        if size >= prev_size:
            raise KanjiNumeralError(f"units out of order in {whole!r}")
        prev_size = size
        value += coeff * size
    if value == 0:
        raise KanjiNumeralError(f"empty group in {whole!r}")
    return value


_FULLWIDTH_DIGITS = str.maketrans("０１２３４５６７８９", "0123456789")


def _numeral_value(surface):
    t = surface.translate(_FULLWIDTH_DIGITS)
    # single digits stay as they are; leading zeros ("007") are read digit by digit
    if len(t) < 2 or not t.isascii() or not t.isdigit() or t[0] == "0":
        return None
    v = int(t)
    return v if v < MAX_NUMERAL else None


def _lower_latin(s):
    out = []
    for c in s:
        if "A" <= c <= "Z":
            c = chr(ord(c) + 32)
        elif "Ａ" <= c <= "Ｚ":
            c = chr(ord(c) + 32)
        out.append(c)
    return "".join(out)


def identity_reading(token: Token) -> Token:
    return token


def normalize_tokens(raw: Iterable[Token], cfg: NormalizationConfig = NormalizationConfig(),
                     reading_hook: Callable[[Token], Token] = identity_reading) -> list:
    """Clean a token sequence for LM training and alignment.

    Symbols in ``cfg.strip_symbols`` are deleted (tokens left empty are
    dropped), Latin letters optionally lowercased, and multi-digit Arabic
    numerals rewritten in Kanji with ``pos="number"``.  ``reading_hook`` is
    called on every rewritten numeral so a pronunciation lexicon can fill in
    the reading.
    """
    out = []
    strip = cfg.strip_symbols
    for tok in raw:
        surface = tok.surface
        if strip:
            surface = "".join(c for c in surface if c not in strip)
        if not surface:
            continue
        if cfg.lowercase_latin:
            surface = _lower_latin(surface)
        value = _numeral_value(surface) if cfg.convert_numerals else None
        if value is not None:
            out.append(reading_hook(Token(arabic_to_kanji(value), None, "number")))
            continue
        out.append(tok if surface == tok.surface else replace(tok, surface=surface))
    return out


def tokens_from_text(text: str) -> list:
    """Whitespace-tokenise ``surface`` or ``surface/pos`` items."""
    out = []
    for item in text.split():
        surface, sep, pos = item.rpartition("/")
        if sep and surface and pos in POS_TAGS:
            out.append(Token(surface, None, pos))
        else:
            out.append(Token(item))
    return out


def tokens_to_text(tokens: Iterable[Token], with_pos: bool = True) -> str:
    if with_pos:
        return " ".join(f"{t.surface}/{t.pos}" for t in tokens)
    return " ".join(t.surface for t in tokens)
