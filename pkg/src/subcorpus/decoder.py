"""Decoder contract and a seeded ASR simulator.

A decoder turns an audio span of a program into time-stamped words.  Real
backends (e.g. a Kaldi nnet3 decoder with a biased LM) only need to satisfy
:class:`Decoder`.  :class:`SimulatedDecoder` replays a ground-truth word
track and injects substitutions, deletions and insertions so the pipeline can
be exercised without acoustic models.
"""
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .ngram_lm import BOS, EOS, UNK, NGramModel

_RESERVED = {BOS, EOS, UNK}


class ProgramNotFound(KeyError):
    pass


@dataclass(frozen=True)
class HypToken:
    surface: str
    start_ms: int
    end_ms: int
    confidence: Optional[float] = None

    def __post_init__(self):
        if self.start_ms < 0 or self.end_ms <= self.start_ms:
            raise ValueError(f"bad token timing {self.start_ms}-{self.end_ms}")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence outside [0, 1]")


@dataclass(frozen=True)
class TrackWord:
    surface: str
    start_ms: int
    end_ms: int
    subtitled: bool = True


@dataclass(frozen=True)
class GroundTruthTrack:
    words: Tuple[TrackWord, ...]

    def __post_init__(self):
        prev = 0
        for w in self.words:
            if w.end_ms <= w.start_ms or w.start_ms < prev:
                raise ValueError(f"track words must be sorted and non-overlapping (at {w})")
            prev = w.end_ms

    @property
    def end_ms(self):
        return self.words[-1].end_ms if self.words else 0

    def in_span(self, start_ms, end_ms):
        """Words whose midpoint lies in [start_ms, end_ms)."""
        return [w for w in self.words if start_ms <= (w.start_ms + w.end_ms) // 2 < end_ms]


@dataclass(frozen=True)
class ErrorConfig:
    sub_rate: float = 0.0
    del_rate: float = 0.0
    ins_rate: float = 0.0
    jitter_ms: int = 0
    seed: int = 0

    def __post_init__(self):
        for r in (self.sub_rate, self.del_rate, self.ins_rate):
            if not 0.0 <= r <= 1.0:
                raise ValueError("error rates must lie in [0, 1]")
        # a sum of exactly 1 is allowed so that del_rate=1 can model a silent decoder
        if self.sub_rate + self.del_rate + self.ins_rate > 1.0:
            raise ValueError("sub_rate + del_rate + ins_rate must be <= 1")
        if self.jitter_ms < 0:
            raise ValueError("jitter_ms must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def from_wer(cls, wer, jitter_ms=0, seed=0):
        """Split a target WER 70/15/15 across substitutions/deletions/insertions."""
        return cls(0.7 * wer, 0.15 * wer, 0.15 * wer, jitter_ms, seed)


class Decoder(Protocol):
    def decode(self, program_id: str, start_ms: int, end_ms: int, lm: Optional[NGramModel]) -> List[HypToken]:
        """Time-stamped words for the span, timestamps relative to the program start."""


def read_track(path) -> GroundTruthTrack:
    words = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4 or parts[3] not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: expected surface<TAB>start<TAB>end<TAB>0|1")
            words.append(TrackWord(parts[0], int(parts[1]), int(parts[2]), parts[3] == "1"))
    return GroundTruthTrack(tuple(words))


def write_track(track: GroundTruthTrack, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for w in track.words:
            f.write(f"{w.surface}\t{w.start_ms}\t{w.end_ms}\t{int(w.subtitled)}\n")


def span_rng(seed: int, program_id: str, start_ms: int) -> np.random.Generator:
    """PCG64 stream keyed by (seed, program, span start); stable across platforms."""
    pid = int.from_bytes(hashlib.blake2b(program_id.encode("utf-8"), digest_size=8).digest(), "little")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, pid, int(start_ms)])))


def simulated_decode(track: GroundTruthTrack, span: Tuple[str, int, int], cfg: ErrorConfig,
                     lm: Optional[NGramModel] = None, duration_ms: Optional[int] = None) -> List[HypToken]:
    """Noisy replay of the track words inside ``span = (program_id, start, end)``.

    Each word is independently deleted, substituted, or followed by an
    inserted word according to ``cfg``.  Replacement words come from the LM
    vocabulary when an LM is given (a biased LM can only emit its own words,
    so out-of-vocabulary speech is always replaced) and from the track
    vocabulary otherwise.
    """
    program_id, start_ms, end_ms = span
    duration = track.end_ms if duration_ms is None else duration_ms
    if start_ms < 0 or end_ms < start_ms or end_ms > duration:
        raise ValueError(f"span {start_ms}-{end_ms} outside program of {duration} ms")
    if end_ms == start_ms:
        return []
    words = track.in_span(start_ms, end_ms)
    if not words:
        return []
    rng = span_rng(cfg.seed, program_id, start_ms)
    if lm is not None:
        pool = sorted(w for w in lm.vocab if w not in _RESERVED)
        known = set(pool)
    else:
        pool = sorted({w.surface for w in track.words})
        known = None
    p_del = cfg.del_rate
    p_sub = p_del + cfg.sub_rate
    p_ins = p_sub + cfg.ins_rate
    draws = rng.random(len(words))
    picks = rng.integers(0, max(len(pool), 1), size=(len(words), 2))

    def other(word, k):
        if not pool:
            return UNK
        cand = pool[picks[k, 0]]
        if cand == word:
            if len(pool) == 1:
                return UNK
            cand = pool[(picks[k, 0] + 1 + picks[k, 1] % (len(pool) - 1)) % len(pool)]
        return cand

    out = []
    for k, w in enumerate(words):
        u = draws[k]
        if u < p_del:
            continue
        surface = w.surface
        if u < p_sub or (known is not None and surface not in known):
            surface = other(surface, k)
        if p_sub <= u < p_ins:
            mid = (w.start_ms + w.end_ms) // 2
            if mid - w.start_ms >= 1 and w.end_ms - mid >= 1:
                out.append([surface, w.start_ms, mid])
                out.append([pool[picks[k, 1] % len(pool)] if pool else UNK, mid, w.end_ms])
                continue
        out.append([surface, w.start_ms, w.end_ms])

    if cfg.jitter_ms:
        jit = rng.integers(-cfg.jitter_ms, cfg.jitter_ms + 1, size=(len(out), 2))
        for row, (a, b) in zip(out, jit):
            row[1] += int(a)
            row[2] += int(b)
    return _monotonize(out, duration)


def _monotonize(rows, duration):
    res = []
    prev = 0
    for surface, s, e in rows:
        s = max(s, prev, 0)
        e = max(e, s + 1)
        if e > duration:
            e = duration
            if s >= e:
                continue
        res.append(HypToken(surface, s, e))
        prev = e
    return res


class SimulatedDecoder:
    """Decoder backed by per-program ground-truth tracks."""

    def __init__(self, tracks: Dict[str, GroundTruthTrack], cfg: ErrorConfig = ErrorConfig(),
                 durations: Optional[Dict[str, int]] = None):
        self.tracks = dict(tracks)
        self.cfg = cfg
        self.durations = dict(durations or {})

    @classmethod
    def from_files(cls, paths: Dict[str, Path], cfg: ErrorConfig = ErrorConfig(), durations=None):
        return cls({pid: read_track(p) for pid, p in paths.items()}, cfg, durations)

    def decode(self, program_id, start_ms, end_ms, lm=None):
        try:
            track = self.tracks[program_id]
        except KeyError:
            raise ProgramNotFound(program_id) from None
        duration = self.durations.get(program_id, track.end_ms)
        return simulated_decode(track, (program_id, start_ms, end_ms), self.cfg, lm, duration)


def hypothesis_ok(tokens: Sequence[HypToken]) -> bool:
    return all(a.end_ms <= b.start_ms for a, b in zip(tokens, tokens[1:]))
